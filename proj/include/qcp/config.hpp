#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace qcp {

// Probability of reading 1 per measurement program point (pc of the MEAS).
struct OutcomeBias {
    double default_bias = 0.5;
    std::map<std::uint32_t, double> by_pc;

    double at(std::uint32_t pc) const
    {
        auto it = by_pc.find(pc);
        return it == by_pc.end() ? default_bias : it->second;
    }
};

struct QpuConfig {
    std::uint32_t qubit_count = 0;  // 0: take the program's .qubits
    double single_gate_ns = 20.0;
    double two_gate_ns = 40.0;
    double meas_pulse_ns = 300.0;
    double daq_ns = 150.0;
    double jitter_ns = 0.0;
    OutcomeBias outcome_bias;
};

struct CostModel {
    std::uint32_t t_switch = 2;
    std::uint32_t sched_response = 4;
    std::uint32_t fetch_bandwidth = 4;  // words per cycle
    std::uint32_t branch_penalty = 2;
    std::uint32_t ctx_switch_cycles = 3;
    std::uint32_t pipeline_depth = 3;
    std::uint32_t timing_queue_capacity = 64;  // operation groups
};

enum class DependencyChoice { Auto, Direct, Priority };

struct MachineConfig {
    std::uint32_t cores = 1;
    std::uint32_t superscalar_width = 1;
    double clock_period_ns = 10.0;
    double gate_time_ns = 20.0;  // QPU step time used for TR
    QpuConfig qpu;
    CostModel costs;
    std::uint64_t seed = 1;
    DependencyChoice dependency = DependencyChoice::Auto;
    bool prefetch = true;
    bool initial_prefetch = true;
    // Zero-cost block allocation and switching (ideal speedup reference).
    bool ideal_scheduling = false;
    std::uint64_t deadlock_timeout = 1'000'000;
    bool record_cycles = true;  // per-cycle attribution needed for CES
};

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check_config(const MachineConfig& cfg);

nlohmann::json to_json(const MachineConfig& cfg);
MachineConfig config_from_json(const nlohmann::json& j);
MachineConfig load_config_file(const std::string& path);

}  // namespace qcp
