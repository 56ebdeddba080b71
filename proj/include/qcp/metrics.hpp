#pragma once

// Post-processing over a finished run: circuit steps, the four-way cycle
// decomposition of each step, time ratios, execution time and speedups.

#include <cstdint>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "qcp/engine.hpp"

namespace qcp {

// All operations dispatched from one core timeline at one nominal time.
struct Step {
    std::uint32_t core = 0;
    double nominal_ns = 0;
    std::int64_t first_dispatch = 0;
    std::int64_t last_dispatch = 0;
    std::vector<std::size_t> events;  // indices into Trace::issues
};

struct StepMetrics {
    std::size_t step_index = 0;
    std::uint32_t core = 0;
    double nominal_ns = 0;
    std::uint32_t qices = 0;
    std::uint32_t cycles_quantum = 0;
    std::uint32_t cycles_classical = 0;
    std::uint32_t cycles_stall = 0;
    std::uint32_t cycles_feedback = 0;
    std::uint32_t ces = 0;
    double tr = 0;
};

// Steps per core, each core's list ordered by last dispatch cycle; cores in id order.
std::vector<Step> steps_of(const Trace& trace);

// `steps` as returned by steps_of; step i is measured from the previous step
// of the same core (or from time zero).
StepMetrics ces_of_step(const Trace& trace, const std::vector<Step>& steps, std::size_t i);

double tr_of_step(const StepMetrics& m, double clock_ns, double gate_ns);

struct RunReport {
    std::vector<StepMetrics> steps;
    double avg_tr = 0;
    double max_tr = 0;
    // Highest per-core mean TR (cross-core aggregate).
    double max_core_avg_tr = 0;
    double total_exec_ns = 0;
    std::int64_t total_cycles = 0;
    std::vector<TimingViolation> violations;
    std::size_t collisions = 0;
    std::size_t issued_ops = 0;
    std::size_t blocks = 0;
    std::uint64_t program_hash = 0;
    std::uint32_t qubit_count = 0;
    nlohmann::json config;
    std::vector<MrceEvent> mrce;
    bool drained_contexts = false;
};

RunReport make_report(const RunResult& run);

nlohmann::json to_json(const RunReport& r);
// step,core,nominal_ns,qices,quantum,classical,stall,feedback,ces,tr
void write_steps_csv(std::ostream& os, const RunReport& r);

class MetricsError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

double speedup(const RunReport& base, const RunReport& variant);

// Speedup of `cfg` over a single core when block allocation and cache switches
// cost nothing.
double ideal_speedup(const Program& p, const MachineConfig& cfg);

}  // namespace qcp
