#pragma once

// Benchmark program generators and the repeated-run experiment runner.

#include <cstdint>
#include <string>
#include <vector>

#include "qcp/config.hpp"
#include "qcp/isa.hpp"
#include "qcp/metrics.hpp"

namespace qcp {

// A generated program plus the outcome probabilities of its measurements.
struct Benchmark {
    std::string name;
    Program program;
    OutcomeBias bias;

    // `base` with this benchmark's qubit count and outcome bias filled in.
    MachineConfig configure(MachineConfig base) const;
};

// Small helper for writing programs in code: tracks the pc, branch fixups,
// block boundaries and per-MEAS outcome bias.
class ProgramBuilder {
public:
    std::uint32_t pc() const { return static_cast<std::uint32_t>(p_.instructions.size()); }

    void gate(std::uint32_t label, Gate g, std::initializer_list<int> qubits);
    void rotation(std::uint32_t label, Gate g, int qubit, double radians);
    void measure(std::uint32_t label, int qubit, int result_reg, double bias_of_one);
    void emit(const Instruction& i);

    // Branch with a target patched later by bind().
    std::size_t branch(Cond c);
    std::size_t jump();
    void bind(std::size_t at, std::uint32_t target);

    void begin_block(std::string name);
    void end_block_deps(std::vector<std::string> deps);
    void end_block_prio(std::uint32_t priority);

    Benchmark finish(std::string name, std::uint32_t qubits, double default_bias = 0.5);

private:
    Program p_;
    OutcomeBias bias_;
    std::string block_name_;
    std::uint32_t block_start_ = 0;
};

Benchmark gen_label_example();
Benchmark gen_dense(std::uint32_t qubits, std::uint32_t steps);
Benchmark gen_feedforward();
Benchmark gen_parallel_rus(std::uint32_t n_subcircuits, double failure_bias);
Benchmark gen_active_reset_plus_rb(std::uint32_t len);
// Same operations as gen_active_reset_plus_rb, with the reset written as FMR + branch.
Benchmark gen_active_reset_branch_reference(std::uint32_t len);

struct SteaneOptions {
    std::uint32_t rounds = 3;
    double verification_failure = 0.1;  // probability a cat-state check fails
    double syndrome_bias = 0.5;
};
Benchmark gen_steane_syndrome(const SteaneOptions& opts = {});

struct BenchParams {
    std::uint32_t qubits = 8;
    std::uint32_t steps = 100;
    std::uint32_t subcircuits = 2;
    std::uint32_t length = 20;
    double bias = 0.1;
};

std::vector<std::string> benchmark_names();
// Throws std::invalid_argument for unknown names.
Benchmark make_benchmark(const std::string& name, const BenchParams& params);

struct ExperimentStats {
    std::uint32_t repetitions = 0;
    double mean_exec_ns = 0;
    double p50_exec_ns = 0;
    double p90_exec_ns = 0;
    double p99_exec_ns = 0;
    double min_exec_ns = 0;
    double max_exec_ns = 0;
    double mean_avg_tr = 0;
    std::size_t collisions = 0;
    std::size_t violations = 0;
    std::vector<double> exec_ns;  // per repetition, in seed order
};

inline constexpr std::uint64_t kSeedStride = 0x9E3779B97F4A7C15ull;

std::uint64_t repetition_seed(std::uint64_t base, std::uint32_t rep);

// Runs `repetitions` seeds (base seed advanced by kSeedStride) and aggregates.
// `threads` > 1 runs repetitions concurrently; results do not depend on it.
ExperimentStats run_experiment(const Program& p, const MachineConfig& cfg, std::uint32_t repetitions,
                               unsigned threads = 1);

nlohmann::json to_json(const ExperimentStats& s);

}  // namespace qcp
