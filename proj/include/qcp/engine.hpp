#pragma once

#include <cstdint>

#include "qcp/config.hpp"
#include "qcp/isa.hpp"
#include "qcp/program.hpp"
#include "qcp/trace.hpp"

namespace qcp {

struct RunResult {
    Trace trace;
    BlockInfoTable table;
    MachineConfig config;
    std::uint32_t qubit_count = 0;
    std::uint64_t program_hash = 0;
    std::int64_t finish_cycle = 0;
    double total_exec_ns = 0;
    // Per-block order of completion, as reported to the scheduler.
    std::vector<std::uint32_t> completion_order;
};

// FNV-1a over the binary image; identifies "the same program" across runs.
std::uint64_t program_hash(const Program& p);

// Table in the representation the config asks for.
BlockInfoTable select_table(const Program& p, const MachineConfig& cfg);

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<Diagnostic> diags);
    const std::vector<Diagnostic>& diagnostics() const { return diags_; }

private:
    std::vector<Diagnostic> diags_;
};

// Validates, builds the table and simulates until every block is done.
// Throws ValidationError, ConfigError or SimulationFault.
RunResult simulate(const Program& p, const MachineConfig& cfg);

}  // namespace qcp
