#pragma once

// Ground-truth records produced by a run. Everything the metrics need is in
// here; nothing in this header depends on engine internals.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcp/isa.hpp"

namespace qcp {

struct IssueEvent {
    double time_ns = 0;
    Gate gate = Gate::NOP;
    std::array<std::uint8_t, 2> qubits{};
    std::uint8_t qubit_count = 0;
    std::array<std::int32_t, 2> channels{-1, -1};
    std::uint16_t angle = 0;
    double duration_ns = 0;
    std::uint32_t core = 0;
    std::uint32_t block = 0;
    std::uint32_t pc = 0;
    // Time the operation would have had on an unslipped timeline.
    double nominal_ns = 0;
    std::int64_t dispatch_cycle = -1;
    // Injected by an MRCE resolution rather than dispatched from the timeline.
    bool conditional = false;

    std::span<const std::uint8_t> targets() const { return {qubits.data(), qubit_count}; }
};

// What a core spent one clock cycle on. The first four feed CES; the rest
// are excluded (idle core, stage I/II measurement wait, timing slack).
enum class CycleKind : std::uint8_t { Inactive, Quantum, Classical, Stall, Feedback, MeasWait, Slack };

std::string_view cycle_kind_name(CycleKind k);

inline bool counts_toward_ces(CycleKind k)
{
    return k == CycleKind::Quantum || k == CycleKind::Classical || k == CycleKind::Stall || k == CycleKind::Feedback;
}

struct TimingViolation {
    std::uint32_t core = 0;
    std::uint32_t block = 0;
    double scheduled_ns = 0;
    double actual_ns = 0;
};

enum class SchedAction : std::uint8_t { Allocate, Prefetch, Switch, Activate, Done };

std::string_view sched_action_name(SchedAction a);

struct SchedEvent {
    std::int64_t cycle = 0;
    SchedAction action = SchedAction::Allocate;
    std::uint32_t block = 0;
    std::uint32_t core = 0;
    // Allocation/switch: the cycle the block starts running; prefetch: load completion.
    std::int64_t finish = 0;
};

struct MrceEvent {
    std::uint32_t core = 0;
    std::uint32_t block = 0;
    std::uint32_t pc = 0;
    std::uint8_t qubit = 0;
    std::int64_t created = 0;
    // Context switch occupies [switch_start, switch_end); equal when resolved without a switch.
    std::int64_t switch_start = 0;
    std::int64_t switch_end = 0;
    int outcome = 0;
    Gate applied = Gate::NOP;
};

struct BlockRecord {
    std::uint32_t block = 0;
    std::uint32_t core = 0;
    std::int64_t start = 0;
    std::int64_t end = 0;
    // Contexts still open when the stream ended; block-done waited for them.
    bool drained_contexts = false;
};

struct Collision {
    std::uint8_t qubit = 0;
    double time_ns = 0;
    double busy_until_ns = 0;
    std::uint32_t pc = 0;
};

struct Trace {
    std::vector<IssueEvent> issues;
    std::vector<SchedEvent> sched;
    std::vector<MrceEvent> mrce;
    std::vector<BlockRecord> blocks;
    std::vector<TimingViolation> violations;
    std::vector<Collision> collisions;
    // cycles[core][cycle]
    std::vector<std::vector<CycleKind>> cycles;
    std::int64_t total_cycles = 0;
};

// Deadlock, attribution gaps, double completion: the simulator refuses to
// produce a report rather than produce a wrong one.
class SimulationFault : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qcp
