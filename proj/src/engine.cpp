#include "qcp/engine.hpp"

#include <memory>
#include <string>

#include "qcp/core.hpp"
#include "qcp/qpu.hpp"
#include "qcp/sched.hpp"

namespace qcp {

std::string_view cycle_kind_name(CycleKind k)
{
    switch (k) {
    case CycleKind::Inactive:
        return "inactive";
    case CycleKind::Quantum:
        return "quantum";
    case CycleKind::Classical:
        return "classical";
    case CycleKind::Stall:
        return "stall";
    case CycleKind::Feedback:
        return "feedback";
    case CycleKind::MeasWait:
        return "meas_wait";
    case CycleKind::Slack:
        return "slack";
    }
    return "?";
}

std::string_view sched_action_name(SchedAction a)
{
    switch (a) {
    case SchedAction::Allocate:
        return "allocate";
    case SchedAction::Prefetch:
        return "prefetch";
    case SchedAction::Switch:
        return "switch";
    case SchedAction::Activate:
        return "activate";
    case SchedAction::Done:
        return "done";
    }
    return "?";
}

std::uint64_t program_hash(const Program& p)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto byte : write_binary(p)) {
        h ^= byte;
        h *= 0x100000001b3ull;
    }
    return h;
}

BlockInfoTable select_table(const Program& p, const MachineConfig& cfg)
{
    auto t = build_table(p);
    switch (cfg.dependency) {
    case DependencyChoice::Auto:
        return t;
    case DependencyChoice::Direct:
        return to_direct_table(t);
    case DependencyChoice::Priority:
        return to_priority_table(t);
    }
    return t;
}

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& d)
{
    std::string s = "program failed validation";
    for (const auto& x : d) s += "\n  " + x.location + ": " + x.message;
    return s;
}

}  // namespace

ValidationError::ValidationError(std::vector<Diagnostic> diags)
    : std::runtime_error(join_diagnostics(diags)), diags_(std::move(diags))
{
}

RunResult simulate(const Program& p, const MachineConfig& cfg)
{
    check_config(cfg);
    if (auto diags = validate_program(p, cfg); !diags.empty()) throw ValidationError(std::move(diags));

    RunResult out;
    out.config = cfg;
    out.table = select_table(p, cfg);
    out.program_hash = program_hash(p);
    out.qubit_count = cfg.qpu.qubit_count ? cfg.qpu.qubit_count : p.qubit_count;

    QpuState qpu(cfg.qpu, out.qubit_count, cfg.seed);
    auto shared = std::make_unique<SharedState>(SharedState{p, cfg, qpu, out.trace, {}, {}});
    std::vector<Core> cores;
    cores.reserve(cfg.cores);
    for (std::uint32_t c = 0; c < cfg.cores; ++c) cores.emplace_back(c, *shared);

    Scheduler sched(out.table, cfg.cores, cfg.costs,
                    {cfg.prefetch, cfg.initial_prefetch && cfg.prefetch, cfg.ideal_scheduling});
    if (cfg.record_cycles) out.trace.cycles.assign(cfg.cores, {});

    std::int64_t now = 0;
    std::int64_t last_progress = 0;
    while (!sched.finished()) {
        for (const auto& a : sched.tick(now)) {
            cores[a.core].start_block(a.block, out.table.entry(a.block), now);
            last_progress = now;
        }
        for (auto& core : cores) {
            const auto r = core.step(now);
            if (cfg.record_cycles) out.trace.cycles[core.id()].push_back(r.kind);
            if (r.progress) last_progress = now;
            if (r.block_done) {
                const auto b = out.trace.blocks.back().block;
                sched.notify_done(b, core.id(), now);
                out.completion_order.push_back(b);
            }
        }
        if (sched.finished()) break;
        if (now - last_progress > static_cast<std::int64_t>(cfg.deadlock_timeout))
            throw SimulationFault("deadlock: no progress for " + std::to_string(cfg.deadlock_timeout) +
                                  " cycles (cycle " + std::to_string(now) + ")");
        ++now;
    }

    out.finish_cycle = now;
    out.total_exec_ns = static_cast<double>(now) * cfg.clock_period_ns;
    out.trace.total_cycles = now + 1;
    out.trace.issues = qpu.take_events();
    out.trace.collisions = qpu.take_collisions();
    out.trace.sched = sched.take_events();
    return out;
}

}  // namespace qcp
