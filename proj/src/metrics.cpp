#include "qcp/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace qcp {

std::vector<Step> steps_of(const Trace& trace)
{
    // Conditional (MRCE-injected) operations are off the timeline and belong to no step.
    std::map<std::pair<std::uint32_t, double>, Step> by_key;
    for (std::size_t k = 0; k < trace.issues.size(); ++k) {
        const auto& e = trace.issues[k];
        if (e.conditional) continue;
        auto [it, fresh] = by_key.try_emplace({e.core, e.nominal_ns});
        auto& s = it->second;
        if (fresh) {
            s.core = e.core;
            s.nominal_ns = e.nominal_ns;
            s.first_dispatch = s.last_dispatch = e.dispatch_cycle;
        }
        s.first_dispatch = std::min(s.first_dispatch, e.dispatch_cycle);
        s.last_dispatch = std::max(s.last_dispatch, e.dispatch_cycle);
        s.events.push_back(k);
    }
    std::vector<Step> out;
    out.reserve(by_key.size());
    for (auto& [key, s] : by_key) out.push_back(std::move(s));
    std::stable_sort(out.begin(), out.end(), [](const Step& a, const Step& b) {
        return a.core != b.core ? a.core < b.core : a.last_dispatch < b.last_dispatch;
    });
    return out;
}

StepMetrics ces_of_step(const Trace& trace, const std::vector<Step>& steps, std::size_t i)
{
    const auto& s = steps.at(i);
    if (s.core >= trace.cycles.size())
        throw MetricsError("per-cycle attribution was not recorded for core " + std::to_string(s.core));
    const auto& cycles = trace.cycles[s.core];
    const std::int64_t from = (i > 0 && steps[i - 1].core == s.core) ? steps[i - 1].last_dispatch + 1 : 0;
    if (s.last_dispatch >= static_cast<std::int64_t>(cycles.size()))
        throw MetricsError("step extends past the recorded cycles");

    StepMetrics m;
    m.step_index = i;
    m.core = s.core;
    m.nominal_ns = s.nominal_ns;
    m.qices = static_cast<std::uint32_t>(s.events.size());
    std::uint32_t counted = 0;
    for (auto c = from; c <= s.last_dispatch; ++c) {
        const auto kind = cycles[c];
        switch (kind) {
        case CycleKind::Quantum:
            ++m.cycles_quantum;
            break;
        case CycleKind::Classical:
            ++m.cycles_classical;
            break;
        case CycleKind::Stall:
            ++m.cycles_stall;
            break;
        case CycleKind::Feedback:
            ++m.cycles_feedback;
            break;
        default:
            break;
        }
        if (counts_toward_ces(kind)) ++counted;
    }
    m.ces = m.cycles_quantum + m.cycles_classical + m.cycles_stall + m.cycles_feedback;
    if (m.ces != counted) throw SimulationFault("cycle attribution gap in step " + std::to_string(i));
    return m;
}

double tr_of_step(const StepMetrics& m, double clock_ns, double gate_ns)
{
    if (gate_ns <= 0) throw MetricsError("gate time must be positive");
    return clock_ns * m.ces / gate_ns;
}

RunReport make_report(const RunResult& run)
{
    RunReport r;
    const auto& cfg = run.config;
    // Without per-cycle attribution there is no CES; the report keeps the timing totals only.
    const auto steps = run.trace.cycles.empty() ? std::vector<Step>{} : steps_of(run.trace);
    std::map<std::uint32_t, std::pair<double, std::size_t>> per_core;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        auto m = ces_of_step(run.trace, steps, i);
        m.tr = tr_of_step(m, cfg.clock_period_ns, cfg.gate_time_ns);
        r.avg_tr += m.tr;
        r.max_tr = std::max(r.max_tr, m.tr);
        auto& pc = per_core[m.core];
        pc.first += m.tr;
        ++pc.second;
        r.steps.push_back(m);
    }
    if (!r.steps.empty()) r.avg_tr /= static_cast<double>(r.steps.size());
    for (const auto& [core, acc] : per_core) r.max_core_avg_tr = std::max(r.max_core_avg_tr, acc.first / acc.second);

    r.total_exec_ns = run.total_exec_ns;
    r.total_cycles = run.trace.total_cycles;
    r.violations = run.trace.violations;
    r.collisions = run.trace.collisions.size();
    r.issued_ops = run.trace.issues.size();
    r.blocks = run.trace.blocks.size();
    r.program_hash = run.program_hash;
    r.qubit_count = run.qubit_count;
    r.config = to_json(cfg);
    r.mrce = run.trace.mrce;
    for (const auto& b : run.trace.blocks) r.drained_contexts = r.drained_contexts || b.drained_contexts;
    return r;
}

nlohmann::json to_json(const RunReport& r)
{
    using nlohmann::json;
    json steps = json::array();
    for (const auto& m : r.steps)
        steps.push_back({{"step", m.step_index},
                         {"core", m.core},
                         {"nominal_ns", m.nominal_ns},
                         {"qices", m.qices},
                         {"cycles_quantum", m.cycles_quantum},
                         {"cycles_classical", m.cycles_classical},
                         {"cycles_stall", m.cycles_stall},
                         {"cycles_feedback", m.cycles_feedback},
                         {"ces", m.ces},
                         {"tr", m.tr}});
    json violations = json::array();
    for (const auto& v : r.violations)
        violations.push_back({{"core", v.core}, {"block", v.block}, {"scheduled_ns", v.scheduled_ns},
                              {"actual_ns", v.actual_ns}});
    json mrce = json::array();
    for (const auto& e : r.mrce)
        mrce.push_back({{"core", e.core},
                        {"pc", e.pc},
                        {"qubit", e.qubit},
                        {"created", e.created},
                        {"switch_start", e.switch_start},
                        {"switch_end", e.switch_end},
                        {"outcome", e.outcome},
                        {"applied", gate_name(e.applied)}});
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.program_hash));
    return {{"program_hash", hash},
            {"qubits", r.qubit_count},
            {"blocks", r.blocks},
            {"issued_ops", r.issued_ops},
            {"total_exec_ns", r.total_exec_ns},
            {"total_cycles", r.total_cycles},
            {"avg_tr", r.avg_tr},
            {"max_tr", r.max_tr},
            {"max_core_avg_tr", r.max_core_avg_tr},
            {"collisions", r.collisions},
            {"drained_contexts", r.drained_contexts},
            {"violations", violations},
            {"mrce", mrce},
            {"steps", steps},
            {"config", r.config}};
}

void write_steps_csv(std::ostream& os, const RunReport& r)
{
    os << "step,core,nominal_ns,qices,quantum,classical,stall,feedback,ces,tr\n";
    char buf[64];
    for (const auto& m : r.steps) {
        std::snprintf(buf, sizeof buf, "%.3f", m.nominal_ns);
        os << m.step_index << ',' << m.core << ',' << buf << ',' << m.qices << ',' << m.cycles_quantum << ','
           << m.cycles_classical << ',' << m.cycles_stall << ',' << m.cycles_feedback << ',' << m.ces << ',';
        std::snprintf(buf, sizeof buf, "%.6g", m.tr);
        os << buf << '\n';
    }
}

double speedup(const RunReport& base, const RunReport& variant)
{
    if (base.program_hash != variant.program_hash)
        throw MetricsError("speedup compares runs of different programs");
    if (variant.total_exec_ns <= 0) throw MetricsError("variant run has zero execution time");
    return base.total_exec_ns / variant.total_exec_ns;
}

double ideal_speedup(const Program& p, const MachineConfig& cfg)
{
    auto base_cfg = cfg;
    base_cfg.cores = 1;
    base_cfg.ideal_scheduling = false;
    base_cfg.record_cycles = false;
    auto ideal_cfg = cfg;
    ideal_cfg.ideal_scheduling = true;
    ideal_cfg.record_cycles = false;
    const auto base = simulate(p, base_cfg);
    const auto ideal = simulate(p, ideal_cfg);
    return base.total_exec_ns / ideal.total_exec_ns;
}

}  // namespace qcp
