// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "qcp/bench.hpp"
#include "qcp/engine.hpp"
#include "qcp/metrics.hpp"
#include "qcp/qpu.hpp"

using namespace qcp;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

MachineConfig with_width(MachineConfig cfg, std::uint32_t w)
{
    cfg.superscalar_width = w;
    return cfg;
}

RunReport report(const Benchmark& b, const MachineConfig& cfg) { return make_report(simulate(b.program, b.configure(cfg))); }

// 1 ------------------------------------------------------------------------
Outcome superscalar_upper_bound()
{
    Outcome o;
    const auto dense = gen_dense(8, 100);
    const auto scalar = report(dense, with_width({}, 1));
    const auto wide = report(dense, with_width({}, 8));
    const double ratio = scalar.avg_tr / wide.avg_tr;
    o.require(ratio == 8.0, "avg TR ratio == 8.00");
    o.require(wide.max_tr <= 1.0, "width-8 max TR <= 1");
    o.require(std::all_of(scalar.steps.begin(), scalar.steps.end(), [](const StepMetrics& m) { return m.tr == 4.0; }),
              "width-1 TR == 4.0 on every step");
    o.require(scalar.steps.size() == 100, "100 steps");
    o.require(scalar.collisions == 0 && wide.collisions == 0, "no collisions");
    o.note("ratio " + fmt("%.2f", ratio) + ", w8 max TR " + fmt("%.2f", wide.max_tr));
    return o;
}

// 2 ------------------------------------------------------------------------
Outcome width_sweep()
{
    Outcome o;
    std::vector<Benchmark> suite;
    for (std::uint32_t q = 2; q <= 8; ++q) suite.push_back(gen_dense(q, 100));
    suite.push_back(gen_feedforward());
    suite.push_back(gen_parallel_rus(2, 0.1));
    suite.push_back(gen_active_reset_plus_rb(20));
    suite.push_back(gen_steane_syndrome());
    double log_sum = 0;
    for (const auto& b : suite) {
        const auto w1 = report(b, with_width({}, 1));
        const auto w8 = report(b, with_width({}, 8));
        o.require(w8.avg_tr <= w1.avg_tr, b.name + " avg TR(8) <= avg TR(1)");
        o.require(w1.collisions == 0 && w8.collisions == 0, b.name + " collision free");
        log_sum += std::log(w1.avg_tr / w8.avg_tr);
    }
    const double geo = std::exp(log_sum / static_cast<double>(suite.size()));
    o.require(geo >= 2.0, "geometric-mean improvement >= 2x");
    o.note("geomean improvement " + fmt("%.2f", geo) + "x over " + std::to_string(suite.size()) + " programs");
    return o;
}

// 3 ------------------------------------------------------------------------
Outcome multicore_speedup()
{
    Outcome o;
    constexpr std::uint32_t kReps = 1000;
    for (double bias : {0.05, 0.10, 0.20}) {
        const auto b = gen_steane_syndrome({3, bias, 0.5});
        auto base = b.configure({});
        base.record_cycles = false;
        o.require(base.qpu.meas_pulse_ns + base.qpu.daq_ns == 450.0, "450 ns feedback latency");
        double t1 = 0, prev = 1e300;
        std::string curve;
        for (std::uint32_t cores : {1u, 2u, 4u, 6u}) {
            auto cfg = base;
            cfg.cores = cores;
            const auto real = run_experiment(b.program, cfg, kReps);
            cfg.ideal_scheduling = true;
            const auto ideal = run_experiment(b.program, cfg, kReps);
            o.require(real.collisions == 0, "collision free");
            if (cores == 1) t1 = real.mean_exec_ns;
            const double s = t1 / real.mean_exec_ns;
            const double s_ideal = t1 / ideal.mean_exec_ns;
            o.require(real.mean_exec_ns <= prev, "mean time nonincreasing at " + std::to_string(cores) + " cores");
            o.require(s <= s_ideal, "speedup <= ideal at " + std::to_string(cores) + " cores");
            prev = real.mean_exec_ns;
            curve += (curve.empty() ? "" : "/") + fmt("%.2f", s);
            if (cores == 6) o.require(s >= 2.0 && s <= 3.5, "6-core speedup in [2.0, 3.5] at bias " + fmt("%.2f", bias));
        }
        o.note("bias " + fmt("%.2f", bias) + " speedup " + curve);
    }
    return o;
}

// 4 ------------------------------------------------------------------------
Outcome two_block_clp()
{
    Outcome o;
    const auto b = gen_parallel_rus(2, 0.1);
    auto cfg = b.configure({});
    cfg.record_cycles = false;
    auto two = cfg;
    two.cores = 2;
    const auto s1 = run_experiment(b.program, cfg, 1000);
    const auto s2 = run_experiment(b.program, two, 1000);
    std::size_t wins = 0;
    for (std::size_t k = 0; k < s1.exec_ns.size(); ++k) wins += s1.exec_ns[k] / s2.exec_ns[k] > 1.0;
    o.require(wins == s1.exec_ns.size(), "2-core faster on every seed");
    o.note("2-core faster on " + std::to_string(wins) + "/" + std::to_string(s1.exec_ns.size()) + " seeds, mean " +
           fmt("%.2f", s1.mean_exec_ns / s2.mean_exec_ns) + "x");

    // Bias 0: block times from the uniprocessor run.
    const auto clean = gen_parallel_rus(2, 0.0);
    const auto one_run = simulate(clean.program, clean.configure({}));
    auto cfg2 = clean.configure({});
    cfg2.cores = 2;
    const auto two_run = simulate(clean.program, cfg2);
    std::int64_t sum = 0, longest = 0, longest_len = 0;
    for (const auto& r : one_run.trace.blocks) {
        sum += r.end - r.start;
        longest = std::max(longest, r.end - r.start);
    }
    for (const auto& d : clean.program.blocks) longest_len = std::max<std::int64_t>(longest_len, d.pc_end - d.pc_start + 1);
    // Worst case per block: a cold allocation followed by the cache switch.
    const auto& c = cfg.costs;
    const std::int64_t overhead = c.sched_response + (longest_len + c.fetch_bandwidth - 1) / c.fetch_bandwidth + c.t_switch;
    o.require(two_run.finish_cycle <= longest + overhead, "2-core time <= max(block) + scheduling overhead");
    o.require(one_run.finish_cycle >= sum && one_run.finish_cycle <= sum + 2 * overhead, "1-core time ~ sum(blocks)");
    o.note("bias 0: blocks " + std::to_string(sum) + " cycles total, 1-core " + std::to_string(one_run.finish_cycle) +
           ", 2-core " + std::to_string(two_run.finish_cycle));
    return o;
}

// 5 ------------------------------------------------------------------------
std::vector<std::tuple<Gate, int, int>> op_multiset(const Trace& t)
{
    std::vector<std::tuple<Gate, int, int>> out;
    for (const auto& e : t.issues) out.emplace_back(e.gate, e.qubits[0], e.qubit_count > 1 ? e.qubits[1] : -1);
    std::sort(out.begin(), out.end());
    return out;
}

Outcome fast_context_switch()
{
    Outcome o;
    const auto mrce = gen_active_reset_plus_rb(20);
    const auto branch = gen_active_reset_branch_reference(20);
    std::string times;
    for (int outcome : {0, 1}) {
        auto cm = mrce.configure({});
        auto cb = branch.configure({});
        cm.qpu.outcome_bias = cb.qpu.outcome_bias = OutcomeBias{static_cast<double>(outcome), {}};
        const auto rm = simulate(mrce.program, cm);
        const auto rb = simulate(branch.program, cb);

        const auto& meas = rm.trace.issues.front();
        const double ready = meas.time_ns + cm.qpu.meas_pulse_ns + cm.qpu.daq_ns;
        int early = 0;
        for (const auto& e : rm.trace.issues)
            if (!e.conditional && e.qubits[0] == 1 && e.time_ns < ready) ++early;
        o.require(early == 20, "all 20 gates before the result returns (outcome " + std::to_string(outcome) + ")");

        o.require(rm.trace.mrce.size() == 1, "one MRCE resolution");
        for (const auto& e : rm.trace.mrce)
            o.require(e.switch_end - e.switch_start == cm.costs.ctx_switch_cycles && cm.costs.ctx_switch_cycles == 3,
                      "context switch == 3 cycles");
        o.require(op_multiset(rm.trace) == op_multiset(rb.trace), "same operations as FMR+branch");
        o.require(rm.total_exec_ns <= rb.total_exec_ns, "MRCE no slower than branch");
        o.require(rm.trace.collisions.empty() && rb.trace.collisions.empty(), "collision free");
        times += (times.empty() ? "" : ", ") + std::string("outcome ") + std::to_string(outcome) + ": " +
                 fmt("%.0f", rm.total_exec_ns) + " vs " + fmt("%.0f", rb.total_exec_ns) + " ns";
    }
    o.note(times);
    return o;
}

// 6 ------------------------------------------------------------------------
Outcome ces_decomposition()
{
    Outcome o;
    const auto ff = gen_feedforward();
    for (std::uint32_t w : {1u, 8u}) {
        const auto cfg = with_width({}, w);
        const auto r = report(ff, cfg);  // make_report faults on any attribution gap
        o.require(r.steps.size() == 5, "5 steps at width " + std::to_string(w));
        if (r.steps.size() != 5) continue;
        for (std::size_t s = 0; s < 4; ++s)
            o.require(r.steps[s].cycles_classical == 0 && r.steps[s].cycles_stall == 0 && r.steps[s].cycles_feedback == 0,
                      "step " + std::to_string(s + 1) + " quantum only");
        o.require(r.steps[4].cycles_feedback > 0, "step 5 has feedback cycles");
        for (const auto& m : r.steps)
            o.require(m.cycles_quantum + m.cycles_classical + m.cycles_stall + m.cycles_feedback == m.ces, "buckets sum");

        auto slow = cfg;
        slow.qpu.meas_pulse_ns *= 2;
        const auto r2 = report(ff, slow);
        bool same = r2.steps.size() == r.steps.size();
        for (std::size_t s = 0; same && s < r.steps.size(); ++s) same = r.steps[s].cycles_feedback == r2.steps[s].cycles_feedback;
        o.require(same, "doubling meas_pulse_ns leaves feedback cycles unchanged");
        if (w == 1) o.note("step 5 feedback " + std::to_string(r.steps[4].cycles_feedback) + " cycles");
    }
    return o;
}

// 7 ------------------------------------------------------------------------
using ScheduledOp = std::tuple<Gate, int, int, std::uint16_t, double>;

std::vector<ScheduledOp> scheduled_ops(const Trace& t)
{
    std::vector<ScheduledOp> out;
    for (const auto& e : t.issues)
        out.emplace_back(e.gate, e.qubits[0], e.qubit_count > 1 ? e.qubits[1] : -1, e.angle, e.nominal_ns);
    std::sort(out.begin(), out.end());
    return out;
}

Outcome timing_semantics()
{
    Outcome o;
    const auto ex = gen_label_example();
    MachineConfig cfg;
    cfg.qpu.single_gate_ns = 10;  // a one-cycle label needs a gate that fits in one cycle
    for (std::uint32_t w : {1u, 8u}) {
        const auto r = simulate(ex.program, ex.configure(with_width(cfg, w)));
        const auto& is = r.trace.issues;
        const bool ok = is.size() == 3 && is[0].gate == Gate::H && is[1].gate == Gate::H && is[0].time_ns == is[1].time_ns &&
                        is[2].gate == Gate::CNOT && is[2].time_ns - is[0].time_ns == cfg.clock_period_ns;
        o.require(ok, "H,H together and CNOT one clock later at width " + std::to_string(w));
        o.require(r.trace.collisions.empty(), "collision free");
    }

    std::vector<Benchmark> control_free{ex};
    for (std::uint32_t q = 1; q <= 8; ++q) control_free.push_back(gen_dense(q, 100));
    int compared = 0;
    for (const auto& b : control_free) {
        const auto scalar = simulate(b.program, b.configure(with_width(cfg, 1)));
        const auto wide = simulate(b.program, b.configure(with_width(cfg, 8)));
        o.require(scheduled_ops(scalar.trace) == scheduled_ops(wide.trace), b.name + " scalar/8-way schedules match");
        ++compared;
    }
    o.note(std::to_string(compared) + " control-free programs compared");
    return o;
}

// 8 ------------------------------------------------------------------------
std::string fingerprint(const Benchmark& b, const MachineConfig& cfg)
{
    const auto run = simulate(b.program, b.configure(cfg));
    const auto rep = make_report(run);
    std::ostringstream os;
    write_issue_csv(os, run.trace.issues);
    write_steps_csv(os, rep);
    os << to_json(rep).dump();
    return os.str();
}

Outcome determinism_and_capacity()
{
    Outcome o;
    MachineConfig cfg;
    cfg.cores = 6;
    cfg.seed = 2024;
    const auto st = gen_steane_syndrome({3, 0.1, 0.5});
    o.require(fingerprint(st, cfg) == fingerprint(st, cfg), "Steane run is byte-identical");
    cfg.cores = 2;
    cfg.superscalar_width = 4;
    const auto rus = gen_parallel_rus(2, 0.5);
    o.require(fingerprint(rus, cfg) == fingerprint(rus, cfg), "RUS run is byte-identical");

    ProgramBuilder pb;
    for (int k = 0; k < 65; ++k) {
        pb.begin_block("b" + std::to_string(k));
        pb.emit(Instruction::end());
        pb.end_block_prio(static_cast<std::uint32_t>(k % 4));
    }
    const auto big = pb.finish("too_many_blocks", 1);
    bool rejected = false;
    try {
        simulate(big.program, big.configure({}));
    } catch (const ValidationError& e) {
        for (const auto& d : e.diagnostics()) rejected = rejected || d.message.find("capacity") != std::string::npos;
    }
    o.require(rejected, "65-block program rejected with the capacity diagnostic");
    o.note("repeated runs identical, 65 blocks rejected");
    return o;
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 superscalar upper bound", superscalar_upper_bound},
        {"2 width sweep", width_sweep},
        {"3 multicore speedup", multicore_speedup},
        {"4 two-block circuit-level parallelism", two_block_clp},
        {"5 fast context switch", fast_context_switch},
        {"6 CES decomposition", ces_decomposition},
        {"7 timing semantics", timing_semantics},
        {"8 determinism and capacity", determinism_and_capacity},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs >= 60.0) o.require(false, "finished within 60 s");
        std::printf("%s criterion %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
