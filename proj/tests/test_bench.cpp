#include <doctest.h>

#include "qcp/bench.hpp"

#include <algorithm>
#include <map>
#include <set>

using namespace qcp;

namespace {

int count_branches(const Program& p, std::uint32_t from, std::uint32_t to)
{
    int n = 0;
    for (auto pc = from; pc <= to; ++pc) n += p.instructions[pc].is_branch();
    return n;
}

std::set<int> qubits_of(const Program& p, const BlockDirective& d)
{
    std::set<int> out;
    for (auto pc = d.pc_start; pc <= d.pc_end; ++pc) {
        const auto& i = p.instructions[pc];
        if (i.kind == InstrKind::Quantum || i.kind == InstrKind::Mrce)
            for (auto q : i.targets()) out.insert(q);
    }
    return out;
}

}  // namespace

TEST_SUITE("bench")
{
    TEST_CASE("every generated program validates under its own configuration")
    {
        BenchParams params;
        for (const auto& name : benchmark_names()) {
            const auto b = make_benchmark(name, params);
            CHECK_MESSAGE(validate_program(b.program, b.configure({})).empty(), name);
        }
        CHECK_THROWS_AS(make_benchmark("nope", params), std::invalid_argument);
        CHECK_THROWS_AS(gen_dense(0, 1), std::invalid_argument);
        CHECK_THROWS_AS(gen_parallel_rus(0, 0.1), std::invalid_argument);
        CHECK_THROWS_AS(gen_parallel_rus(22, 0.1), std::invalid_argument);
    }

    TEST_CASE("parallel RUS: disjoint qubits and two conditional branches per block")
    {
        const auto b = gen_parallel_rus(2, 0.1);
        REQUIRE(b.program.blocks.size() == 2);
        const auto q0 = qubits_of(b.program, b.program.blocks[0]);
        const auto q1 = qubits_of(b.program, b.program.blocks[1]);
        CHECK(q0 == std::set<int>{0, 1, 2});
        CHECK(q1 == std::set<int>{3, 4, 5});
        int branches = 0;
        for (const auto& d : b.program.blocks) branches += count_branches(b.program, d.pc_start, d.pc_end);
        CHECK(branches == 4);
    }

    TEST_CASE("parallel RUS with bias 0 runs each body once")
    {
        const auto b = gen_parallel_rus(1, 0.0);
        const auto r = simulate(b.program, b.configure({}));
        const auto meas = std::count_if(r.trace.issues.begin(), r.trace.issues.end(),
                                        [](const IssueEvent& e) { return e.gate == Gate::MEAS; });
        CHECK(meas == 1);
        CHECK(r.trace.issues.size() == 6);
    }

    TEST_CASE("on one core the second RUS block waits for all of the first")
    {
        const auto b = gen_parallel_rus(2, 0.0);
        const auto r = simulate(b.program, b.configure({}));
        double last_w1 = 0, first_w2 = 1e18;
        for (const auto& e : r.trace.issues) {
            if (e.block == 0) last_w1 = std::max(last_w1, e.time_ns);
            if (e.block == 1) first_w2 = std::min(first_w2, e.time_ns);
        }
        CHECK(first_w2 > last_w1);
        // The first block only finishes once its measurement result is back.
        CHECK(first_w2 > last_w1 + 450);
    }

    TEST_CASE("Steane syndrome layout")
    {
        const auto b = gen_steane_syndrome();
        CHECK(b.program.qubit_count == 37);
        CHECK(b.program.uses_priorities());
        const auto t = build_table(b.program);
        CHECK(t.size() == 50);
        CHECK(t.distinct_priorities() == 15);
        // Six stabilizer blocks share each preparation and extraction level.
        std::map<std::uint32_t, int> per_level;
        for (std::size_t k = 0; k < t.size(); ++k) ++per_level[t.priority(k)];
        for (std::uint32_t r = 0; r < 3; ++r) {
            CHECK(per_level[1 + 4 * r] == 6);
            CHECK(per_level[4 + 4 * r] == 6);
        }
        // Majority vote and correction use classical instructions.
        CHECK(b.program.classical_count() > b.program.quantum_count());
    }

    TEST_CASE("Steane with no failures is deterministic and a lower bound")
    {
        const auto clean = gen_steane_syndrome({3, 0.0, 0.0});
        auto cfg = clean.configure({});
        cfg.record_cycles = false;
        const auto stats = run_experiment(clean.program, cfg, 10);
        CHECK(stats.min_exec_ns == stats.max_exec_ns);
        const auto verification_meas = [&] {
            const auto r = simulate(clean.program, cfg);
            return std::count_if(r.trace.issues.begin(), r.trace.issues.end(),
                                 [](const IssueEvent& e) { return e.gate == Gate::MEAS && e.qubits[0] >= 31; });
        }();
        CHECK(verification_meas == 18);

        const auto noisy = gen_steane_syndrome({3, 0.1, 0.0});
        auto ncfg = noisy.configure({});
        ncfg.record_cycles = false;
        const auto nstats = run_experiment(noisy.program, ncfg, 20);
        CHECK(nstats.min_exec_ns >= stats.min_exec_ns);
    }

    TEST_CASE("shipped benchmarks finish and stay collision free at bias 0.5")
    {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto rus = gen_parallel_rus(4, 0.5);
            auto cfg = rus.configure({});
            cfg.seed = seed;
            cfg.cores = 2;
            CHECK(simulate(rus.program, cfg).trace.collisions.empty());

            const auto st = gen_steane_syndrome({3, 0.5, 0.5});
            auto scfg = st.configure({});
            scfg.seed = seed;
            scfg.cores = 6;
            CHECK(simulate(st.program, scfg).trace.collisions.empty());
        }
    }

    TEST_CASE("experiments are reproducible and independent of thread count")
    {
        const auto b = gen_parallel_rus(2, 0.3);
        auto cfg = b.configure({});
        cfg.record_cycles = false;
        const auto one = run_experiment(b.program, cfg, 40, 1);
        const auto four = run_experiment(b.program, cfg, 40, 4);
        CHECK(one.exec_ns == four.exec_ns);
        CHECK(one.mean_exec_ns == four.mean_exec_ns);
        CHECK(one.p50_exec_ns <= one.p90_exec_ns);
        CHECK(one.p90_exec_ns <= one.p99_exec_ns);
        CHECK(one.min_exec_ns <= one.p50_exec_ns);
        CHECK(one.p99_exec_ns <= one.max_exec_ns);
        CHECK_THROWS_AS(run_experiment(b.program, cfg, 0), std::invalid_argument);
    }

    TEST_CASE("repetition seeds advance by a fixed stride")
    {
        CHECK(repetition_seed(1, 0) == 1);
        CHECK(repetition_seed(1, 1) == 1 + kSeedStride);
        std::set<std::uint64_t> seen;
        for (std::uint32_t k = 0; k < 1000; ++k) seen.insert(repetition_seed(7, k));
        CHECK(seen.size() == 1000);
    }

    TEST_CASE("active reset plus RB: gates run while the result is in flight")
    {
        const auto b = gen_active_reset_plus_rb(20);
        auto cfg = b.configure({});
        const auto r = simulate(b.program, cfg);
        const auto& meas = r.trace.issues.front();
        REQUIRE(meas.gate == Gate::MEAS);
        const double ready = meas.time_ns + cfg.qpu.meas_pulse_ns + cfg.qpu.daq_ns;
        int before = 0;
        for (const auto& e : r.trace.issues)
            if (!e.conditional && e.qubits[0] == 1 && e.time_ns < ready) ++before;
        CHECK(before == 20);
    }
}
