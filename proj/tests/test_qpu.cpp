#include <doctest.h>

#include "qcp/qpu.hpp"

#include <sstream>

using namespace qcp;

namespace {

IssueEvent op(double t, Gate g, std::initializer_list<int> qs)
{
    IssueEvent e;
    e.time_ns = t;
    e.gate = g;
    for (int q : qs) e.qubits[e.qubit_count++] = static_cast<std::uint8_t>(q);
    return e;
}

}  // namespace

TEST_SUITE("qpu")
{
    TEST_CASE("SplitMix64 reference values")
    {
        // First outputs for seed 0 from the published reference implementation.
        SplitMix64 r(0);
        CHECK(r.next() == 0xE220A8397B1DCDAFull);
        CHECK(r.next() == 0x6E789E6AA1B965F4ull);
        CHECK(r.next() == 0x06C45D188009454Full);
    }

    TEST_CASE("back-to-back operations on a qubit are legal")
    {
        QpuState q({}, 2, 1);
        auto a = op(0, Gate::H, {0});
        auto b = op(20, Gate::X, {0});
        CHECK(q.accept_issue(a));
        CHECK(q.accept_issue(b));
        CHECK(q.collisions().empty());
        CHECK(a.duration_ns == 20);
        CHECK(q.busy_until(0) == 40);
    }

    TEST_CASE("overlap on a busy qubit is a collision, the run continues")
    {
        QpuState q({}, 2, 1);
        auto a = op(0, Gate::H, {0});
        auto b = op(10, Gate::CZ, {0, 1});
        CHECK(q.accept_issue(a));
        CHECK_FALSE(q.accept_issue(b));
        REQUIRE(q.collisions().size() == 1);
        CHECK(q.collisions()[0].qubit == 0);
        CHECK(q.events().size() == 2);
    }

    TEST_CASE("simultaneous gates on different qubits are legal")
    {
        QpuState q({}, 2, 1);
        auto a = op(100, Gate::H, {0});
        auto b = op(100, Gate::H, {1});
        CHECK(q.accept_issue(a));
        CHECK(q.accept_issue(b));
        CHECK(q.collisions().empty());
    }

    TEST_CASE("channels and durations")
    {
        QpuConfig cfg;
        QpuState q(cfg, 4, 1);
        auto a = op(0, Gate::RX, {2});
        auto b = op(0, Gate::CNOT, {0, 1});
        auto m = op(0, Gate::MEAS, {3});
        q.accept_issue(a);
        q.accept_issue(b);
        q.accept_issue(m);
        CHECK(a.channels[0] == microwave_channel(2));
        CHECK(b.channels[0] == flux_channel(0));
        CHECK(b.channels[1] == flux_channel(1));
        CHECK(m.channels[0] == readout_channel(3));
        CHECK(b.duration_ns == 40);
        CHECK(m.duration_ns == 300);
        CHECK(gate_duration_ns(cfg, Gate::NOP) == 0);
    }

    TEST_CASE("default feedback latency: issue at 1000 ns, ready at 1450 ns")
    {
        QpuState q({}, 1, 1);
        CHECK(q.measurement_result(0, 1000, 0).ready_ns == doctest::Approx(1450));
    }

    TEST_CASE("degenerate biases")
    {
        QpuConfig cfg;
        cfg.outcome_bias.default_bias = 0;
        cfg.outcome_bias.by_pc[7] = 1;
        QpuState q(cfg, 1, 99);
        for (int k = 0; k < 1000; ++k) {
            CHECK(q.measurement_result(0, k * 500.0, 3).bit == 0);
            CHECK(q.measurement_result(0, k * 500.0, 7).bit == 1);
        }
    }

    TEST_CASE("bias 0.1 over 10^5 draws has mean 0.1 +- 0.005")
    {
        QpuConfig cfg;
        cfg.outcome_bias.default_bias = 0.1;
        QpuState q(cfg, 1, 2024);
        int ones = 0;
        for (int k = 0; k < 100000; ++k) ones += q.measurement_result(0, 0, 0).bit;
        CHECK(ones / 1e5 == doctest::Approx(0.1).epsilon(0.05));
        CHECK(std::abs(ones / 1e5 - 0.1) <= 0.005);
    }

    TEST_CASE("jitter stays within its bound and never makes results early")
    {
        QpuConfig cfg;
        cfg.jitter_ns = 40;
        QpuState a(cfg, 2, 5), b(cfg, 2, 5);
        for (int k = 0; k < 2000; ++k) {
            const double t = k * 10.0;
            const auto ra = a.measurement_result(k % 2, t, 0);
            const auto rb = b.measurement_result(k % 2, t, 0);
            CHECK(ra.ready_ns >= t + cfg.meas_pulse_ns);
            CHECK(ra.ready_ns <= t + cfg.meas_pulse_ns + cfg.daq_ns + cfg.jitter_ns);
            // Same seed, same sequence.
            CHECK(ra.ready_ns == rb.ready_ns);
            CHECK(ra.bit == rb.bit);
        }
    }

    TEST_CASE("per-qubit streams do not depend on interleaving")
    {
        QpuState a({}, 2, 77), b({}, 2, 77);
        std::vector<int> a0, b0;
        for (int k = 0; k < 100; ++k) {
            a0.push_back(a.measurement_result(0, 0, 0).bit);
            a.measurement_result(1, 0, 0);
        }
        for (int k = 0; k < 100; ++k) b0.push_back(b.measurement_result(0, 0, 0).bit);
        CHECK(a0 == b0);
    }

    TEST_CASE("unknown qubits are rejected")
    {
        QpuState q({}, 2, 1);
        auto e = op(0, Gate::X, {5});
        CHECK_THROWS(q.accept_issue(e));
        CHECK_THROWS(q.measurement_result(9, 0, 0));
    }

    TEST_CASE("issue log CSV")
    {
        QpuState q({}, 2, 1);
        auto a = op(0, Gate::H, {0});
        auto b = op(20, Gate::CNOT, {0, 1});
        q.accept_issue(a);
        q.accept_issue(b);
        std::ostringstream os;
        write_issue_csv(os, q.events());
        const auto s = os.str();
        CHECK(s.rfind("time_ns,gate,qubits,channel,duration_ns\n", 0) == 0);
        CHECK(s.find("CNOT,0;1,") != std::string::npos);
    }
}
