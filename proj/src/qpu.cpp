#include "qcp/qpu.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

namespace qcp {

int microwave_channel(int qubit) { return 3 * qubit; }
int flux_channel(int qubit) { return 3 * qubit + 1; }
int readout_channel(int qubit) { return 3 * qubit + 2; }

double gate_duration_ns(const QpuConfig& cfg, Gate g)
{
    if (g == Gate::NOP) return 0.0;
    if (g == Gate::MEAS) return cfg.meas_pulse_ns;
    if (is_two_qubit(g)) return cfg.two_gate_ns;
    return cfg.single_gate_ns;
}

namespace {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream)
{
    // Partition one seed into independent streams by hashing (seed, stream).
    SplitMix64 mix(seed ^ (0xD1B54A32D192ED03ull * (stream + 1)));
    return mix.next();
}

constexpr std::uint64_t kJitterStream = 1000;

}  // namespace

QpuState::QpuState(const QpuConfig& cfg, std::uint32_t qubit_count, std::uint64_t seed)
    : cfg_(cfg), busy_until_(qubit_count, 0.0), jitter_stream_(stream_seed(seed, kJitterStream))
{
    outcome_streams_.reserve(qubit_count);
    for (std::uint32_t q = 0; q < qubit_count; ++q) outcome_streams_.emplace_back(stream_seed(seed, q));
}

void QpuState::check_qubit(int q) const
{
    if (q < 0 || q >= static_cast<int>(busy_until_.size()))
        throw SimulationFault("operation on unmapped qubit q" + std::to_string(q));
}

bool QpuState::accept_issue(IssueEvent& e)
{
    if (e.time_ns < 0) throw SimulationFault("issue before time zero");
    e.duration_ns = gate_duration_ns(cfg_, e.gate);
    bool ok = true;
    for (int k = 0; k < e.qubit_count; ++k) {
        const int q = e.qubits[k];
        check_qubit(q);
        if (e.gate == Gate::MEAS)
            e.channels[k] = readout_channel(q);
        else if (is_two_qubit(e.gate))
            e.channels[k] = flux_channel(q);
        else
            e.channels[k] = microwave_channel(q);
        // Zero-length NOPs occupy nothing and never collide.
        if (e.duration_ns <= 0) continue;
        if (e.time_ns < busy_until_[q]) {
            collisions_.push_back({static_cast<std::uint8_t>(q), e.time_ns, busy_until_[q], e.pc});
            ok = false;
        }
        busy_until_[q] = std::max(busy_until_[q], e.time_ns + e.duration_ns);
    }
    events_.push_back(e);
    return ok;
}

MeasurementOutcome QpuState::measurement_result(int qubit, double issue_ns, std::uint32_t program_point)
{
    check_qubit(qubit);
    const double jitter = cfg_.jitter_ns > 0 ? jitter_stream_.uniform() * cfg_.jitter_ns : 0.0;
    const double u = outcome_streams_[qubit].uniform();
    MeasurementOutcome out;
    out.bit = u < cfg_.outcome_bias.at(program_point) ? 1 : 0;
    out.ready_ns = issue_ns + cfg_.meas_pulse_ns + cfg_.daq_ns + jitter;
    return out;
}

void write_issue_csv(std::ostream& os, const std::vector<IssueEvent>& events)
{
    os << "time_ns,gate,qubits,channel,duration_ns\n";
    char buf[64];
    for (const auto& e : events) {
        std::snprintf(buf, sizeof buf, "%.3f", e.time_ns);
        os << buf << ',' << gate_name(e.gate) << ',';
        for (int k = 0; k < e.qubit_count; ++k) os << (k ? ";" : "") << int(e.qubits[k]);
        os << ',';
        for (int k = 0; k < e.qubit_count; ++k) os << (k ? ";" : "") << e.channels[k];
        std::snprintf(buf, sizeof buf, "%.3f", e.duration_ns);
        os << ',' << buf << '\n';
    }
}

}  // namespace qcp
