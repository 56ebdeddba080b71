#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "qcp/config.hpp"
#include "qcp/trace.hpp"

namespace qcp {

// SplitMix64 (Steele, Lea, Flood 2014). Tiny state, identical output in any
// language, good enough for Bernoulli outcome draws.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

int microwave_channel(int qubit);
int flux_channel(int qubit);
int readout_channel(int qubit);

double gate_duration_ns(const QpuConfig& cfg, Gate g);

struct MeasurementOutcome {
    int bit = 0;
    double ready_ns = 0;
};

class QpuState {
public:
    QpuState(const QpuConfig& cfg, std::uint32_t qubit_count, std::uint64_t seed);

    std::uint32_t qubit_count() const { return static_cast<std::uint32_t>(busy_until_.size()); }

    // Fills in channels and duration, logs the event and updates occupancy.
    // Returns false when the event overlaps an operation already on one of its qubits.
    bool accept_issue(IssueEvent& e);

    // Result of the MEAS issued on `qubit` at `issue_ns`; draws from that qubit's stream.
    MeasurementOutcome measurement_result(int qubit, double issue_ns, std::uint32_t program_point);

    double busy_until(int qubit) const { return busy_until_.at(qubit); }

    const std::vector<IssueEvent>& events() const { return events_; }
    const std::vector<Collision>& collisions() const { return collisions_; }
    std::vector<IssueEvent> take_events() { return std::move(events_); }
    std::vector<Collision> take_collisions() { return std::move(collisions_); }

private:
    void check_qubit(int q) const;

    QpuConfig cfg_;
    std::vector<double> busy_until_;
    std::vector<SplitMix64> outcome_streams_;
    SplitMix64 jitter_stream_;
    std::vector<IssueEvent> events_;
    std::vector<Collision> collisions_;
};

// time_ns,gate,qubits,channel,duration_ns (multi-qubit fields joined with ';').
void write_issue_csv(std::ostream& os, const std::vector<IssueEvent>& events);

}  // namespace qcp
