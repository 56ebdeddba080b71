#pragma once

// One control processor: width-W fetch into a pre-decode window, a single
// in-order classical unit with lookahead past buffered quantum instructions,
// timed quantum dispatch into the timing queue, the timing controller and the
// MRCE fast context switch.

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "qcp/config.hpp"
#include "qcp/isa.hpp"
#include "qcp/program.hpp"
#include "qcp/qpu.hpp"
#include "qcp/trace.hpp"

namespace qcp {

struct ResultRegister {
    int value = 0;
    bool written = false;
    std::int64_t ready_cycle = 0;
};

// Machine state shared by all cores of one engine.
struct SharedState {
    const Program& program;
    const MachineConfig& cfg;
    QpuState& qpu;
    Trace& trace;
    std::array<ResultRegister, kResultRegisters> results{};
    std::array<std::int32_t, kGpRegisters - kSharedRegisterBase> shared_regs{};
};

struct CoreStepResult {
    CycleKind kind = CycleKind::Inactive;
    bool block_done = false;
    // Something changed architecturally this cycle (deadlock watchdog input).
    bool progress = false;
};

class Core {
public:
    Core(std::uint32_t id, SharedState& shared);

    std::uint32_t id() const { return id_; }
    bool active() const { return block_.has_value(); }
    std::optional<std::uint32_t> block() const { return block_; }

    void start_block(std::uint32_t block, const BlockInfoEntry& entry, std::int64_t now);
    CoreStepResult step(std::int64_t now);

    std::int32_t reg(int r) const;

    // Exposed for tests: what the pre-decoder currently holds.
    std::size_t window_size() const { return window_.size(); }
    std::size_t timing_queue_size() const { return queue_.size(); }
    std::uint64_t scoreboard() const { return scoreboard_; }

private:
    struct WindowEntry {
        std::uint32_t pc = 0;
        const Instruction* ins = nullptr;
        // Number of non-quantum instructions fetched before this one; quantum
        // instructions only share a timing point within one epoch.
        std::uint32_t epoch = 0;
    };

    struct QueuedOp {
        std::uint32_t pc = 0;
        const Instruction* ins = nullptr;
        std::int64_t dispatch_cycle = 0;
    };

    // All quantum operations of one timing point, in dispatch order.
    struct TimingPoint {
        std::uint32_t label = 0;
        std::uint32_t epoch = 0;
        std::vector<QueuedOp> ops;
        std::int64_t ready = 0;
        std::int64_t nominal = 0;
        bool first = false;
        bool reanchor = false;
        bool closed = false;
    };

    struct Context {
        std::uint32_t pc = 0;
        int result_reg = 0;
        int qubit = 0;
        Gate op0 = Gate::NOP;
        Gate op1 = Gate::NOP;
        std::int64_t created = 0;
        std::int64_t switch_start = -1;
    };

    struct CycleFlags {
        bool dispatched = false;
        bool retired = false;
        bool ctx_switch = false;
        bool penalty = false;
        bool stall = false;
        bool meas_wait = false;
        bool slack = false;
        bool progress = false;
    };

    void set_reg(int r, std::int32_t v);
    bool result_valid(int reg, std::int64_t now) const;
    bool stream_ended() const { return ended_ || (pc_ > pc_end_ && window_.empty()); }

    void service_contexts(std::int64_t now, CycleFlags& f);
    bool resolve_context(std::size_t k, std::int64_t now);
    void fetch();
    void execute_classical(std::int64_t now, CycleFlags& f);
    bool try_retire(std::size_t idx, std::int64_t now, CycleFlags& f);
    void dispatch_quantum(std::int64_t now, CycleFlags& f);
    void update_closure();
    void timing_tick(std::int64_t now, CycleFlags& f);
    void issue_point(TimingPoint& p, std::int64_t now, std::int64_t target);
    void inject(Gate g, int qubit, std::uint32_t pc, std::int64_t now);
    CycleKind classify(const CycleFlags& f) const;
    bool block_finished(std::int64_t now) const;

    std::uint32_t id_;
    SharedState& sh_;
    std::uint32_t width_;
    std::uint32_t depth_;
    double clock_ns_;

    std::optional<std::uint32_t> block_;
    std::uint32_t pc_start_ = 0;
    std::uint32_t pc_end_ = 0;
    std::int64_t started_ = 0;

    std::uint32_t pc_ = 0;
    std::uint32_t fetch_epoch_ = 0;
    std::deque<WindowEntry> window_;
    bool ended_ = false;
    std::int64_t penalty_until_ = 0;

    std::array<std::int32_t, kSharedRegisterBase> regs_{};
    std::int64_t cmp_lhs_ = 0;
    std::int64_t cmp_rhs_ = 0;
    // An FMR retired and no quantum instruction has dispatched since.
    bool feedback_open_ = false;

    std::deque<TimingPoint> queue_;
    std::uint32_t points_created_ = 0;
    bool have_prev_ = false;
    std::int64_t prev_actual_ = 0;
    std::int64_t prev_nominal_ = 0;
    std::array<std::uint32_t, kResultRegisters> pending_meas_{};
    std::array<std::uint32_t, kMaxQubits> queued_on_qubit_{};
    std::array<double, kMaxQubits> injected_end_ns_{};
    double last_op_end_ns_ = 0;

    std::vector<Context> contexts_;
    std::uint64_t scoreboard_ = 0;
    std::optional<std::size_t> switching_;
    bool drained_contexts_ = false;
};

}  // namespace qcp
