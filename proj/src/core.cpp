#include "qcp/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qcp {

namespace {

constexpr double kEps = 1e-9;

std::int64_t ceil_cycles(double ns, double clock_ns)
{
    return static_cast<std::int64_t>(std::ceil(ns / clock_ns - kEps));
}

bool condition_holds(Cond c, std::int64_t a, std::int64_t b)
{
    switch (c) {
    case Cond::EQ:
        return a == b;
    case Cond::NE:
        return a != b;
    case Cond::LT:
        return a < b;
    case Cond::GE:
        return a >= b;
    case Cond::GT:
        return a > b;
    case Cond::LE:
        return a <= b;
    }
    return false;
}

std::uint64_t qubit_mask(const Instruction& i)
{
    std::uint64_t m = 0;
    for (auto q : i.targets()) m |= std::uint64_t{1} << q;
    return m;
}

}  // namespace

Core::Core(std::uint32_t id, SharedState& shared)
    : id_(id),
      sh_(shared),
      width_(shared.cfg.superscalar_width),
      depth_(shared.cfg.costs.pipeline_depth),
      clock_ns_(shared.cfg.clock_period_ns)
{
}

std::int32_t Core::reg(int r) const
{
    if (r >= kSharedRegisterBase) return sh_.shared_regs.at(r - kSharedRegisterBase);
    return regs_.at(r);
}

void Core::set_reg(int r, std::int32_t v)
{
    if (r >= kSharedRegisterBase)
        sh_.shared_regs.at(r - kSharedRegisterBase) = v;
    else
        regs_.at(r) = v;
}

bool Core::result_valid(int reg, std::int64_t now) const
{
    const auto& r = sh_.results[reg];
    return pending_meas_[reg] == 0 && r.written && r.ready_cycle <= now;
}

void Core::start_block(std::uint32_t block, const BlockInfoEntry& entry, std::int64_t now)
{
    if (block_) throw SimulationFault("core " + std::to_string(id_) + " activated while running a block");
    block_ = block;
    pc_start_ = entry.pc_start;
    pc_end_ = entry.pc_end;
    started_ = now;
    pc_ = entry.pc_start;
    fetch_epoch_ = 0;
    window_.clear();
    ended_ = false;
    penalty_until_ = now;
    // Private registers start from zero so a block's behavior never depends on
    // which block ran on this core before it.
    regs_.fill(0);
    cmp_lhs_ = cmp_rhs_ = 0;
    feedback_open_ = false;
    queue_.clear();
    points_created_ = 0;
    have_prev_ = false;
    prev_actual_ = prev_nominal_ = 0;
    contexts_.clear();
    scoreboard_ = 0;
    switching_.reset();
    drained_contexts_ = false;
}

CoreStepResult Core::step(std::int64_t now)
{
    CoreStepResult r;
    if (!block_) return r;

    CycleFlags f;
    service_contexts(now, f);
    const bool in_penalty = now < penalty_until_;
    f.penalty = in_penalty && !f.ctx_switch;
    if (!f.ctx_switch && !in_penalty) {
        fetch();
        execute_classical(now, f);
        dispatch_quantum(now, f);
    }
    update_closure();
    timing_tick(now, f);
    if (stream_ended() && !contexts_.empty()) drained_contexts_ = true;

    r.kind = classify(f);
    r.progress = f.progress;
    if (block_finished(now)) {
        sh_.trace.blocks.push_back({*block_, id_, started_, now, drained_contexts_});
        block_.reset();
        r.block_done = true;
        r.progress = true;
    }
    return r;
}

// ---------------------------------------------------------------------------
// MRCE contexts

void Core::service_contexts(std::int64_t now, CycleFlags& f)
{
    if (!switching_) {
        for (std::size_t k = 0; k < contexts_.size(); ++k) {
            const auto& c = contexts_[k];
            if (result_valid(c.result_reg, now) && queued_on_qubit_[c.qubit] == 0) {
                switching_ = k;
                contexts_[k].switch_start = now;
                break;
            }
        }
    }
    if (!switching_) return;
    if (resolve_context(*switching_, now)) {
        switching_.reset();
        f.progress = true;
    } else {
        f.ctx_switch = true;
    }
}

bool Core::resolve_context(std::size_t k, std::int64_t now)
{
    const auto c = contexts_[k];
    if (now < c.switch_start + static_cast<std::int64_t>(sh_.cfg.costs.ctx_switch_cycles)) return false;
    if (sh_.qpu.busy_until(c.qubit) > now * clock_ns_ + kEps) return false;
    const int bit = sh_.results[c.result_reg].value;
    const Gate g = bit ? c.op1 : c.op0;
    inject(g, c.qubit, c.pc, now);
    sh_.trace.mrce.push_back({id_, *block_, c.pc, static_cast<std::uint8_t>(c.qubit), c.created, c.switch_start, now,
                              bit, g});
    contexts_.erase(contexts_.begin() + static_cast<std::ptrdiff_t>(k));
    scoreboard_ &= ~(std::uint64_t{1} << c.qubit);
    return true;
}

void Core::inject(Gate g, int qubit, std::uint32_t pc, std::int64_t now)
{
    if (g == Gate::NOP) return;
    IssueEvent e;
    e.time_ns = now * clock_ns_;
    e.gate = g;
    e.qubits[0] = static_cast<std::uint8_t>(qubit);
    e.qubit_count = 1;
    e.core = id_;
    e.block = *block_;
    e.pc = pc;
    e.nominal_ns = e.time_ns;
    e.conditional = true;
    sh_.qpu.accept_issue(e);
    injected_end_ns_[qubit] = e.time_ns + e.duration_ns;
    last_op_end_ns_ = std::max(last_op_end_ns_, e.time_ns + e.duration_ns);
}

// ---------------------------------------------------------------------------
// Front end

void Core::fetch()
{
    if (ended_ || window_.size() >= width_) return;
    const auto& code = sh_.program.instructions;
    for (std::uint32_t k = 0; k < width_ && pc_ <= pc_end_; ++k, ++pc_) {
        const Instruction* ins = &code[pc_];
        window_.push_back({pc_, ins, fetch_epoch_});
        if (!ins->is_quantum()) ++fetch_epoch_;
    }
}

void Core::execute_classical(std::int64_t now, CycleFlags& f)
{
    // Only the W sync buffers are visible to the classical unit; anything
    // fetched past them is dropped and refetched after dispatch.
    const auto visible = std::min<std::size_t>(window_.size(), width_);
    for (std::size_t idx = 0; idx < visible; ++idx)
        if (!window_[idx].ins->is_quantum()) {
            try_retire(idx, now, f);
            return;
        }
}

bool Core::try_retire(std::size_t idx, std::int64_t now, CycleFlags& f)
{
    const auto entry = window_[idx];
    const Instruction& i = *entry.ins;
    auto older_quantum = [&](auto pred) {
        for (std::size_t k = 0; k < idx; ++k)
            if (pred(*window_[k].ins)) return true;
        return false;
    };
    auto flush_younger = [&] { window_.erase(window_.begin() + static_cast<std::ptrdiff_t>(idx) + 1, window_.end()); };
    auto retire = [&] {
        window_.erase(window_.begin() + static_cast<std::ptrdiff_t>(idx));
        f.retired = true;
        f.progress = true;
        return true;
    };

    if (i.kind == InstrKind::EndBlock) {
        flush_younger();
        ended_ = true;
        return retire();
    }

    if (i.kind == InstrKind::Mrce) {
        const int q = i.qubits[0];
        const bool hazard = older_quantum([&](const Instruction& o) {
            return (qubit_mask(o) >> q & 1) || (o.gate == Gate::MEAS && o.result_reg == i.result_reg);
        });
        // Older work on the same qubit has to reach the timing queue first; a
        // second context on a scoreboarded qubit waits for the first.
        if (hazard || (scoreboard_ >> q & 1)) {
            f.stall = true;
            return false;
        }
        if (result_valid(i.result_reg, now) && queued_on_qubit_[q] == 0 &&
            sh_.qpu.busy_until(q) <= now * clock_ns_ + kEps) {
            const int bit = sh_.results[i.result_reg].value;
            const Gate g = bit ? i.op_if_1 : i.op_if_0;
            inject(g, q, entry.pc, now);
            sh_.trace.mrce.push_back({id_, *block_, entry.pc, static_cast<std::uint8_t>(q), now, now, now, bit, g});
        } else {
            contexts_.push_back({entry.pc, i.result_reg, q, i.op_if_0, i.op_if_1, now, -1});
            scoreboard_ |= std::uint64_t{1} << q;
        }
        return retire();
    }

    switch (i.op) {
    case ClassicalOp::FMR: {
        const bool older_meas =
            older_quantum([&](const Instruction& o) { return o.gate == Gate::MEAS && o.result_reg == i.result_reg; });
        if (older_meas || !result_valid(i.result_reg, now)) {
            f.meas_wait = true;
            return false;
        }
        set_reg(i.rd, sh_.results[i.result_reg].value);
        feedback_open_ = true;
        return retire();
    }
    case ClassicalOp::LDI:
        set_reg(i.rd, i.imm);
        return retire();
    case ClassicalOp::MOV:
        set_reg(i.rd, reg(i.rs1));
        return retire();
    case ClassicalOp::ADD:
        set_reg(i.rd, reg(i.rs1) + reg(i.rs2));
        return retire();
    case ClassicalOp::SUB:
        set_reg(i.rd, reg(i.rs1) - reg(i.rs2));
        return retire();
    case ClassicalOp::AND:
        set_reg(i.rd, reg(i.rs1) & reg(i.rs2));
        return retire();
    case ClassicalOp::OR:
        set_reg(i.rd, reg(i.rs1) | reg(i.rs2));
        return retire();
    case ClassicalOp::CMP:
        cmp_lhs_ = reg(i.rs1);
        cmp_rhs_ = reg(i.rs2);
        return retire();
    case ClassicalOp::BR:
    case ClassicalOp::JMP: {
        const bool taken = i.op == ClassicalOp::JMP || condition_holds(i.cond, cmp_lhs_, cmp_rhs_);
        if (taken) {
            flush_younger();
            pc_ = i.target;
            penalty_until_ = now + 1 + sh_.cfg.costs.branch_penalty;
        }
        return retire();
    }
    }
    return false;
}

void Core::dispatch_quantum(std::int64_t now, CycleFlags& f)
{
    std::size_t limit = 0;
    while (limit < window_.size() && window_[limit].ins->is_quantum()) ++limit;

    if (limit > 0) {
        const auto& head = window_.front();
        const bool join = !queue_.empty() && !queue_.back().closed && head.ins->timing_label == 0 &&
                          head.epoch == queue_.back().epoch;
        std::size_t n = 0;
        while (n < limit && n < width_) {
            const auto& e = window_[n];
            if (n > 0 && (e.ins->timing_label != 0 || e.epoch != head.epoch)) break;
            if (qubit_mask(*e.ins) & scoreboard_) break;
            ++n;
        }
        if (n == 0) {
            f.stall = true;  // waiting for an MRCE context to resolve
        } else if (!join && queue_.size() >= sh_.cfg.costs.timing_queue_capacity) {
            f.slack = true;  // timing queue back-pressure
        } else {
            const std::int64_t ready = now + static_cast<std::int64_t>(depth_) - 1;
            if (!join) {
                if (!queue_.empty()) queue_.back().closed = true;
                TimingPoint p;
                p.label = head.ins->timing_label;
                p.epoch = head.epoch;
                p.first = points_created_ == 0;
                p.reanchor = feedback_open_ && !p.first;
                p.ready = ready;
                if (p.first)
                    p.nominal = ready + p.label;
                else if (p.reanchor)
                    p.nominal = std::max<std::int64_t>(prev_nominal_ + p.label, ready);
                else
                    p.nominal = prev_nominal_ + p.label;
                prev_nominal_ = p.nominal;
                ++points_created_;
                queue_.push_back(std::move(p));
            }
            auto& p = queue_.back();
            for (std::size_t k = 0; k < n; ++k) {
                const auto& e = window_[k];
                p.ops.push_back({e.pc, e.ins, now});
                if (e.ins->gate == Gate::MEAS) ++pending_meas_[e.ins->result_reg];
                for (auto q : e.ins->targets()) ++queued_on_qubit_[q];
            }
            p.ready = std::max(p.ready, ready);
            window_.erase(window_.begin(), window_.begin() + static_cast<std::ptrdiff_t>(n));
            feedback_open_ = false;
            f.dispatched = true;
            f.progress = true;
        }
    }

    // Instructions beyond the W sync buffers are refetched later.
    while (window_.size() > width_) {
        pc_ = window_.back().pc;
        fetch_epoch_ = window_.back().epoch;
        window_.pop_back();
    }
}

// A timing point is complete once the front end has seen an instruction that
// cannot belong to it.
void Core::update_closure()
{
    if (queue_.empty() || queue_.back().closed) return;
    auto& p = queue_.back();
    if (!window_.empty()) {
        const auto& h = window_.front();
        if (!h.ins->is_quantum() || h.ins->timing_label != 0 || h.epoch != p.epoch) p.closed = true;
    } else if (fetch_epoch_ != p.epoch || stream_ended()) {
        p.closed = true;
    }
}

// ---------------------------------------------------------------------------
// Timing controller

void Core::timing_tick(std::int64_t now, CycleFlags& f)
{
    while (!queue_.empty()) {
        auto& p = queue_.front();
        if (!p.closed) break;
        std::int64_t target;
        if (p.first)
            target = p.nominal;
        else if (p.reanchor)
            target = std::max<std::int64_t>(prev_actual_ + p.label, p.ready);
        else
            target = prev_actual_ + p.label;
        std::int64_t earliest = p.ready;
        for (const auto& op : p.ops)
            for (auto q : op.ins->targets()) earliest = std::max(earliest, ceil_cycles(injected_end_ns_[q], clock_ns_));
        if (now < std::max(target, earliest)) break;
        issue_point(p, now, target);
        queue_.pop_front();
        f.progress = true;
    }
}

void Core::issue_point(TimingPoint& p, std::int64_t now, std::int64_t target)
{
    const double t = now * clock_ns_;
    for (const auto& op : p.ops) {
        const Instruction& i = *op.ins;
        IssueEvent e;
        e.time_ns = t;
        e.gate = i.gate;
        e.qubits = i.qubits;
        e.qubit_count = i.qubit_count;
        e.angle = i.angle;
        e.core = id_;
        e.block = *block_;
        e.pc = op.pc;
        e.nominal_ns = p.nominal * clock_ns_;
        e.dispatch_cycle = op.dispatch_cycle;
        sh_.qpu.accept_issue(e);
        last_op_end_ns_ = std::max(last_op_end_ns_, t + e.duration_ns);
        for (auto q : i.targets()) --queued_on_qubit_[q];
        if (i.gate == Gate::MEAS) {
            const auto out = sh_.qpu.measurement_result(i.qubits[0], t, op.pc);
            auto& r = sh_.results[i.result_reg];
            r.value = out.bit;
            r.written = true;
            r.ready_cycle = ceil_cycles(out.ready_ns, clock_ns_);
            --pending_meas_[i.result_reg];
        }
    }
    if (now > target) sh_.trace.violations.push_back({id_, *block_, target * clock_ns_, t});
    prev_actual_ = now;
    have_prev_ = true;
}

// ---------------------------------------------------------------------------

CycleKind Core::classify(const CycleFlags& f) const
{
    if (f.dispatched) return CycleKind::Quantum;
    if (f.ctx_switch) return CycleKind::Feedback;
    if (feedback_open_ && (f.retired || f.penalty || f.stall)) return CycleKind::Feedback;
    if (f.retired) return CycleKind::Classical;
    if (f.penalty || f.stall) return CycleKind::Stall;
    if (f.meas_wait) return CycleKind::MeasWait;
    if (f.slack || stream_ended()) return CycleKind::Slack;
    throw SimulationFault("cycle attribution gap on core " + std::to_string(id_) + " at pc " + std::to_string(pc_));
}

bool Core::block_finished(std::int64_t now) const
{
    return stream_ended() && window_.empty() && queue_.empty() && contexts_.empty() && !switching_ &&
           now * clock_ns_ + kEps >= last_op_end_ns_;
}

}  // namespace qcp
