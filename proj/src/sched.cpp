#include "qcp/sched.hpp"

#include <algorithm>
#include <string>

namespace qcp {

Scheduler::Scheduler(const BlockInfoTable& table, std::uint32_t cores, const CostModel& costs, Options opts)
    : table_(table), costs_(costs), opts_(opts), slots_(cores), statuses_(table.size(), BlockStatus::Wait)
{
    if (cores == 0) throw ConfigError("scheduler needs at least one core");
    // Levels with no blocks are passed over immediately.
    if (table_.kind() == DependencyKind::Priority) advance_counter();

    // The program loader fills both caches of the first cores before time zero,
    // so the opening blocks only pay the cache-path switch.
    if (opts_.initial_prefetch) {
        std::uint32_t core = 0;
        for (std::size_t b = 0; b < table_.size() && core < cores; ++b) {
            if (!ready(b)) continue;
            slots_[core].prefetched = static_cast<std::uint32_t>(b);
            slots_[core].prefetch_ready_at = 0;
            set_status(b, BlockStatus::Prefetch);
            events_.push_back({0, SchedAction::Prefetch, static_cast<std::uint32_t>(b), core, 0});
            ++core;
        }
    }
}

void Scheduler::advance_counter()
{
    for (auto next = advance_priority_counter(table_, statuses_, counter_); next != counter_;
         next = advance_priority_counter(table_, statuses_, counter_))
        counter_ = next;
}

std::int64_t Scheduler::reserve_port(std::int64_t now, std::uint32_t cost)
{
    // One instruction-memory port: block transfers are served one after another.
    const auto start = std::max(now, port_free_);
    port_free_ = start + cost;
    return port_free_;
}

std::uint32_t Scheduler::allocation_cost(std::size_t b) const
{
    if (opts_.ideal) return 0;
    const auto len = table_.entry(b).length();
    return costs_.sched_response + (len + costs_.fetch_bandwidth - 1) / costs_.fetch_bandwidth;
}

bool Scheduler::prefetch_eligible(std::size_t b) const
{
    if (statuses_[b] != BlockStatus::Wait) return false;
    auto running_or_done = [&](std::size_t o) {
        return statuses_[o] == BlockStatus::InExecution || statuses_[o] == BlockStatus::Done;
    };
    if (table_.kind() == DependencyKind::Direct) {
        const auto mask = table_.direct_mask(b);
        for (std::size_t o = 0; o < table_.size(); ++o)
            if ((mask & block_bit(o)) && !running_or_done(o)) return false;
        return true;
    }
    const auto p = table_.priority(b);
    if (p == counter_) return true;
    if (p != counter_ + 1) return false;
    for (std::size_t o = 0; o < table_.size(); ++o)
        if (table_.priority(o) == counter_ && !running_or_done(o)) return false;
    return true;
}

void Scheduler::set_status(std::size_t b, BlockStatus s)
{
    const auto from = statuses_[b];
    const bool legal = (from == BlockStatus::Wait && (s == BlockStatus::Prefetch || s == BlockStatus::InExecution)) ||
                       (from == BlockStatus::Prefetch && s == BlockStatus::InExecution) ||
                       (from == BlockStatus::InExecution && s == BlockStatus::Done);
    if (!legal)
        throw SimulationFault("illegal status transition for block '" + table_.name(b) + "': " +
                              std::string(status_name(from)) + " -> " + std::string(status_name(s)));
    statuses_[b] = s;
    quiet_ = false;
}

void Scheduler::begin_execution(std::uint32_t b, std::uint32_t core, std::int64_t start, std::int64_t now,
                                SchedAction how)
{
    if (!ready(b)) throw SimulationFault("block '" + table_.name(b) + "' started before its dependencies cleared");
    set_status(b, BlockStatus::InExecution);
    slots_[core].activating = b;
    slots_[core].activate_at = start;
    events_.push_back({now, how, b, core, start});
}

bool Scheduler::try_switch(std::int64_t now)
{
    bool acted = false;
    for (std::uint32_t c = 0; c < slots_.size(); ++c) {
        auto& s = slots_[c];
        if (!s.idle() || !s.prefetched || s.prefetch_ready_at > now || !ready(*s.prefetched)) continue;
        const auto b = *s.prefetched;
        s.prefetched.reset();
        begin_execution(b, c, now + switch_cost(), now, SchedAction::Switch);
        acted = true;
    }
    return acted;
}

bool Scheduler::try_allocate(std::int64_t now)
{
    if (busy(now)) return false;
    for (std::size_t b = 0; b < table_.size(); ++b) {
        if (statuses_[b] != BlockStatus::Wait || !ready(b)) continue;
        for (std::uint32_t c = 0; c < slots_.size(); ++c) {
            if (!slots_[c].idle()) continue;
            const auto finish = reserve_port(now, allocation_cost(b));
            busy_until_ = finish;
            begin_execution(static_cast<std::uint32_t>(b), c, finish, now, SchedAction::Allocate);
            return true;
        }
        return false;  // ready work but no idle core
    }
    return false;
}

bool Scheduler::try_prefetch(std::int64_t now)
{
    if (!opts_.prefetch || busy(now)) return false;
    for (std::size_t b = 0; b < table_.size(); ++b) {
        if (!prefetch_eligible(b)) continue;
        // Idle cores first, then cores whose second cache is free while they run.
        for (int pass = 0; pass < 2; ++pass)
            for (std::uint32_t c = 0; c < slots_.size(); ++c) {
                auto& s = slots_[c];
                if (s.prefetched || s.idle() != (pass == 0)) continue;
                s.prefetched = static_cast<std::uint32_t>(b);
                s.prefetch_ready_at = reserve_port(now, allocation_cost(b));
                set_status(b, BlockStatus::Prefetch);
                events_.push_back({now, SchedAction::Prefetch, static_cast<std::uint32_t>(b), c, s.prefetch_ready_at});
                return true;
            }
        return false;
    }
    return false;
}

std::vector<Activation> Scheduler::collect_activations(std::int64_t now)
{
    std::vector<Activation> out;
    for (std::uint32_t c = 0; c < slots_.size(); ++c) {
        auto& s = slots_[c];
        if (s.activating && s.activate_at <= now) {
            s.running = s.activating;
            s.activating.reset();
            events_.push_back({now, SchedAction::Activate, *s.running, c, now});
            out.push_back({*s.running, c});
        }
    }
    return out;
}

std::vector<Activation> Scheduler::tick(std::int64_t now)
{
    // A full scan that found nothing stays fruitless until some block or core
    // changes state, so it is skipped until then.
    auto scan = [&] {
        if (quiet_ && !busy(now)) return false;
        bool acted = false;
        while (try_allocate(now)) acted = true;
        acted = try_prefetch(now) || acted;
        if (!acted && !busy(now)) quiet_ = true;
        return acted;
    };
    if (opts_.ideal) {
        // Zero-cost scheduling: keep acting until nothing changes this cycle.
        for (bool acted = true; acted;) {
            acted = try_switch(now);
            acted = scan() || acted;
        }
    } else {
        try_switch(now);
        scan();
    }
    return collect_activations(now);
}

void Scheduler::notify_done(std::uint32_t block, std::uint32_t core, std::int64_t now)
{
    if (block >= table_.size() || core >= slots_.size())
        throw SimulationFault("completion signal for unknown block or core");
    auto& s = slots_[core];
    if (statuses_[block] != BlockStatus::InExecution || s.running != block)
        throw SimulationFault("double or stray completion of block '" + table_.name(block) + "'");
    set_status(block, BlockStatus::Done);
    done_mask_ |= block_bit(block);
    ++done_count_;
    s.running.reset();
    quiet_ = false;
    events_.push_back({now, SchedAction::Done, block, core, now});
    if (table_.kind() == DependencyKind::Priority) advance_counter();
}

}  // namespace qcp
