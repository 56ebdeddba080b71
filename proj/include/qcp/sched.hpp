#pragma once

// Multiprocessor control unit: status registers, dependency-checked block
// allocation, prefetching into the second cache of each core, completion.

#include <cstdint>
#include <optional>
#include <vector>

#include "qcp/config.hpp"
#include "qcp/program.hpp"
#include "qcp/trace.hpp"

namespace qcp {

struct Activation {
    std::uint32_t block = 0;
    std::uint32_t core = 0;
};

class Scheduler {
public:
    struct Options {
        bool prefetch = true;
        bool initial_prefetch = true;
        bool ideal = false;
    };

    Scheduler(const BlockInfoTable& table, std::uint32_t cores, const CostModel& costs, Options opts);

    // One scheduler cycle. Returns the blocks whose cores start executing at `now`.
    std::vector<Activation> tick(std::int64_t now);

    void notify_done(std::uint32_t block, std::uint32_t core, std::int64_t now);

    bool finished() const { return done_count_ == table_.size(); }
    bool busy(std::int64_t now) const { return now < busy_until_; }

    BlockStatus status(std::size_t b) const { return statuses_.at(b); }
    const std::vector<BlockStatus>& statuses() const { return statuses_; }
    BlockMask done_mask() const { return done_mask_; }
    std::uint32_t priority_counter() const { return counter_; }
    const std::vector<SchedEvent>& events() const { return events_; }
    std::vector<SchedEvent> take_events() { return std::move(events_); }

    bool ready(std::size_t b) const { return deps_satisfied(table_, done_mask_, counter_, b); }
    bool prefetch_eligible(std::size_t b) const;

    // Cycles to copy a block into a core's cache (zero under ideal scheduling).
    // Cold allocations and prefetches share one instruction-memory port, so
    // concurrent transfers queue behind each other.
    std::uint32_t allocation_cost(std::size_t b) const;
    std::uint32_t switch_cost() const { return opts_.ideal ? 0 : costs_.t_switch; }

private:
    struct CoreSlot {
        std::optional<std::uint32_t> running;
        std::optional<std::uint32_t> activating;
        std::int64_t activate_at = 0;
        std::optional<std::uint32_t> prefetched;
        std::int64_t prefetch_ready_at = 0;

        bool idle() const { return !running && !activating; }
    };

    void advance_counter();
    std::int64_t reserve_port(std::int64_t now, std::uint32_t cost);
    void set_status(std::size_t b, BlockStatus s);
    void begin_execution(std::uint32_t b, std::uint32_t core, std::int64_t start, std::int64_t now, SchedAction how);
    bool try_switch(std::int64_t now);
    bool try_allocate(std::int64_t now);
    bool try_prefetch(std::int64_t now);
    std::vector<Activation> collect_activations(std::int64_t now);

    const BlockInfoTable& table_;
    CostModel costs_;
    Options opts_;
    std::vector<CoreSlot> slots_;
    std::vector<BlockStatus> statuses_;
    BlockMask done_mask_ = 0;
    std::uint32_t counter_ = 0;
    std::int64_t busy_until_ = 0;
    std::int64_t port_free_ = 0;
    std::size_t done_count_ = 0;
    bool quiet_ = false;
    std::vector<SchedEvent> events_;
};

}  // namespace qcp
