#pragma once

// Block information table: per-block PC ranges and the two dependency
// representations (direct bit-vectors, priority levels).

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qcp/isa.hpp"

namespace qcp {

enum class BlockStatus : std::uint8_t { Wait, Prefetch, InExecution, Done };

std::string_view status_name(BlockStatus s);

using BlockMask = std::uint64_t;

inline constexpr BlockMask block_bit(std::size_t b) { return BlockMask{1} << b; }

struct DirectDependency {
    BlockMask mask = 0;
    bool operator==(const DirectDependency&) const = default;
};

struct PriorityDependency {
    std::uint32_t level = 0;
    bool operator==(const PriorityDependency&) const = default;
};

using Dependency = std::variant<DirectDependency, PriorityDependency>;

enum class DependencyKind { Direct, Priority };

struct BlockInfoEntry {
    std::uint32_t block_id = 0;
    std::uint32_t pc_start = 0;
    std::uint32_t pc_end = 0;
    Dependency dependency;

    std::uint32_t length() const { return pc_end - pc_start + 1; }
    bool operator==(const BlockInfoEntry&) const = default;
};

// Priority entries pack into one 32-bit word: start[31:20] end[19:8] priority[7:0].
std::uint32_t pack_priority_entry(const BlockInfoEntry& e);
BlockInfoEntry unpack_priority_entry(std::uint32_t block_id, std::uint32_t word);

class BuildError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class BlockInfoTable {
public:
    static constexpr std::size_t kCapacity = 64;

    BlockInfoTable() = default;
    BlockInfoTable(DependencyKind kind, std::vector<BlockInfoEntry> entries, std::vector<std::string> names = {});

    DependencyKind kind() const { return kind_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const BlockInfoEntry& entry(std::size_t b) const { return entries_.at(b); }
    std::span<const BlockInfoEntry> entries() const { return entries_; }
    const std::string& name(std::size_t b) const { return names_.at(b); }

    BlockMask direct_mask(std::size_t b) const;
    std::uint32_t priority(std::size_t b) const;
    std::uint32_t max_priority() const;
    std::uint32_t distinct_priorities() const;

    // Packed words for priority tables; direct tables keep their bit-vectors
    // in a sidecar matrix (one 64-bit row per block).
    std::vector<std::uint32_t> packed_words() const;
    std::vector<BlockMask> direct_matrix() const;

private:
    DependencyKind kind_ = DependencyKind::Direct;
    std::vector<BlockInfoEntry> entries_;
    std::vector<std::string> names_;
};

BlockInfoTable build_table(const Program& p);

// Longest-path level assignment of a direct table / direct form of a priority
// table (each block waits on every block of the nearest lower level).
BlockInfoTable to_priority_table(const BlockInfoTable& t);
BlockInfoTable to_direct_table(const BlockInfoTable& t);

bool deps_satisfied(const BlockInfoTable& t, BlockMask done, std::uint32_t counter, std::size_t b);

// One increment when every block at the current level is Done; stable once the
// counter passes the highest level.
std::uint32_t advance_priority_counter(const BlockInfoTable& t, std::span<const BlockStatus> statuses,
                                       std::uint32_t counter);

}  // namespace qcp
