#include "qcp/program.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace qcp {

std::string_view status_name(BlockStatus s)
{
    switch (s) {
    case BlockStatus::Wait:
        return "wait";
    case BlockStatus::Prefetch:
        return "prefetch";
    case BlockStatus::InExecution:
        return "in_execution";
    case BlockStatus::Done:
        return "done";
    }
    return "?";
}

std::uint32_t pack_priority_entry(const BlockInfoEntry& e)
{
    const auto* p = std::get_if<PriorityDependency>(&e.dependency);
    if (!p) throw BuildError("only priority entries pack into 32 bits");
    if (e.pc_start >= (1u << 12) || e.pc_end >= (1u << 12) || p->level >= (1u << 8))
        throw BuildError("block entry does not fit the packed 12/12/8 layout");
    return (e.pc_start << 20) | (e.pc_end << 8) | p->level;
}

BlockInfoEntry unpack_priority_entry(std::uint32_t block_id, std::uint32_t word)
{
    return {block_id, word >> 20, (word >> 8) & 0xFFFu, PriorityDependency{word & 0xFFu}};
}

BlockInfoTable::BlockInfoTable(DependencyKind kind, std::vector<BlockInfoEntry> entries,
                               std::vector<std::string> names)
    : kind_(kind), entries_(std::move(entries)), names_(std::move(names))
{
    if (entries_.size() > kCapacity) throw BuildError("block table capacity exceeded");
    if (names_.empty())
        for (std::size_t b = 0; b < entries_.size(); ++b) names_.push_back("W" + std::to_string(b + 1));
    for (std::size_t b = 0; b < entries_.size(); ++b) {
        const auto& e = entries_[b];
        if (e.block_id != b) throw BuildError("block ids must be dense 0..n-1");
        if (e.pc_start > e.pc_end) throw BuildError("block start after end");
        const bool direct = std::holds_alternative<DirectDependency>(e.dependency);
        if (direct != (kind_ == DependencyKind::Direct))
            throw BuildError("all entries must use the same dependency representation");
        if (direct) {
            const auto mask = std::get<DirectDependency>(e.dependency).mask;
            if (mask & block_bit(b)) throw BuildError("block '" + names_[b] + "' depends on itself");
            if (entries_.size() < 64 && (mask >> entries_.size()) != 0)
                throw BuildError("dependency vector wider than the block count");
        }
    }
}

BlockMask BlockInfoTable::direct_mask(std::size_t b) const
{
    return std::get<DirectDependency>(entries_.at(b).dependency).mask;
}

std::uint32_t BlockInfoTable::priority(std::size_t b) const
{
    return std::get<PriorityDependency>(entries_.at(b).dependency).level;
}

std::uint32_t BlockInfoTable::max_priority() const
{
    std::uint32_t hi = 0;
    for (std::size_t b = 0; b < size(); ++b) hi = std::max(hi, priority(b));
    return hi;
}

std::uint32_t BlockInfoTable::distinct_priorities() const
{
    std::set<std::uint32_t> levels;
    for (std::size_t b = 0; b < size(); ++b) levels.insert(priority(b));
    return static_cast<std::uint32_t>(levels.size());
}

std::vector<std::uint32_t> BlockInfoTable::packed_words() const
{
    std::vector<std::uint32_t> out;
    for (const auto& e : entries_) out.push_back(pack_priority_entry(e));
    return out;
}

std::vector<BlockMask> BlockInfoTable::direct_matrix() const
{
    std::vector<BlockMask> out;
    for (std::size_t b = 0; b < size(); ++b) out.push_back(direct_mask(b));
    return out;
}

namespace {

void reject_cycles(const std::vector<BlockMask>& deps, const std::vector<std::string>& names)
{
    // Kahn's algorithm over the dependency bit-vectors.
    const std::size_t n = deps.size();
    BlockMask done = 0;
    for (std::size_t round = 0; round < n; ++round) {
        bool progress = false;
        for (std::size_t b = 0; b < n; ++b)
            if (!(done & block_bit(b)) && (deps[b] & ~done) == 0) {
                done |= block_bit(b);
                progress = true;
            }
        if (!progress) break;
    }
    for (std::size_t b = 0; b < n; ++b)
        if (!(done & block_bit(b))) throw BuildError("dependency cycle through block '" + names[b] + "'");
}

}  // namespace

BlockInfoTable build_table(const Program& p)
{
    if (p.blocks.size() > BlockInfoTable::kCapacity) throw BuildError("block table capacity exceeded");
    std::map<std::string, std::uint32_t> ids;
    std::vector<std::string> names;
    for (std::uint32_t b = 0; b < p.blocks.size(); ++b) {
        if (!ids.emplace(p.blocks[b].name, b).second)
            throw BuildError("duplicate block '" + p.blocks[b].name + "'");
        names.push_back(p.blocks[b].name);
    }
    const bool prio = p.uses_priorities();
    std::vector<BlockInfoEntry> entries;
    std::vector<BlockMask> masks;
    for (std::uint32_t b = 0; b < p.blocks.size(); ++b) {
        const auto& d = p.blocks[b];
        if (d.priority.has_value() != prio) throw BuildError("mixed deps/prio styles in one program");
        BlockInfoEntry e{b, d.pc_start, d.pc_end, {}};
        if (prio) {
            e.dependency = PriorityDependency{*d.priority};
        } else {
            BlockMask mask = 0;
            for (const auto& name : d.deps) {
                auto it = ids.find(name);
                if (it == ids.end()) throw BuildError("unresolved dependency '" + name + "' in block '" + d.name + "'");
                mask |= block_bit(it->second);
            }
            e.dependency = DirectDependency{mask};
            masks.push_back(mask);
        }
        entries.push_back(e);
    }
    if (!prio) reject_cycles(masks, names);
    return BlockInfoTable(prio ? DependencyKind::Priority : DependencyKind::Direct, std::move(entries),
                          std::move(names));
}

BlockInfoTable to_priority_table(const BlockInfoTable& t)
{
    if (t.kind() == DependencyKind::Priority) return t;
    const std::size_t n = t.size();
    std::vector<std::uint32_t> level(n, 0);
    std::vector<char> placed(n, 0);
    for (std::size_t round = 0; round < n; ++round)
        for (std::size_t b = 0; b < n; ++b) {
            if (placed[b]) continue;
            const auto mask = t.direct_mask(b);
            bool ready = true;
            std::uint32_t lvl = 0;
            for (std::size_t d = 0; d < n; ++d)
                if (mask & block_bit(d)) {
                    if (!placed[d]) ready = false;
                    lvl = std::max(lvl, level[d] + 1);
                }
            if (ready) {
                level[b] = lvl;
                placed[b] = 1;
            }
        }
    std::vector<BlockInfoEntry> entries;
    std::vector<std::string> names;
    for (std::size_t b = 0; b < n; ++b) {
        auto e = t.entry(b);
        e.dependency = PriorityDependency{level[b]};
        entries.push_back(e);
        names.push_back(t.name(b));
    }
    return BlockInfoTable(DependencyKind::Priority, std::move(entries), std::move(names));
}

BlockInfoTable to_direct_table(const BlockInfoTable& t)
{
    if (t.kind() == DependencyKind::Direct) return t;
    const std::size_t n = t.size();
    std::vector<BlockInfoEntry> entries;
    std::vector<std::string> names;
    for (std::size_t b = 0; b < n; ++b) {
        const auto lvl = t.priority(b);
        std::int64_t below = -1;
        for (std::size_t o = 0; o < n; ++o)
            if (t.priority(o) < lvl) below = std::max<std::int64_t>(below, t.priority(o));
        BlockMask mask = 0;
        if (below >= 0)
            for (std::size_t o = 0; o < n; ++o)
                if (t.priority(o) == static_cast<std::uint32_t>(below)) mask |= block_bit(o);
        auto e = t.entry(b);
        e.dependency = DirectDependency{mask};
        entries.push_back(e);
        names.push_back(t.name(b));
    }
    return BlockInfoTable(DependencyKind::Direct, std::move(entries), std::move(names));
}

bool deps_satisfied(const BlockInfoTable& t, BlockMask done, std::uint32_t counter, std::size_t b)
{
    if (t.kind() == DependencyKind::Direct) return (t.direct_mask(b) & ~done) == 0;
    return t.priority(b) == counter;
}

std::uint32_t advance_priority_counter(const BlockInfoTable& t, std::span<const BlockStatus> statuses,
                                       std::uint32_t counter)
{
    if (t.empty() || counter > t.max_priority()) return counter;
    for (std::size_t b = 0; b < t.size(); ++b)
        if (t.priority(b) == counter && statuses[b] != BlockStatus::Done) return counter;
    return counter + 1;
}

}  // namespace qcp
