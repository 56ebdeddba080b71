#include <doctest.h>

#include "qcp/program.hpp"
#include "qcp/qpu.hpp"

#include <algorithm>
#include <functional>
#include <set>

using namespace qcp;

namespace {

// One END per block; `deps[b]` lists earlier blocks, so the graph is acyclic.
Program dag_program(const std::vector<std::vector<int>>& deps)
{
    Program p;
    p.qubit_count = 1;
    for (std::size_t b = 0; b < deps.size(); ++b) {
        BlockDirective d;
        d.name = "b" + std::to_string(b);
        d.pc_start = d.pc_end = static_cast<std::uint32_t>(b);
        for (int o : deps[b]) d.deps.push_back("b" + std::to_string(o));
        p.blocks.push_back(d);
        p.instructions.push_back(Instruction::end());
    }
    return p;
}

Program level_program(const std::vector<std::uint32_t>& levels)
{
    Program p;
    p.qubit_count = 1;
    for (std::size_t b = 0; b < levels.size(); ++b) {
        BlockDirective d;
        d.name = "b" + std::to_string(b);
        d.pc_start = d.pc_end = static_cast<std::uint32_t>(b);
        d.priority = levels[b];
        p.blocks.push_back(d);
        p.instructions.push_back(Instruction::end());
    }
    return p;
}

std::vector<std::vector<int>> random_dag(SplitMix64& rng, int n, double edge_p)
{
    std::vector<std::vector<int>> deps(n);
    for (int b = 0; b < n; ++b)
        for (int o = 0; o < b; ++o)
            if (rng.uniform() < edge_p) deps[b].push_back(o);
    return deps;
}

// Every sequence in which blocks can complete one at a time under `t`'s own rules.
std::set<std::vector<std::uint32_t>> completion_orders(const BlockInfoTable& t)
{
    std::set<std::vector<std::uint32_t>> out;
    std::vector<BlockStatus> st(t.size(), BlockStatus::Wait);
    std::vector<std::uint32_t> order;
    std::function<void(BlockMask, std::uint32_t)> rec = [&](BlockMask done, std::uint32_t counter) {
        if (order.size() == t.size()) {
            out.insert(order);
            return;
        }
        for (std::size_t b = 0; b < t.size(); ++b) {
            if (st[b] == BlockStatus::Done || !deps_satisfied(t, done, counter, b)) continue;
            st[b] = BlockStatus::Done;
            order.push_back(static_cast<std::uint32_t>(b));
            auto c = counter;
            if (t.kind() == DependencyKind::Priority)
                for (auto n = advance_priority_counter(t, st, c); n != c; n = advance_priority_counter(t, st, c)) c = n;
            rec(done | block_bit(b), c);
            order.pop_back();
            st[b] = BlockStatus::Wait;
        }
    };
    std::uint32_t c0 = 0;
    if (t.kind() == DependencyKind::Priority)
        for (auto n = advance_priority_counter(t, st, c0); n != c0; n = advance_priority_counter(t, st, c0)) c0 = n;
    rec(0, c0);
    return out;
}

bool is_topological(const std::vector<std::vector<int>>& deps, const std::vector<std::uint32_t>& order)
{
    std::vector<int> pos(deps.size());
    for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = static_cast<int>(k);
    for (std::size_t b = 0; b < deps.size(); ++b)
        for (int o : deps[b])
            if (pos[o] > pos[b]) return false;
    return true;
}

}  // namespace

TEST_SUITE("program")
{
    TEST_CASE("direct table masks follow the named dependencies")
    {
        const auto t = build_table(dag_program({{}, {0}, {0, 1}}));
        CHECK(t.kind() == DependencyKind::Direct);
        CHECK(t.direct_mask(0) == 0);
        CHECK(t.direct_mask(1) == 0b1);
        CHECK(t.direct_mask(2) == 0b11);
        CHECK(t.name(2) == "b2");
        CHECK(t.entry(1).length() == 1);
    }

    TEST_CASE("table construction rejects bad programs")
    {
        auto dup = dag_program({{}, {}});
        dup.blocks[1].name = "b0";
        CHECK_THROWS_AS(build_table(dup), BuildError);

        auto cyc = dag_program({{}, {}});
        cyc.blocks[0].deps = {"b1"};
        cyc.blocks[1].deps = {"b0"};
        CHECK_THROWS_AS(build_table(cyc), BuildError);

        auto ghost = dag_program({{}});
        ghost.blocks[0].deps = {"nowhere"};
        CHECK_THROWS_AS(build_table(ghost), BuildError);

        auto mixed = level_program({0, 1});
        mixed.blocks[1].priority.reset();
        CHECK_THROWS_AS(build_table(mixed), BuildError);

        std::vector<std::vector<int>> many(65);
        CHECK_THROWS_AS(build_table(dag_program(many)), BuildError);
    }

    TEST_CASE("priority words pack start, end and level")
    {
        BlockInfoEntry e{3, 100, 2000, PriorityDependency{14}};
        const auto w = pack_priority_entry(e);
        CHECK((w >> 20) == 100);
        CHECK(((w >> 8) & 0xFFF) == 2000);
        CHECK((w & 0xFF) == 14);
        CHECK(unpack_priority_entry(3, w) == e);
        BlockInfoEntry too_far{0, 4096, 4097, PriorityDependency{0}};
        CHECK_THROWS(pack_priority_entry(too_far));
    }

    TEST_CASE("deps_satisfied agrees with a brute-force subset oracle")
    {
        SplitMix64 rng(42);
        for (int trial = 0; trial < 200; ++trial) {
            const int n = 1 + static_cast<int>(rng.next() % 12);
            const auto deps = random_dag(rng, n, 0.3);
            const auto t = build_table(dag_program(deps));
            for (int m = 0; m < 64; ++m) {
                const BlockMask done = rng.next() & ((BlockMask{1} << n) - 1);
                for (int b = 0; b < n; ++b) {
                    bool oracle = true;
                    for (int o : deps[b]) oracle = oracle && ((done >> o) & 1);
                    REQUIRE(deps_satisfied(t, done, 0, b) == oracle);
                }
            }
        }
    }

    TEST_CASE("priority counter fixed point is the lowest unfinished level")
    {
        SplitMix64 rng(7);
        for (int trial = 0; trial < 500; ++trial) {
            const int n = 1 + static_cast<int>(rng.next() % 10);
            std::vector<std::uint32_t> levels(n);
            for (auto& l : levels) l = static_cast<std::uint32_t>(rng.next() % 6);
            const auto t = build_table(level_program(levels));
            std::vector<BlockStatus> st(n);
            for (auto& s : st) s = (rng.next() & 1) ? BlockStatus::Done : BlockStatus::Wait;

            std::uint32_t c = 0;
            for (auto next = advance_priority_counter(t, st, c); next != c; next = advance_priority_counter(t, st, c))
                c = next;

            std::uint32_t oracle = t.max_priority() + 1;
            for (int b = 0; b < n; ++b)
                if (st[b] != BlockStatus::Done) oracle = std::min(oracle, levels[b]);
            REQUIRE(c == oracle);
        }
    }

    TEST_CASE("counter holds while its level has unfinished blocks and stops past the top")
    {
        const auto t = build_table(level_program({0, 0, 1}));
        std::vector<BlockStatus> st{BlockStatus::Done, BlockStatus::InExecution, BlockStatus::Wait};
        CHECK(advance_priority_counter(t, st, 0) == 0);
        st[1] = BlockStatus::Done;
        CHECK(advance_priority_counter(t, st, 0) == 1);
        st[2] = BlockStatus::Done;
        CHECK(advance_priority_counter(t, st, 1) == 2);
        CHECK(advance_priority_counter(t, st, 2) == 2);
    }

    TEST_CASE("longest-path levels")
    {
        // b0 -> b1 -> b3, b0 -> b2, b4 independent
        const auto t = to_priority_table(build_table(dag_program({{}, {0}, {0}, {1}, {}})));
        CHECK(t.kind() == DependencyKind::Priority);
        CHECK(t.priority(0) == 0);
        CHECK(t.priority(1) == 1);
        CHECK(t.priority(2) == 1);
        CHECK(t.priority(3) == 2);
        CHECK(t.priority(4) == 0);
        CHECK(t.distinct_priorities() == 3);
    }

    TEST_CASE("priority-scheduled orders are a subset of the direct orders")
    {
        SplitMix64 rng(99);
        for (int trial = 0; trial < 60; ++trial) {
            const int n = 1 + static_cast<int>(rng.next() % 6);
            const auto deps = random_dag(rng, n, 0.4);
            const auto direct = build_table(dag_program(deps));
            const auto direct_orders = completion_orders(direct);
            const auto prio_orders = completion_orders(to_priority_table(direct));
            REQUIRE_FALSE(prio_orders.empty());
            for (const auto& o : prio_orders) {
                REQUIRE(direct_orders.count(o) == 1);
                REQUIRE(is_topological(deps, o));
            }
            for (const auto& o : direct_orders) REQUIRE(is_topological(deps, o));
        }
    }

    TEST_CASE("complete-layer graphs have identical order sets in both forms")
    {
        SplitMix64 rng(5);
        for (int trial = 0; trial < 40; ++trial) {
            // Random layer sizes; each block depends on every block of the layer below.
            std::vector<std::vector<int>> deps;
            std::vector<int> prev;
            const int layers = 1 + static_cast<int>(rng.next() % 3);
            for (int l = 0; l < layers; ++l) {
                std::vector<int> cur;
                const int width = 1 + static_cast<int>(rng.next() % 3);
                for (int k = 0; k < width; ++k) {
                    cur.push_back(static_cast<int>(deps.size()));
                    deps.push_back(prev);
                }
                prev = cur;
            }
            const auto direct = build_table(dag_program(deps));
            const auto prio = to_priority_table(direct);
            REQUIRE(completion_orders(direct) == completion_orders(prio));
            // And back again.
            REQUIRE(completion_orders(to_direct_table(prio)) == completion_orders(direct));
        }
    }

    TEST_CASE("status names")
    {
        CHECK(status_name(BlockStatus::Wait) == "wait");
        CHECK(status_name(BlockStatus::InExecution) == "in_execution");
    }
}
