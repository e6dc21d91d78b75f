#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "tnsynth/sketch.hpp"
#include "../support/oracles.hpp"

using namespace tnsynth;

namespace {

std::vector<Index> modes(const std::vector<std::size_t>& dims) {
    std::vector<Index> out;
    for (std::size_t i = 0; i < dims.size(); ++i)
        out.push_back(Index{static_cast<IndexId>(i), "I" + std::to_string(i + 1), dims[i]});
    return out;
}

}  // namespace

TEST_CASE("canonical partition counts and order") {
    CHECK(canonical_partitions(modes({2, 2, 2})).size() == 3);
    CHECK(canonical_partitions(modes({2, 2, 2, 2})).size() == 7);
    CHECK(canonical_partitions(modes({2, 2, 2, 2, 2, 2})).size() == 31);

    const auto parts = canonical_partitions(modes({2, 2, 2, 2}));
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) CHECK(parts[i] < parts[i + 1]);
    // Canonical blocks never contain the smallest free id.
    for (const auto& p : parts) CHECK_FALSE(ids::contains(p.block(), 0));
}

TEST_CASE("sketch enumeration at order four yields exactly 63 sketches") {
    const auto sketches = enumerate_sketches(SketchSpace{modes({16, 18, 20, 22}), 6});
    CHECK(sketches.size() == 63);
    // Cross-checked by the raw-set brute-force oracle.
    CHECK(oracles::brute_force_sketch_count(modes({16, 18, 20, 22}), 6) == 63);
}

TEST_CASE("sketch enumeration at order three yields the seven laminar families") {
    const auto sketches = enumerate_sketches(SketchSpace{modes({2, 3, 4}), 10});
    CHECK(sketches.size() == 7);
    std::size_t singles = 0, pairs = 0, triples = 0;
    for (const auto& s : sketches) {
        if (s.size() == 1) ++singles;
        if (s.size() == 2) ++pairs;
        if (s.size() == 3) ++triples;
    }
    CHECK(singles == 3);
    CHECK(pairs == 3);
    CHECK(triples == 1);
}

TEST_CASE("enumeration is duplicate-free and matches brute force for d in 3..5") {
    for (const std::size_t d : {3u, 4u, 5u}) {
        std::vector<std::size_t> dims(d, 2);
        const int cap = max_realizable_splits(d);
        const auto sketches = enumerate_sketches(SketchSpace{modes(dims), cap});

        std::set<std::vector<std::vector<IndexId>>> seen;
        for (const auto& s : sketches) {
            std::vector<std::vector<IndexId>> key;
            for (const auto& e : s.exprs) key.push_back(e.block.block());
            CHECK(seen.insert(key).second);
        }
        CHECK(sketches.size() == oracles::brute_force_sketch_count(modes(dims), cap));
    }
}

TEST_CASE("max_splits caps the family size and is clamped") {
    const auto capped = enumerate_sketches(SketchSpace{modes({2, 2, 2, 2}), 2});
    for (const auto& s : capped) CHECK(s.size() <= 2);
    // Oversized budgets clamp to 2d-3 without changing the result.
    const auto a = enumerate_sketches(SketchSpace{modes({2, 2, 2, 2}), 5});
    const auto b = enumerate_sketches(SketchSpace{modes({2, 2, 2, 2}), 50});
    CHECK(a.size() == b.size());
}

TEST_CASE("every sketch extends validly expression by expression") {
    for (const auto& s : enumerate_sketches(SketchSpace{modes({2, 2, 2, 2, 2}), 7})) {
        Sketch prefix;
        for (const auto& e : s.exprs) {
            CHECK(valid_extension(prefix, e.block));
            prefix.exprs.push_back(e);
        }
        // Holes are fresh and unique.
        std::set<int> hole_ids;
        for (const auto& e : prefix.exprs) {
            REQUIRE(is_hole(e.rank));
            CHECK(hole_ids.insert(std::get<Hole>(e.rank).id).second);
        }
    }
}

TEST_CASE("a single split denotes a two-node tree") {
    const auto free = modes({2, 3, 4, 5});
    std::vector<IndexId> universe{0, 1, 2, 3};
    Sketch s;
    s.exprs.push_back(Expr{Partition::canonical({0}, universe), Hole{0}});
    const AbstractTopology topo = topology_from_sketch(s, free);
    REQUIRE(topo.nodes.size() == 2);
    REQUIRE(topo.edges.size() == 1);
    CHECK(topo.edges[0].partition == Partition::canonical({0}, universe));

    std::multiset<std::vector<IndexId>> attachments;
    for (const auto& n : topo.nodes) attachments.insert(n.free_ids);
    const std::multiset<std::vector<IndexId>> expect{{0}, {1, 2, 3}};
    CHECK(attachments == expect);
}

TEST_CASE("the three-block sketch denotes the four-node tree") {
    const auto free = modes({2, 3, 4, 5});
    std::vector<IndexId> universe{0, 1, 2, 3};
    Sketch s;
    s.exprs.push_back(Expr{Partition::canonical({1}, universe), Hole{0}});
    s.exprs.push_back(Expr{Partition::canonical({0}, universe), Hole{1}});
    s.exprs.push_back(Expr{Partition::canonical({0, 1}, universe), Hole{2}});
    const AbstractTopology topo = topology_from_sketch(s, free);
    REQUIRE(topo.nodes.size() == 4);
    REQUIRE(topo.edges.size() == 3);

    // Attachments: {I1}, {I2}, {I3,I4} leaves and one internal node.
    std::multiset<std::vector<IndexId>> attachments;
    for (const auto& n : topo.nodes) attachments.insert(n.free_ids);
    const std::multiset<std::vector<IndexId>> expect{{0}, {1}, {2, 3}, {}};
    CHECK(attachments == expect);

    // The internal node touches all three edges.
    for (const auto& n : topo.nodes)
        if (n.free_ids.empty()) CHECK(n.edge_ixs.size() == 3);
}

TEST_CASE("executed topology equals the predicted topology on random sketches") {
    Rng rng(77);
    const auto free = modes({3, 2, 3, 2, 3});
    const auto all = enumerate_sketches(SketchSpace{free, 7});
    const Tensor t = oracles::random_tensor({3, 2, 3, 2, 3}, 123);

    for (int trial = 0; trial < 20; ++trial) {
        const Sketch& s = all[rng.uniform(0, all.size() - 1)];
        const AbstractTopology topo = topology_from_sketch(s, free);

        // Execute a generous completion: no truncation.
        std::map<int, int> generous;
        for (const auto& e : s.exprs) generous[std::get<Hole>(e.rank).id] = 1000000;
        const ProgramResult res = exec_program(fill(s, generous), ExecState::initial(t, 1e-8));
        REQUIRE(res.ok());
        const TensorNetwork& g = res.state->network;

        CHECK(g.node_count() == topo.nodes.size());
        std::multiset<std::vector<IndexId>> predicted;
        for (const auto& e : topo.edges) predicted.insert(e.partition.block());
        CHECK(oracles::edge_partition_set(g) == predicted);
    }
}

TEST_CASE("denoted trees satisfy the tree invariant with distinct partitions") {
    const auto free = modes({2, 2, 2, 2, 2});
    for (const auto& s : enumerate_sketches(SketchSpace{free, 7})) {
        const AbstractTopology topo = topology_from_sketch(s, free);
        CHECK(topo.edges.size() + 1 == topo.nodes.size());
        std::set<std::vector<IndexId>> parts;
        for (const auto& e : topo.edges) CHECK(parts.insert(e.partition.block()).second);
        // Every mode is attached exactly once.
        std::vector<IndexId> attached;
        for (const auto& n : topo.nodes)
            attached.insert(attached.end(), n.free_ids.begin(), n.free_ids.end());
        ids::sort_unique(attached);
        CHECK(attached.size() == free.size());
    }
}

TEST_CASE("topology_from_sketch rejects invalid families") {
    const auto free = modes({2, 2, 2, 2});
    std::vector<IndexId> universe{0, 1, 2, 3};
    Sketch dup;
    dup.exprs.push_back(Expr{Partition::canonical({1}, universe), Hole{0}});
    dup.exprs.push_back(Expr{Partition::canonical({0, 2, 3}, universe), Hole{1}});
    CHECK_THROWS_AS(topology_from_sketch(dup, free), std::invalid_argument);

    Sketch crossing;
    crossing.exprs.push_back(Expr{Partition::canonical({0, 1}, universe), Hole{0}});
    crossing.exprs.push_back(Expr{Partition::canonical({0, 2}, universe), Hole{1}});
    CHECK_THROWS_AS(topology_from_sketch(crossing, free), std::invalid_argument);
}
