#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>

#include "tnsynth/dsl.hpp"
#include "tnsynth/errors.hpp"
#include "../support/oracles.hpp"

using namespace tnsynth;

namespace {

Partition part(std::initializer_list<IndexId> block, const std::vector<IndexId>& universe) {
    return Partition::canonical(std::vector<IndexId>(block), universe);
}

const std::vector<IndexId> kU4{0, 1, 2, 3};

Program fig2_program(int r1, int r2, int r3) {
    Program p;
    p.exprs.push_back(Expr{part({0}, kU4), r1});
    p.exprs.push_back(Expr{part({0, 1}, kU4), r2});
    p.exprs.push_back(Expr{part({1}, kU4), r3});
    return p;
}

std::multiset<std::vector<IndexId>> partition_blocks(const TensorNetwork& g) {
    return oracles::edge_partition_set(g);
}

}  // namespace

TEST_CASE("empty program is the identity") {
    const Tensor t = oracles::random_tensor({3, 3, 3, 3}, 1);
    ExecState s0 = ExecState::initial(t, 0.25);
    const double budget = s0.budget_sq;
    const ProgramResult res = exec_program(Program{}, std::move(s0));
    REQUIRE(res.ok());
    CHECK(res.state->budget_sq == budget);
    CHECK(res.state->network.node_count() == 1);
    CHECK(oracles::rel_diff(contract_all(res.state->network), t) == 0.0);
}

TEST_CASE("three-split program produces the expected four-node topology") {
    const Tensor t = oracles::random_tensor({3, 4, 3, 4}, 3);
    // Generous ranks: no truncation anywhere.
    const ProgramResult res = exec_program(fig2_program(100, 100, 100),
                                           ExecState::initial(t, 1e-8));
    REQUIRE(res.ok());
    const TensorNetwork& g = res.state->network;
    validate_network(g);
    CHECK(g.node_count() == 4);

    const std::multiset<std::vector<IndexId>> expect{
        part({0}, kU4).block(), part({0, 1}, kU4).block(), part({1}, kU4).block()};
    CHECK(partition_blocks(g) == expect);
    CHECK(oracles::rel_diff(contract_all(g), t) <= 1e-10);

    // Matches the abstract tree of the same blocks.
    const auto topo = topology_from_sketch(
        [&] {
            Sketch s;
            int h = 0;
            for (const auto& e : fig2_program(1, 1, 1).exprs)
                s.exprs.push_back(Expr{e.block, Hole{h++}});
            std::sort(s.exprs.begin(), s.exprs.end(),
                      [](const Expr& a, const Expr& b) { return a.block < b.block; });
            return s;
        }(),
        t.indices());
    CHECK(topo.nodes.size() == g.node_count());
}

TEST_CASE("demanding a too-small rank with no budget fails") {
    const Tensor t = oracles::random_tensor({4, 4, 4, 4}, 5);
    Program p;
    p.exprs.push_back(Expr{part({0}, kU4), 4});
    p.exprs.push_back(Expr{part({0, 1}, kU4), 1});

    // Oracle: the {I1,I2} matricization of a random tensor has sigma_2 > 0,
    // so rank 1 is infeasible at budget 0.
    const MatricizedTensor m = matricize(t, {0, 1});
    const Vector sv = singular_values(m.mat);
    REQUIRE(sv[1] > 1e-6);

    const ProgramResult res = exec_program(p, ExecState::initial(t, 1e-12));
    CHECK_FALSE(res.ok());
    CHECK(res.failed_index == 1);
}

TEST_CASE("exec_osplit splits a single node into two") {
    const Tensor t = oracles::random_tensor({3, 3, 3, 3}, 7);
    auto st = exec_osplit(ExecState::initial(t, 1e-8), part({0}, kU4), 50);
    REQUIRE(st.has_value());
    const TensorNetwork& g = st->network;
    validate_network(g);
    CHECK(g.node_count() == 2);
    REQUIRE(g.edges().size() == 1);
    CHECK(edge_partition(g, g.edges().front().index.id) == part({0}, kU4));
    CHECK(oracles::rel_diff(contract_all(g), t) <= 1e-10);
}

TEST_CASE("crossing partitions cannot be realized") {
    const Tensor t = oracles::random_tensor({3, 3, 3, 3}, 9);
    auto st = exec_osplit(ExecState::initial(t, 0.3), part({0, 1}, kU4), 50);
    REQUIRE(st.has_value());
    auto st2 = exec_osplit(std::move(*st), part({0, 2}, kU4), 50);
    CHECK_FALSE(st2.has_value());
}

TEST_CASE("a split realizing an existing partition is a no-op") {
    const Tensor t = oracles::random_tensor({3, 3, 3, 3}, 11);
    auto st = exec_osplit(ExecState::initial(t, 0.3), part({0}, kU4), 50);
    REQUIRE(st.has_value());
    const double budget = st->budget_sq;
    const std::size_t nodes = st->network.node_count();

    // Same partition, specified by the other side as well.
    for (const auto block : {part({0}, kU4), part({1, 2, 3}, kU4)}) {
        auto again = exec_osplit(*st, block, 7);
        REQUIRE(again.has_value());
        CHECK(again->budget_sq == budget);
        CHECK(again->network.node_count() == nodes);
        CHECK(partition_blocks(again->network) == partition_blocks(st->network));
    }
}

TEST_CASE("exec_isplit on an exact rank-2 matrix") {
    // diag(3, 2) as a 2x2 tensor: sigma = (3, 2) by the SVD oracle.
    Tensor t = Tensor::zeros({Index{0, "I1", 2}, Index{1, "I2", 2}});
    t.mutable_data()[0] = 3.0;
    t.mutable_data()[3] = 2.0;

    const Vector sv = singular_values(matricize(t, {0}).mat);
    REQUIRE(sv[0] == doctest::Approx(3.0));
    REQUIRE(sv[1] == doctest::Approx(2.0));
    const double sigma2_sq = sv[1] * sv[1];

    ExecState s0;
    s0.network = TensorNetwork::single_node(t);
    s0.data_norm = frobenius_norm(t);
    s0.budget_sq = 0.0;

    // r = 2, budget 0: succeeds with edge rank 2.
    auto ok = exec_isplit(s0, 0, {0}, 2);
    REQUIRE(ok.has_value());
    CHECK(ok->network.node_count() == 2);
    REQUIRE(ok->network.edges().size() == 1);
    CHECK(ok->network.edges().front().index.size == 2);
    CHECK(ok->budget_sq == 0.0);

    // r = 1, budget 0: fails.
    CHECK_FALSE(exec_isplit(s0, 0, {0}, 1).has_value());

    // r = 1, budget sigma2^2: succeeds and spends exactly sigma2^2.
    ExecState s1 = s0;
    s1.budget_sq = sigma2_sq;
    auto trunc = exec_isplit(s1, 0, {0}, 1);
    REQUIRE(trunc.has_value());
    CHECK(trunc->network.edges().front().index.size == 1);
    CHECK(trunc->budget_sq == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("valid_extension implements the laminar rules") {
    Sketch s;
    s.exprs.push_back(Expr{part({0, 1}, kU4), Hole{0}});
    CHECK_FALSE(valid_extension(s, part({0, 2}, kU4)));

    Sketch s2;
    s2.exprs.push_back(Expr{part({0}, kU4), Hole{0}});
    CHECK(valid_extension(s2, part({0, 1}, kU4)));
    CHECK_FALSE(valid_extension(s2, part({0}, kU4)));
    // The complement is the same partition, so it is also a duplicate.
    CHECK_FALSE(valid_extension(s2, part({1, 2, 3}, kU4)));
}

TEST_CASE("fill replaces holes and validates coverage") {
    const Program complete = fig2_program(2, 3, 4);
    CHECK(programs_equivalent(fill(complete, {}), complete));

    Sketch sk;
    sk.exprs.push_back(Expr{part({0}, kU4), Hole{0}});
    sk.exprs.push_back(Expr{part({0, 1}, kU4), Hole{1}});
    sk.exprs.push_back(Expr{part({1}, kU4), Hole{2}});
    const Program filled = fill(sk, {{0, 2}, {1, 3}, {2, 4}});
    CHECK(programs_equivalent(filled, fig2_program(2, 3, 4)));

    CHECK_THROWS_AS(fill(sk, {{0, 2}, {1, 3}}), std::invalid_argument);
}

TEST_CASE("programs of the same splits are equivalent and execute to isomorphic networks") {
    const Program p = fig2_program(100, 100, 100);
    Program reversed;
    reversed.exprs.assign(p.exprs.rbegin(), p.exprs.rend());
    CHECK(programs_equivalent(p, reversed));
    CHECK_FALSE(programs_equivalent(p, fig2_program(100, 100, 99)));

    const Tensor t = oracles::random_tensor({3, 4, 3, 4}, 13);
    const ProgramResult a = exec_program(p, ExecState::initial(t, 1e-8));
    const ProgramResult b = exec_program(reversed, ExecState::initial(t, 1e-8));
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK(partition_blocks(a.state->network) == partition_blocks(b.state->network));
    CHECK(oracles::networks_isomorphic(a.state->network, b.state->network));
}

TEST_CASE("two node-split orders that reach the same structure translate to one split set") {
    const Tensor t = oracles::random_tensor({3, 3, 3, 3}, 15);

    // First order: separate I1, then split {I3,I4} off the remainder.
    ExecState left = ExecState::initial(t, 1e-8);
    auto l1 = exec_isplit(std::move(left), 0, {0}, 100);
    REQUIRE(l1.has_value());
    NodeId big = 0;
    for (const auto& [n, tensor] : l1->network.nodes())
        if (tensor.has_index(2)) big = n;
    auto l2 = exec_isplit(std::move(*l1), big, {2, 3}, 100);
    REQUIRE(l2.has_value());

    // Second order: split {I1,I2} first, then separate I1.
    ExecState right = ExecState::initial(t, 1e-8);
    auto r1 = exec_isplit(std::move(right), 0, {0, 1}, 100);
    REQUIRE(r1.has_value());
    NodeId holder = 0;
    for (const auto& [n, tensor] : r1->network.nodes())
        if (tensor.has_index(0)) holder = n;
    auto r2 = exec_isplit(std::move(*r1), holder, {0}, 100);
    REQUIRE(r2.has_value());

    CHECK(partition_blocks(l2->network) == partition_blocks(r2->network));

    // The corresponding output-directed programs are equivalent.
    Program pa, pb;
    pa.exprs.push_back(Expr{part({0}, kU4), 3});
    pa.exprs.push_back(Expr{part({2, 3}, kU4), 9});
    pb.exprs.push_back(Expr{part({0, 1}, kU4), 9});
    pb.exprs.push_back(Expr{part({0}, kU4), 3});
    CHECK(programs_equivalent(pa, pb));
}

TEST_CASE("permutations of an exact-rank program keep identical ranks at zero budget") {
    const auto gt = oracles::make_four_node_network({5, 6, 5, 6}, {2, 3, 2}, 99);
    const Tensor data = contract_all(gt.network);

    Program p;
    p.exprs.push_back(Expr{part({0}, kU4), 2});
    p.exprs.push_back(Expr{part({0, 1}, kU4), 3});
    p.exprs.push_back(Expr{part({1}, kU4), 2});

    std::vector<std::size_t> order{0, 1, 2};
    std::optional<std::multiset<std::size_t>> ranks;
    do {
        Program shuffled;
        for (std::size_t ix : order) shuffled.exprs.push_back(p.exprs[ix]);
        // Exact data: the discarded tails are numerically zero, so a tiny
        // budget admits the true ranks in any order.
        const ProgramResult res = exec_program(shuffled, ExecState::initial(data, 1e-10));
        REQUIRE(res.ok());
        std::multiset<std::size_t> got;
        for (const auto& e : res.state->network.edges()) got.insert(e.index.size);
        if (!ranks) ranks = got;
        CHECK(got == *ranks);
    } while (std::next_permutation(order.begin(), order.end()));
    CHECK(*ranks == std::multiset<std::size_t>{2, 2, 3});
}

TEST_CASE("failure propagates past later expressions") {
    const Tensor t = oracles::random_tensor({3, 3, 3, 3}, 17);
    Program p;
    p.exprs.push_back(Expr{part({0, 1}, kU4), 50});
    p.exprs.push_back(Expr{part({0, 2}, kU4), 50});   // invalid crossing
    p.exprs.push_back(Expr{part({0}, kU4), 50});      // never reached
    const ProgramResult res = exec_program(p, ExecState::initial(t, 0.3));
    CHECK_FALSE(res.ok());
    CHECK(res.failed_index == 1);
}

TEST_CASE("free indices are conserved through execution") {
    const Tensor t = oracles::random_tensor({3, 4, 3, 4}, 19);
    ExecState st = ExecState::initial(t, 0.2);
    const auto want = st.network.free_index_ids();
    for (const auto& e : fig2_program(20, 20, 20).exprs) {
        auto next = exec_osplit(std::move(st), e.block, rank_value(e.rank));
        REQUIRE(next.has_value());
        st = std::move(*next);
        CHECK(st.network.free_index_ids() == want);
        validate_network(st.network);
    }
}

TEST_CASE("error accounting matches the measured reconstruction error") {
    // After a successful run, |N(G) - T|^2 stays within the spent budget.
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const Tensor t = oracles::random_tensor({6, 6, 6, 6}, 100 + seed);
        const double eps = 0.5;
        const double norm = frobenius_norm(t);
        const double full = eps * eps * norm * norm;

        // A feasible completion of the three-block sketch truncates hard on
        // incompressible data, so real budget is spent.
        Sketch sk;
        sk.exprs.push_back(Expr{part({0}, kU4), Hole{0}});
        sk.exprs.push_back(Expr{part({1}, kU4), Hole{1}});
        sk.exprs.push_back(Expr{part({0, 1}, kU4), Hole{2}});
        SpectrumTable table(t);
        auto completion = complete_sketch(sk, t.indices(), table, eps, 0.1, std::nullopt,
                                          RankStrategy::Constraint);
        REQUIRE(completion.has_value());

        const ProgramResult res = exec_program(completion->program, ExecState::initial(t, eps));
        REQUIRE(res.ok());

        const double spent = full - res.state->budget_sq;
        CHECK(spent > 0.0);
        const double err = oracles::rel_diff(contract_all(res.state->network), t) * norm;
        CHECK(err * err <= spent + 1e-9 * norm * norm);
    }
}

TEST_CASE("intermediate singular values never exceed the data tensor's") {
    // Ascending-index comparison at every prefix state for every block in
    // the program, on random order-4 tensors. Ranks come from a feasible
    // completion; the singular-value bound itself is checked independently.
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const Tensor t = oracles::random_tensor({5, 5, 5, 5}, 200 + seed);
        const double norm = frobenius_norm(t);
        const double eps = 0.5;

        Sketch sk;
        sk.exprs.push_back(Expr{part({0}, kU4), Hole{0}});
        sk.exprs.push_back(Expr{part({1}, kU4), Hole{1}});
        sk.exprs.push_back(Expr{part({0, 1}, kU4), Hole{2}});
        SpectrumTable table(t);
        auto completion =
            complete_sketch(sk, t.indices(), table, eps, 0.1, std::nullopt, RankStrategy::Equal);
        REQUIRE(completion.has_value());

        std::map<std::vector<IndexId>, Vector> original;
        for (const auto& e : sk.exprs)
            original[e.block.block()] = singular_values(matricize(t, e.block.block()).mat);

        ExecState st = ExecState::initial(t, eps);
        for (const auto& e : completion->program.exprs) {
            // Check the prefix state G_{i-1} against every block.
            const Tensor prefix = contract_all(st.network);
            for (const auto& [block, ref] : original) {
                const Vector sv = singular_values(matricize(prefix, block).mat);
                REQUIRE(sv.size() == ref.size());
                for (Eigen::Index j = 0; j < sv.size(); ++j) CHECK(sv[j] <= ref[j] + 1e-8 * norm);
            }
            auto next = exec_osplit(std::move(st), e.block, rank_value(e.rank));
            REQUIRE(next.has_value());
            st = std::move(*next);
        }
    }
}

TEST_CASE("program text round trips") {
    const Tensor t = oracles::random_tensor({2, 3, 4, 5}, 29);
    const std::string text =
        "# comment line\n"
        "osplit {I1} rank=4\n"
        "osplit {I1,I2} rank=?\n"
        "\n"
        "osplit {I3, I4} rank=2   # trailing comment\n";
    const Program p = parse_program(text, t.indices());
    REQUIRE(p.exprs.size() == 3);
    CHECK(p.exprs[0].block == part({0}, kU4));
    CHECK(is_hole(p.exprs[1].rank));
    CHECK(p.exprs[2].block == part({2, 3}, kU4));

    const Program back = parse_program(print_program(p, t.indices()), t.indices());
    REQUIRE(back.exprs.size() == p.exprs.size());
    for (std::size_t i = 0; i < p.exprs.size(); ++i) {
        CHECK(back.exprs[i].block == p.exprs[i].block);
        CHECK(is_hole(back.exprs[i].rank) == is_hole(p.exprs[i].rank));
    }

    CHECK_THROWS_AS(parse_program("osplit {IX} rank=3\n", t.indices()), FileFormatError);
    CHECK_THROWS_AS(parse_program("osplit {I1} rank=0\n", t.indices()), FileFormatError);
    CHECK_THROWS_AS(parse_program("split {I1} rank=1\n", t.indices()), FileFormatError);
    CHECK_THROWS_AS(parse_program("osplit {I1,I2,I3,I4} rank=3\n", t.indices()),
                    FileFormatError);
}
