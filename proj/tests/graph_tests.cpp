#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "neardiag/errors.hpp"
#include "neardiag/graph.hpp"
#include "neardiag/rng.hpp"
#include "neardiag/schur.hpp"
#include "support/oracles.hpp"

using namespace neardiag;
namespace oracle = neardiag::testing;

namespace {

WeightedDigraph graph2(double w01, double w10) {
    return WeightedDigraph(2, {0.0, w01, w10, 0.0});
}

double rowsum_residual(const LaplacianMatrix& l) {
    double worst = 0.0;
    for (std::size_t i = 0; i < l.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < l.size(); ++j) row += l.entry(i, j);
        worst = std::max(worst, std::abs(row));
    }
    return worst;
}

std::size_t zero_eigenvalue_multiplicity(const LaplacianMatrix& l) {
    const double tol = 1e-7 * (1.0 + l.frob_norm());
    std::size_t count = 0;
    for (const cplx& ev : eigenvalues(l.to_complex()))
        if (std::abs(ev) <= tol) ++count;
    return count;
}

}  // namespace

TEST_CASE("WeightedDigraph: validation and self-loop zeroing") {
    CHECK_THROWS_AS(WeightedDigraph(2, {0.0, -1.0, 0.0, 0.0}), invalid_input);
    CHECK_THROWS_AS(WeightedDigraph(2, {0.0, 1.0}), invalid_input);
    CHECK_THROWS_AS(WeightedDigraph(0, {}), invalid_input);
    const WeightedDigraph g(2, {5.0, 1.0, 2.0, 7.0});
    CHECK(g.weight(0, 0) == 0.0);
    CHECK(g.weight(1, 1) == 0.0);
    CHECK(g.weight(0, 1) == 1.0);
}

TEST_CASE("laplacian: hand examples") {
    const LaplacianMatrix l = laplacian(graph2(1.0, 1.0));
    CHECK(l.entry(0, 0) == 1.0);
    CHECK(l.entry(0, 1) == -1.0);
    CHECK(l.entry(1, 0) == -1.0);
    CHECK(l.entry(1, 1) == 1.0);

    const LaplacianMatrix zz = laplacian(WeightedDigraph(3, RealVector(9, 0.0)));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(zz.entry(i, j) == 0.0);

    const WeightedDigraph g(3, {0, 2, 0, 0, 0, 3, 1, 0, 0});
    const LaplacianMatrix l3 = laplacian(g);
    const RealVector expect{2, -2, 0, 0, 3, -3, -1, 0, 1};
    for (std::size_t k = 0; k < 9; ++k) CHECK(l3.entries()[k] == expect[k]);
    CHECK(rowsum_residual(l3) <= 1e-12 * std::max(1.0, l3.frob_norm()));
}

TEST_CASE("laplacian: ones vector stays in the kernel for random graphs") {
    Rng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 2 + rep % 7;
        const LaplacianMatrix l = laplacian(oracle::random_digraph(rng, n, 0.4, 0.1, 3.0));
        CHECK(rowsum_residual(l) <= 1e-12 * std::max(1.0, l.frob_norm()));
    }
}

TEST_CASE("LaplacianMatrix: direct construction validates row sums") {
    CHECK_THROWS_AS(LaplacianMatrix(2, {1.0, -0.5, 0.0, 0.0}), invalid_input);
    const LaplacianMatrix ok(2, {1.0, -1.0, -2.0, 2.0});
    CHECK(ok.entry(1, 0) == -2.0);
}

TEST_CASE("has_spanning_tree: hand examples") {
    // Path 1 -> 2 -> 3: agent 2 hears 1 (w21 > 0), agent 3 hears 2.
    const WeightedDigraph path(3, {0, 0, 0, 1, 0, 0, 0, 1, 0});
    CHECK(has_spanning_tree(path));

    const WeightedDigraph isolated(2, {0, 0, 0, 0});
    CHECK_FALSE(has_spanning_tree(isolated));

    // Two mutually closed pairs cannot agree.
    const WeightedDigraph pairs(4, {0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0});
    CHECK_FALSE(has_spanning_tree(pairs));
}

TEST_CASE("has_spanning_tree agrees with the simple-zero-eigenvalue oracle") {
    Rng rng(17);
    int connected = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rep % 5;  // up to 6 vertices
        const WeightedDigraph g = oracle::random_digraph(rng, n, 0.35, 0.2, 2.0);
        const bool tree = has_spanning_tree(g);
        if (tree) ++connected;
        CHECK(tree == (zero_eigenvalue_multiplicity(laplacian(g)) == 1));
    }
    CHECK(connected > 20);  // the sample covers both outcomes
    CHECK(connected < 180);
}

TEST_CASE("graph_at: segment selection and bounds") {
    std::vector<ScheduleSegment> segs;
    segs.push_back({0.0, graph2(1.0, 1.0)});
    const TopologySchedule single(segs, 20.0);
    CHECK(single.graph_at(5.0).weight(0, 1) == 1.0);
    CHECK(single.graph_at(20.0).weight(0, 1) == 1.0);
    CHECK_THROWS_AS(single.graph_at(-1.0), invalid_input);
    CHECK_THROWS_AS(single.graph_at(21.0), invalid_input);

    segs.push_back({10.0, graph2(2.0, 2.0)});
    const TopologySchedule two(segs, 30.0);
    CHECK(two.graph_at(9.999).weight(0, 1) == 1.0);
    CHECK(two.graph_at(10.0).weight(0, 1) == 2.0);  // left-closed boundary
    CHECK(two.graph_at(30.0).weight(0, 1) == 2.0);
}

TEST_CASE("TopologySchedule: validation") {
    std::vector<ScheduleSegment> segs;
    segs.push_back({1.0, graph2(1.0, 1.0)});
    CHECK_THROWS_AS(TopologySchedule(segs, 10.0), invalid_input);  // must start at 0

    segs.clear();
    segs.push_back({0.0, graph2(1.0, 1.0)});
    segs.push_back({0.0, graph2(2.0, 2.0)});
    CHECK_THROWS_AS(TopologySchedule(segs, 10.0), invalid_input);  // strictly increasing

    segs.clear();
    segs.push_back({0.0, graph2(1.0, 1.0)});
    segs.push_back({5.0, WeightedDigraph(3, RealVector(9, 0.0))});
    CHECK_THROWS_AS(TopologySchedule(segs, 10.0), invalid_input);  // mixed orders

    segs.clear();
    segs.push_back({0.0, graph2(1.0, 1.0)});
    CHECK_THROWS_AS(TopologySchedule(segs, 0.0), invalid_input);  // empty horizon
}

TEST_CASE("spanning_tree_gap_intervals: merging and boundaries") {
    const WeightedDigraph conn = graph2(1.0, 1.0);
    const WeightedDigraph disc(2, {0.0, 0.0, 0.0, 0.0});

    std::vector<ScheduleSegment> segs{{0.0, conn}};
    CHECK(spanning_tree_gap_intervals(TopologySchedule(segs, 30.0)).empty());

    segs = {{0.0, conn}, {10.0, disc}, {20.0, conn}};
    const auto gaps = spanning_tree_gap_intervals(TopologySchedule(segs, 30.0));
    REQUIRE(gaps.size() == 1);
    CHECK(gaps[0].t_start == 10.0);
    CHECK(gaps[0].t_end == 20.0);

    // Adjacent disconnected segments merge.
    const WeightedDigraph disc2(2, {0.0, 0.0, 0.0, 0.0});
    segs = {{0.0, conn}, {10.0, disc}, {20.0, disc2}, {30.0, conn}};
    const auto merged = spanning_tree_gap_intervals(TopologySchedule(segs, 40.0));
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].t_start == 10.0);
    CHECK(merged[0].t_end == 30.0);

    // A disconnected tail runs to the horizon.
    segs = {{0.0, conn}, {10.0, disc}};
    const auto tail = spanning_tree_gap_intervals(TopologySchedule(segs, 50.0));
    REQUIRE(tail.size() == 1);
    CHECK(tail[0].t_end == 50.0);
}
