#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"
#include "specaug/graph.hpp"

using namespace specaug;

namespace {

std::string write_temp(const std::string& text) {
    std::string path =
        std::string("graph_test_") + std::to_string(std::rand()) + ".edges";
    std::ofstream out(path);
    out << text;
    return path;
}

Graph k3() { return make_graph(3, {{0, 1}, {1, 2}, {0, 2}}); }
Graph p3() { return make_graph(3, {{0, 1}, {1, 2}}); }

}  // namespace

TEST_CASE("load_graph parses edge lists") {
    std::string path = write_temp("0 1\n1 2\n");
    Graph g = load_graph(path, 3);
    CHECK(g.n == 3);
    CHECK(g.edge_count() == 2);
    CHECK(g.adjacency(0, 1) == 1.0);
    CHECK(g.adjacency(1, 2) == 1.0);
    CHECK(g.adjacency(0, 2) == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("load_graph deduplicates mirrored edges") {
    std::string path = write_temp("0 1\n1 0\n");
    LoadStats stats;
    Graph g = load_graph(path, 2, &stats);
    CHECK(g.edge_count() == 1);
    CHECK(stats.duplicates_merged == 1);
    std::remove(path.c_str());
}

TEST_CASE("load_graph drops self loops") {
    std::string path = write_temp("0 0\n0 1\n");
    LoadStats stats;
    Graph g = load_graph(path, 2, &stats);
    CHECK(g.edge_count() == 1);
    CHECK(stats.self_loops_dropped == 1);
    std::remove(path.c_str());
}

TEST_CASE("load_graph rejects malformed lines") {
    std::string path = write_temp("0 1\nnot an edge\n");
    CHECK_THROWS_AS(load_graph(path), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("complement direction marks removal and addition slots") {
    Graph edge = make_graph(2, {{0, 1}});
    ComplementDirection c = complement_direction(edge);
    CHECK(c.c(0, 1) == -1.0);
    CHECK(c.c(1, 0) == -1.0);

    Graph empty = make_graph(2, {});
    c = complement_direction(empty);
    CHECK(c.c(0, 1) == 1.0);
    CHECK(c.c(1, 0) == 1.0);

    c = complement_direction(k3());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(c.c(i, j) == (i == j ? 0.0 : -1.0));
}

TEST_CASE("degrees") {
    CHECK(degrees(k3()).isApprox(Vector::Constant(3, 2.0)));
    Vector dp3 = degrees(p3());
    CHECK(dp3(0) == 1.0);
    CHECK(dp3(1) == 2.0);
    CHECK(dp3(2) == 1.0);
    CHECK(degrees(make_graph(2, {})).isZero());
}

TEST_CASE("normalized laplacian fixtures") {
    Matrix l = normalized_laplacian(make_graph(2, {{0, 1}}));
    Matrix want(2, 2);
    want << 1, -1, -1, 1;
    CHECK(l.isApprox(want, 1e-12));

    l = normalized_laplacian(k3());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(l(i, j) == doctest::Approx(i == j ? 1.0 : -0.5));

    // isolated node under the degree floor: identity row
    Graph lone;
    lone.n = 1;
    lone.adjacency = Matrix::Zero(1, 1);
    CHECK(normalized_laplacian(lone)(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("unnormalized laplacian fixtures") {
    Matrix l = unnormalized_laplacian(make_graph(2, {{0, 1}}));
    Matrix want(2, 2);
    want << 1, -1, -1, 1;
    CHECK(l.isApprox(want, 1e-12));

    l = unnormalized_laplacian(k3());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(l(i, j) == doctest::Approx(i == j ? 2.0 : -1.0));

    Graph g = generate_sbm(20, 2, 0.5, 0.2, 5);
    CHECK(unnormalized_laplacian(g).rowwise().sum().isZero(1e-12));
}

TEST_CASE("apply_perturbation flips marked slots") {
    Graph edge = make_graph(2, {{0, 1}});
    ComplementDirection c = complement_direction(edge);
    PerturbationSample e;
    e.e = Matrix::Zero(2, 2);
    e.e(0, 1) = e.e(1, 0) = 1.0;
    Graph removed = apply_perturbation(edge, c, e);
    CHECK(removed.edge_count() == 0);

    Graph empty = make_graph(2, {});
    Graph added = apply_perturbation(empty, complement_direction(empty), e);
    CHECK(added.edge_count() == 1);

    e.e.setZero();
    CHECK(apply_perturbation(edge, c, e).adjacency.isApprox(edge.adjacency));
}

TEST_CASE("expected_view interpolates toward the complement") {
    Graph edge = make_graph(2, {{0, 1}});
    ComplementDirection c = complement_direction(edge);
    Matrix delta = Matrix::Zero(2, 2);
    CHECK(expected_view(edge, c, delta).isApprox(edge.adjacency));

    delta(0, 1) = delta(1, 0) = 0.3;
    CHECK(expected_view(edge, c, delta)(0, 1) == doctest::Approx(0.7));

    Graph empty = make_graph(2, {});
    CHECK(expected_view(empty, complement_direction(empty), delta)(0, 1) ==
          doctest::Approx(0.3));
}

TEST_CASE("sbm extremes give disjoint cliques") {
    Graph g = generate_sbm(4, 2, 1.0, 0.0, 3);
    REQUIRE(g.node_labels.has_value());
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            bool same = (*g.node_labels)[i] == (*g.node_labels)[j];
            CHECK(g.adjacency(i, j) == (same ? 1.0 : 0.0));
        }
}

TEST_CASE("sbm within-cluster edge count matches binomial moments") {
    Graph g = generate_sbm(60, 3, 0.5, 0.02, 7);
    REQUIRE(g.node_labels.has_value());
    double within = 0.0;
    for (int i = 0; i < 60; ++i)
        for (int j = i + 1; j < 60; ++j)
            if ((*g.node_labels)[i] == (*g.node_labels)[j])
                within += g.adjacency(i, j);
    const double trials = 3.0 * 20 * 19 / 2;  // 570 within-cluster slots
    const double mean = trials * 0.5;
    const double sigma = std::sqrt(trials * 0.5 * 0.5);
    CHECK(std::abs(within - mean) <= 4.0 * sigma);
}

TEST_CASE("generators are deterministic per seed") {
    Graph a = generate_sbm(40, 2, 0.4, 0.1, 11);
    Graph b = generate_sbm(40, 2, 0.4, 0.1, 11);
    CHECK(a.adjacency == b.adjacency);
    CHECK(*a.node_labels == *b.node_labels);

    Graph ga = generate_random_geometric(30, 0.3, 1);
    Graph gb = generate_random_geometric(30, 0.3, 1);
    CHECK(ga.adjacency == gb.adjacency);
}

TEST_CASE("geometric radius extremes") {
    Graph full = generate_random_geometric(12, std::sqrt(2.0), 2);
    CHECK(full.edge_count() == 66);
    Graph none = generate_random_geometric(12, 1e-12, 2);
    CHECK(none.edge_count() == 0);
}

TEST_CASE("geometric edges match brute-force distance check") {
    Graph g = generate_random_geometric(30, 0.3, 1);
    REQUIRE(g.positions.has_value());
    for (int i = 0; i < 30; ++i)
        for (int j = i + 1; j < 30; ++j) {
            double d = (g.positions->row(i) - g.positions->row(j)).norm();
            CHECK(g.adjacency(i, j) == (d <= 0.3 ? 1.0 : 0.0));
        }
}

TEST_CASE("edge list round trip") {
    Graph g = generate_sbm(25, 2, 0.4, 0.1, 9);
    std::string path = write_temp("");
    save_edge_list(g, path);
    Graph back = load_graph(path, 25);
    CHECK(back.adjacency == g.adjacency);
    std::remove(path.c_str());
}

TEST_CASE("validate rejects broken invariants") {
    Graph g = k3();
    g.adjacency(0, 1) = 0.5;  // asymmetric
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    g = k3();
    g.adjacency(0, 0) = 1.0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    g = k3();
    g.adjacency(0, 1) = g.adjacency(1, 0) = 1.5;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    CHECK_NOTHROW(k3().validate());
}
