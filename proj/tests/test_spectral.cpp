#include <cmath>
#include <random>

#include "doctest.h"
#include "specaug/augment.hpp"
#include "specaug/graph.hpp"
#include "specaug/oracle.hpp"
#include "specaug/spectral.hpp"

using namespace specaug;

namespace {

Graph k3() { return make_graph(3, {{0, 1}, {1, 2}, {0, 2}}); }
Graph p3() { return make_graph(3, {{0, 1}, {1, 2}}); }
Graph path(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
    return make_graph(n, e);
}

}  // namespace

TEST_CASE("eig_full on closed-form Laplacians") {
    Matrix l(2, 2);
    l << 1, -1, -1, 1;
    EigenSystem es = eig_full(l);
    CHECK(es.values(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(es.values(1) == doctest::Approx(2.0));

    es = eig_full(normalized_laplacian(k3()));
    CHECK(es.values(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(es.values(1) == doctest::Approx(1.5));
    CHECK(es.values(2) == doctest::Approx(1.5));
}

TEST_CASE("eig_full reconstructs the input matrix") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    Matrix m(8, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) m(i, j) = nd(rng);
    Matrix sym = 0.5 * (m + m.transpose());
    EigenSystem es = eig_full(sym);
    Matrix rebuilt =
        es.vectors * es.values.asDiagonal() * es.vectors.transpose();
    CHECK((rebuilt - sym).norm() <= 1e-8);
}

TEST_CASE("eig_selective matches eig_full extremes") {
    Matrix l = normalized_laplacian(path(10));
    EigenSystem full = eig_full(l);
    SelectiveResult sel = eig_selective(l, SpectralSelection{2});
    REQUIRE(sel.system.values.size() == 4);
    CHECK(sel.system.values(0) == doctest::Approx(full.values(0)).epsilon(1e-8));
    CHECK(sel.system.values(1) == doctest::Approx(full.values(1)).epsilon(1e-8));
    CHECK(sel.system.values(2) == doctest::Approx(full.values(8)).epsilon(1e-8));
    CHECK(sel.system.values(3) == doctest::Approx(full.values(9)).epsilon(1e-8));
}

TEST_CASE("eig_selective degenerates to eig_full when 2K >= n") {
    Matrix l = normalized_laplacian(path(6));
    SelectiveResult sel = eig_selective(l, SpectralSelection{3});
    EigenSystem full = eig_full(l);
    CHECK(sel.system.values.isApprox(full.values, 1e-10));
}

TEST_CASE("eig_selective K=1 on K3") {
    SelectiveResult sel =
        eig_selective(normalized_laplacian(k3()), SpectralSelection{1});
    REQUIRE(sel.system.values.size() == 2);
    CHECK(sel.system.values(0) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(sel.system.values(1) == doctest::Approx(1.5));
}

TEST_CASE("spectrum_norm_sq closed forms") {
    Graph g = k3();
    ComplementDirection c = complement_direction(g);
    Matrix zero = Matrix::Zero(3, 3);
    CHECK(spectrum_norm_sq(g, c, zero, {}, {}) == doctest::Approx(4.5));

    Graph edge = make_graph(2, {{0, 1}});
    CHECK(spectrum_norm_sq(edge, complement_direction(edge),
                           Matrix::Zero(2, 2), {}, {}) == doctest::Approx(4.0));
}

TEST_CASE("spectrum_norm_sq tracks an exact re-decomposition") {
    Graph g = generate_sbm(20, 2, 0.5, 0.1, 6);
    ComplementDirection c = complement_direction(g);
    Matrix delta = 0.05 * g.adjacency;
    double base = spectrum_norm_sq(g, c, Matrix::Zero(20, 20), {}, {});
    double perturbed = spectrum_norm_sq(g, c, delta, {}, {});
    CHECK(base != perturbed);

    EigenSystem es = eig_full(normalized_laplacian(relaxed_adjacency(
        g, c, delta, {})));
    CHECK(perturbed == doctest::Approx(es.values.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("gradient eigenvector outer product on a single edge") {
    Matrix l(2, 2);
    l << 1, -1, -1, 1;
    EigenSystem es = eig_full(l);
    Vector u = es.vectors.col(1);
    Matrix outer = u * u.transpose();
    CHECK(outer(0, 0) == doctest::Approx(0.5));
    CHECK(outer(0, 1) == doctest::Approx(-0.5));
    CHECK(outer(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("spectrum_norm_grad matches finite differences") {
    Graph g = generate_sbm(12, 2, 0.6, 0.15, 3);
    ComplementDirection c = complement_direction(g);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ud(0.05, 0.3);
    Matrix delta = Matrix::Zero(12, 12);
    for (int i = 0; i < 12; ++i)
        for (int j = i + 1; j < 12; ++j) delta(i, j) = delta(j, i) = ud(rng);
    NoiseSpec noise{1e-6, 21};

    GradResult gr = spectrum_norm_grad(g, c, delta, {}, noise);
    Matrix fd = fd_gradient(
        [&](const Matrix& d) { return spectrum_norm_sq(g, c, d, {}, noise); },
        delta);
    for (int i = 0; i < 12; ++i)
        for (int j = i + 1; j < 12; ++j) {
            double denom = std::max(std::abs(fd(i, j)), 1e-4);
            CHECK(std::abs(gr.grad(i, j) - fd(i, j)) / denom <= 1e-4);
        }
}

TEST_CASE("spectral_distance fixtures") {
    CHECK(spectral_distance(k3(), k3()) == doctest::Approx(0.0));
    double d = spectral_distance(k3(), p3());
    CHECK(d == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK(spectral_distance(p3(), k3()) == doctest::Approx(d));
}

TEST_CASE("algebraic connectivity fixtures") {
    Graph two = make_graph(4, {{0, 1}, {2, 3}});
    CHECK(algebraic_connectivity(two) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(algebraic_connectivity(k3()) == doctest::Approx(1.5));
    CHECK(algebraic_connectivity(p3()) == doctest::Approx(1.0));
}

TEST_CASE("spectral component count") {
    CHECK(connected_components_spectral(k3()) == 1);
    CHECK(connected_components_spectral(make_graph(4, {{0, 1}, {2, 3}})) == 2);
    CHECK(connected_components_spectral(make_graph(4, {})) == 4);
}

TEST_CASE("diameter bounds") {
    DiameterBounds b = diameter_bounds(k3());
    CHECK(b.exact == 1);
    CHECK(b.upper == doctest::Approx(1.0));

    b = diameter_bounds(p3());
    CHECK(b.exact == 2);
    CHECK(b.upper == doctest::Approx(2.0));

    Graph star = make_graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    b = diameter_bounds(star);
    CHECK(b.exact == 2);
    CHECK(b.exact <= b.upper + 1e-12);

    CHECK_THROWS_AS(diameter_bounds(make_graph(4, {{0, 1}, {2, 3}})),
                    std::domain_error);
}

TEST_CASE("diffusion distance") {
    Graph edge = make_graph(2, {{0, 1}});
    CHECK(diffusion_distance(edge, 0, 0, 1.0) == doctest::Approx(0.0));
    CHECK(diffusion_distance(edge, 0, 1, 1.0) ==
          doctest::Approx(2.0 * std::exp(-4.0)).epsilon(1e-10));
    Graph g = generate_sbm(15, 2, 0.5, 0.1, 2);
    CHECK(diffusion_distance(g, 3, 9, 0.7) ==
          doctest::Approx(diffusion_distance(g, 9, 3, 0.7)));
}

TEST_CASE("spectral filter identities") {
    Graph g = generate_sbm(14, 2, 0.5, 0.1, 5);
    Vector x = Vector::LinSpaced(14, -1.0, 1.0);
    Vector same = apply_spectral_filter(g, x, [](double) { return 1.0; });
    CHECK((same - x).norm() <= 1e-9);

    Vector lap = apply_spectral_filter(g, x, [](double v) { return v; });
    CHECK((lap - normalized_laplacian(g) * x).norm() <= 1e-9);

    Graph t = k3();
    Vector e0 = Vector::Zero(3);
    e0(0) = 1.0;
    Vector filtered =
        apply_spectral_filter(t, e0, [](double v) { return 2.0 - v; });
    Matrix shifted = 2.0 * Matrix::Identity(3, 3) - normalized_laplacian(t);
    CHECK((filtered - shifted * e0).norm() <= 1e-9);
}

TEST_CASE("first-order eigen change sign symmetry") {
    Graph g = generate_sbm(16, 2, 0.7, 0.15, 4);
    EigenSystem es = eig_full(normalized_laplacian(g));
    int i = 0, j = 1, k = 1;
    double fwd = first_order_eigen_change(es, g, i, j, k);

    Graph flipped = g;
    double v = 1.0 - g.adjacency(i, j);
    flipped.adjacency(i, j) = flipped.adjacency(j, i) = v;
    EigenSystem es2 = eig_full(normalized_laplacian(flipped));
    double back = first_order_eigen_change(es2, flipped, i, j, k);
    // opposite signs at the two linearization endpoints
    CHECK(fwd * back < 0.0);
}

TEST_CASE("first-order Fiedler prediction near a small flip") {
    Graph g = generate_sbm(16, 2, 0.8, 0.1, 9);
    EigenSystem es = eig_full(normalized_laplacian(g));
    // intra-cluster edge
    int i = -1, j = -1;
    for (int a = 0; a < 16 && i < 0; ++a)
        for (int b = a + 1; b < 16; ++b)
            if (g.adjacency(a, b) == 1.0 &&
                (*g.node_labels)[a] == (*g.node_labels)[b]) {
                i = a;
                j = b;
                break;
            }
    REQUIRE(i >= 0);
    double pred = first_order_eigen_change(es, g, i, j, 1);
    double exact = exact_eigen_change(g, i, j, 1);
    CHECK(std::abs(pred - exact) <= std::abs(exact) * 0.5 + 5e-2);
}

TEST_CASE("inter-cluster flips move low eigenvalues more") {
    Graph g = generate_sbm(16, 2, 0.8, 0.05, 12);
    EigenSystem es = eig_full(normalized_laplacian(g));
    double inter = 0.0, intra = 0.0;
    int n_inter = 0, n_intra = 0;
    for (int i = 0; i < 16; ++i)
        for (int j = i + 1; j < 16; ++j) {
            double mag = std::abs(first_order_eigen_change(es, g, i, j, 1));
            if ((*g.node_labels)[i] != (*g.node_labels)[j]) {
                inter += mag;
                ++n_inter;
            } else {
                intra += mag;
                ++n_intra;
            }
        }
    CHECK(inter / n_inter > intra / n_intra);
}

TEST_CASE("eigenvalue invariants on random graphs") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 20; ++t) {
        Graph g = (t % 2 == 0)
                      ? generate_sbm(20 + t, 2, 0.4, 0.1, rng())
                      : generate_random_geometric(20 + t, 0.3, rng());
        EigenSystem es = eig_full(normalized_laplacian(g));
        CHECK(es.values.minCoeff() >= -1e-9);
        CHECK(es.values.maxCoeff() <= 2.0 + 1e-9);
        CHECK(std::abs(es.values.sum() - g.n) <= 1e-8 * g.n);
    }
}
