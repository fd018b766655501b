#include "specaug/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace specaug {

namespace {

constexpr double kDegreeFloor = 1e-8;
constexpr double kLanczosTol = 1e-10;

void fix_signs(Matrix& vectors) {
    for (int k = 0; k < vectors.cols(); ++k) {
        for (int i = 0; i < vectors.rows(); ++i) {
            if (std::abs(vectors(i, k)) > 1e-12) {
                if (vectors(i, k) < 0.0) vectors.col(k) *= -1.0;
                break;
            }
        }
    }
}

void check_symmetric(const Matrix& l) {
    if ((l - l.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("matrix is not symmetric within 1e-12");
}

// Lanczos with full reorthogonalization and explicit deflation of locked
// (converged) eigenvectors. Finds the `want` algebraically largest eigenpairs
// of op. Returns false if the matvec budget runs out first.
bool lanczos_largest(const Matrix& op, int want, Vector& out_vals,
                     Matrix& out_vecs) {
    const int n = static_cast<int>(op.rows());
    const double scale = std::max(1.0, op.norm());
    const double tol = kLanczosTol * scale;
    const int max_matvecs = 10 * n;

    std::mt19937_64 rng(0x5eed1a9c);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Matrix locked_vecs(n, want);
    Vector locked_vals(want);
    int locked = 0;
    int matvecs = 0;

    while (locked < want && matvecs < max_matvecs) {
        // fresh start vector, orthogonal to everything locked
        Vector v(n);
        for (int i = 0; i < n; ++i) v(i) = gauss(rng);
        if (locked > 0)
            v -= locked_vecs.leftCols(locked) *
                 (locked_vecs.leftCols(locked).transpose() * v);
        if (v.norm() < 1e-14) continue;
        v.normalize();

        const int m_cap = n - locked;
        Matrix basis(n, m_cap);
        std::vector<double> alpha, beta;
        basis.col(0) = v;
        int m = 0;
        bool breakdown = false;

        Vector ritz_vals;
        Matrix ritz_s;
        int converged = 0;

        while (m < m_cap && matvecs < max_matvecs) {
            Vector w = op * basis.col(m);
            ++matvecs;
            w -= alpha.empty() ? Vector::Zero(n).eval()
                               : (beta.back() * basis.col(m - 1)).eval();
            double a = basis.col(m).dot(w);
            alpha.push_back(a);
            w -= a * basis.col(m);
            // full reorthogonalization, twice, against basis and locked
            for (int pass = 0; pass < 2; ++pass) {
                w -= basis.leftCols(m + 1) *
                     (basis.leftCols(m + 1).transpose() * w);
                if (locked > 0)
                    w -= locked_vecs.leftCols(locked) *
                         (locked_vecs.leftCols(locked).transpose() * w);
            }
            double b = w.norm();

            // Ritz extraction on the tridiagonal
            const int mm = m + 1;
            Matrix tri = Matrix::Zero(mm, mm);
            for (int i = 0; i < mm; ++i) tri(i, i) = alpha[i];
            for (int i = 0; i + 1 < mm; ++i) {
                tri(i, i + 1) = beta[i];
                tri(i + 1, i) = beta[i];
            }
            Eigen::SelfAdjointEigenSolver<Matrix> tes(tri);
            ritz_vals = tes.eigenvalues();
            ritz_s = tes.eigenvectors();

            const int need = std::min(want - locked, mm);
            converged = 0;
            for (int k = 0; k < need; ++k) {
                const int col = mm - 1 - k;  // largest first
                double resid = b * std::abs(ritz_s(mm - 1, col));
                if (resid <= tol)
                    ++converged;
                else
                    break;
            }
            if (converged >= want - locked) break;
            if (b <= tol) {  // invariant subspace: lock what we have, restart
                breakdown = true;
                converged = need;
                break;
            }
            beta.push_back(b);
            basis.col(m + 1) = w / b;
            ++m;
        }
        (void)breakdown;

        // lock converged Ritz pairs (largest first)
        const int mm = static_cast<int>(alpha.size());
        for (int k = 0; k < converged && locked < want; ++k) {
            const int col = mm - 1 - k;
            Vector y = basis.leftCols(mm) * ritz_s.col(col);
            if (locked > 0)
                y -= locked_vecs.leftCols(locked) *
                     (locked_vecs.leftCols(locked).transpose() * y);
            double nrm = y.norm();
            if (nrm < 1e-10) continue;
            locked_vecs.col(locked) = y / nrm;
            locked_vals(locked) = ritz_vals(col);
            ++locked;
        }
    }

    if (locked < want) return false;
    out_vals = locked_vals;
    out_vecs = locked_vecs;
    return true;
}

int bfs_eccentricity(const Graph& g, int src) {
    std::vector<int> dist(g.n, -1);
    std::queue<int> q;
    dist[src] = 0;
    q.push(src);
    int ecc = 0;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v = 0; v < g.n; ++v) {
            if (g.adjacency(u, v) != 0.0 && dist[v] < 0) {
                dist[v] = dist[u] + 1;
                ecc = std::max(ecc, dist[v]);
                q.push(v);
            }
        }
    }
    for (int v = 0; v < g.n; ++v)
        if (dist[v] < 0) throw std::domain_error("graph is disconnected");
    return ecc;
}

}  // namespace

Matrix symmetric_uniform_noise(int n, const NoiseSpec& spec) {
    if (spec.magnitude == 0.0) return Matrix::Zero(n, n);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix raw(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) raw(i, j) = unif(rng);
    Matrix noise = spec.magnitude * 0.5 * (raw + raw.transpose());
    noise.diagonal().setZero();  // perturbation space excludes the diagonal
    return noise;
}

EigenSystem eig_full(const Matrix& l) {
    check_symmetric(l);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(l);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed");
    EigenSystem es;
    es.values = solver.eigenvalues();
    es.vectors = solver.eigenvectors();
    fix_signs(es.vectors);
    return es;
}

std::vector<int> selected_indices(int n, SpectralSelection sel) {
    std::vector<int> idx;
    if (sel.is_full(n)) {
        idx.resize(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        return idx;
    }
    for (int i = 0; i < sel.k_extreme; ++i) idx.push_back(i);
    for (int i = n - sel.k_extreme; i < n; ++i) idx.push_back(i);
    return idx;
}

SelectiveResult eig_selective(const Matrix& l, SpectralSelection sel) {
    check_symmetric(l);
    const int n = static_cast<int>(l.rows());
    if (sel.is_full(n)) return {eig_full(l), false};

    const int k = sel.k_extreme;
    Vector hi_vals, lo_vals;
    Matrix hi_vecs, lo_vecs;
    bool ok = lanczos_largest(l, k, hi_vals, hi_vecs);
    if (ok) {
        // smallest of L are the largest of 2I - L
        Matrix shifted = 2.0 * Matrix::Identity(n, n) - l;
        ok = lanczos_largest(shifted, k, lo_vals, lo_vecs);
        lo_vals = (2.0 - lo_vals.array()).matrix();
    }
    if (!ok) {
        EigenSystem full = eig_full(l);
        EigenSystem es;
        auto idx = selected_indices(n, sel);
        es.values.resize(static_cast<int>(idx.size()));
        es.vectors.resize(n, static_cast<int>(idx.size()));
        for (int i = 0; i < static_cast<int>(idx.size()); ++i) {
            es.values(i) = full.values(idx[i]);
            es.vectors.col(i) = full.vectors.col(idx[i]);
        }
        return {es, true};
    }

    // merge ascending: lo block ascending, hi block ascending
    EigenSystem es;
    es.values.resize(2 * k);
    es.vectors.resize(n, 2 * k);
    std::vector<int> lo_order(k), hi_order(k);
    for (int i = 0; i < k; ++i) lo_order[i] = i;
    for (int i = 0; i < k; ++i) hi_order[i] = i;
    std::sort(lo_order.begin(), lo_order.end(),
              [&](int a, int b) { return lo_vals(a) < lo_vals(b); });
    std::sort(hi_order.begin(), hi_order.end(),
              [&](int a, int b) { return hi_vals(a) < hi_vals(b); });
    for (int i = 0; i < k; ++i) {
        es.values(i) = lo_vals(lo_order[i]);
        es.vectors.col(i) = lo_vecs.col(lo_order[i]);
        es.values(k + i) = hi_vals(hi_order[i]);
        es.vectors.col(k + i) = hi_vecs.col(hi_order[i]);
    }
    fix_signs(es.vectors);
    return {es, false};
}

Matrix relaxed_adjacency(const Graph& g, const ComplementDirection& c,
                         const Matrix& delta, const NoiseSpec& noise) {
    Matrix aprime = g.adjacency + c.c.cwiseProduct(delta);
    if (noise.magnitude > 0.0)
        aprime += symmetric_uniform_noise(g.n, noise);
    return aprime;
}

double spectrum_norm_sq(const Graph& g, const ComplementDirection& c,
                        const Matrix& delta, SpectralSelection sel,
                        const NoiseSpec& noise) {
    Matrix l = normalized_laplacian(relaxed_adjacency(g, c, delta, noise));
    if (sel.is_full(g.n)) {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(l);
        return solver.eigenvalues().squaredNorm();
    }
    return eig_selective(l, sel).system.values.squaredNorm();
}

Matrix laplacian_eigen_sum_grad(const Matrix& aprime, const EigenSystem& es,
                                const std::vector<int>& idx,
                                const Vector& weights, double degree_floor) {
    const int n = static_cast<int>(aprime.rows());
    Matrix m = Matrix::Zero(n, n);
    for (int t = 0; t < static_cast<int>(idx.size()); ++t)
        m.noalias() += weights(t) * es.vectors.col(idx[t]) *
                       es.vectors.col(idx[t]).transpose();

    Vector d = aprime.rowwise().sum();
    Vector s(n), tcub(n);
    for (int i = 0; i < n; ++i) {
        double dh = std::max(d(i), degree_floor);
        s(i) = 1.0 / std::sqrt(dh);
        // derivative of d^{-1/2} through the floor: zero when floored
        tcub(i) = (d(i) > degree_floor) ? 1.0 / (dh * std::sqrt(dh)) : 0.0;
    }
    // v_p = sum_b M_pb A'_pb s_b
    Vector v = m.cwiseProduct(aprime) * s;

    Matrix grad(n, n);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            if (p == q) {
                grad(p, q) = 0.0;
                continue;
            }
            // L = I - diag(s) A' diag(s); pair derivative doubles the
            // single-entry term since A'_pq and A'_qp move together
            double single = m(p, q) * s(p) * s(q) -
                            0.5 * (tcub(p) * v(p) + tcub(q) * v(q));
            grad(p, q) = -2.0 * single;
        }
    return grad;
}

GradResult spectrum_norm_grad(const Graph& g, const ComplementDirection& c,
                              const Matrix& delta, SpectralSelection sel,
                              const NoiseSpec& noise) {
    Matrix aprime = relaxed_adjacency(g, c, delta, noise);
    Matrix l = normalized_laplacian(aprime);

    EigenSystem es;
    std::vector<int> idx;
    if (sel.is_full(g.n)) {
        es = eig_full(l);
        idx = selected_indices(g.n, sel);
    } else {
        es = eig_selective(l, sel).system;
        idx.resize(es.values.size());
        for (int i = 0; i < static_cast<int>(idx.size()); ++i) idx[i] = i;
    }

    // adjacent gaps within the selection; the lo/hi block boundary of a
    // selective decomposition is not an adjacent pair in the full spectrum
    const size_t block_boundary =
        sel.is_full(g.n) ? idx.size() : idx.size() / 2;
    bool degenerate = false;
    for (size_t t = 1; t < idx.size(); ++t) {
        if (t == block_boundary) continue;
        if (es.values(idx[t]) - es.values(idx[t - 1]) < 1e-10)
            degenerate = true;
    }

    Vector weights(static_cast<int>(idx.size()));
    for (int t = 0; t < weights.size(); ++t)
        weights(t) = 2.0 * es.values(idx[t]);

    Matrix grad_a = laplacian_eigen_sum_grad(aprime, es, idx, weights);
    GradResult out;
    out.grad = c.c.cwiseProduct(grad_a);
    out.degenerate_warning = degenerate;
    return out;
}

double spectral_distance(const Graph& g1, const Graph& g2, int low_k) {
    if (g1.n != g2.n)
        throw std::invalid_argument("spectral_distance: size mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> s1(normalized_laplacian(g1));
    Eigen::SelfAdjointEigenSolver<Matrix> s2(normalized_laplacian(g2));
    if (low_k > 0 && low_k < g1.n)
        return (s1.eigenvalues().head(low_k) - s2.eigenvalues().head(low_k))
            .norm();
    return (s1.eigenvalues() - s2.eigenvalues()).norm();
}

double algebraic_connectivity(const Graph& g) {
    if (g.n < 2) throw std::invalid_argument("need at least 2 nodes");
    Eigen::SelfAdjointEigenSolver<Matrix> s(normalized_laplacian(g));
    return s.eigenvalues()(1);
}

int connected_components_spectral(const Graph& g, double tol) {
    // isolated nodes get identity rows under the degree floor (eigenvalue 1,
    // not 0), so count them directly and decompose the rest
    std::vector<int> active;
    for (int i = 0; i < g.n; ++i)
        if (g.adjacency.row(i).sum() > 0.0) active.push_back(i);
    int count = g.n - static_cast<int>(active.size());
    if (active.empty()) return count;
    Matrix sub(active.size(), active.size());
    for (size_t a = 0; a < active.size(); ++a)
        for (size_t b = 0; b < active.size(); ++b)
            sub(a, b) = g.adjacency(active[a], active[b]);
    Eigen::SelfAdjointEigenSolver<Matrix> s(normalized_laplacian(sub));
    for (int i = 0; i < static_cast<int>(active.size()); ++i)
        if (s.eigenvalues()(i) < tol) ++count;
    return count;
}

DiameterBounds diameter_bounds(const Graph& g) {
    Eigen::SelfAdjointEigenSolver<Matrix> s(normalized_laplacian(g));
    Vector vals = s.eigenvalues();
    const double tol = 1e-8;

    int distinct = 0;
    double last = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.n; ++i) {
        if (vals(i) - last > tol) {
            ++distinct;
            last = vals(i);
        }
    }

    // second smallest nonzero eigenvalue
    double lambda2 = 0.0;
    int nonzero_seen = 0;
    for (int i = 0; i < g.n && nonzero_seen < 2; ++i) {
        if (vals(i) > tol) {
            ++nonzero_seen;
            lambda2 = vals(i);
        }
    }

    DiameterBounds out;
    out.upper = distinct - 1;
    out.lower = (lambda2 > 0.0) ? 4.0 / (g.n * lambda2) : 0.0;
    int ecc_max = 0;
    for (int v = 0; v < g.n; ++v)
        ecc_max = std::max(ecc_max, bfs_eccentricity(g, v));
    out.exact = ecc_max;
    return out;
}

double diffusion_distance(const Graph& g, int i, int j, double t) {
    if (i < 0 || j < 0 || i >= g.n || j >= g.n)
        throw std::out_of_range("diffusion_distance: node out of range");
    if (t <= 0.0) throw std::invalid_argument("diffusion_distance: t <= 0");
    EigenSystem es = eig_full(normalized_laplacian(g));
    double acc = 0.0;
    for (int l = 0; l < g.n; ++l) {
        double phi = std::exp(-t * es.values(l));
        double diff = es.vectors(i, l) - es.vectors(j, l);
        acc += phi * phi * diff * diff;
    }
    return acc;
}

Vector apply_spectral_filter(const Graph& g, const Vector& signal,
                             const std::function<double(double)>& filter) {
    EigenSystem es = eig_full(normalized_laplacian(g));
    Vector hat = es.vectors.transpose() * signal;
    for (int i = 0; i < g.n; ++i) hat(i) *= filter(es.values(i));
    return es.vectors * hat;
}

double first_order_eigen_change(const EigenSystem& es, const Graph& g, int i,
                                int j, int k) {
    if (i == j) throw std::invalid_argument("i == j");
    if (k < 0 || k >= es.values.size())
        throw std::out_of_range("eigenvalue index out of range");
    double dw = 1.0 - 2.0 * g.adjacency(i, j);
    // Delta w (2 u_ki u_kj - lambda (u_ki^2 + u_kj^2)) with the generalized
    // eigenpair of (A, D): u = v / sqrt(d), lambda = 1 - lambda_L. This is
    // the exact derivative of the adjacency generalized eigenvalue; the
    // Laplacian eigenvalue moves by its negative.
    Vector d = degrees(g).cwiseMax(1e-8);
    double uki = es.vectors(i, k) / std::sqrt(d(i));
    double ukj = es.vectors(j, k) / std::sqrt(d(j));
    double lam = 1.0 - es.values(k);
    return -dw * (2.0 * uki * ukj - lam * (uki * uki + ukj * ukj));
}

}  // namespace specaug
