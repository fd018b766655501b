#include "specaug/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "specaug/augment.hpp"
#include "specaug/gcl.hpp"
#include "specaug/spectral.hpp"

namespace specaug {

namespace {

using nlohmann::json;

// relative error with an absolute floor: err <= rtol iff
// |analytic - reference| <= atol + rtol * |reference|
double rel_err(double analytic, double reference, double floor_) {
    return std::abs(analytic - reference) /
           std::max(std::abs(reference), floor_);
}

Graph random_instance_graph(std::mt19937_64& rng, int n_lo, int n_hi) {
    std::uniform_int_distribution<int> pick_n(n_lo, n_hi);
    std::uniform_int_distribution<int> coin(0, 1);
    int n = pick_n(rng);
    if (coin(rng) == 0)
        return generate_sbm(n, 2, 0.6, 0.15, rng());
    return generate_random_geometric(n, 0.45, rng());
}

Matrix random_interior_delta(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.05, 0.3);
    Matrix delta = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double v = unif(rng);
            delta(i, j) = v;
            delta(j, i) = v;
        }
    return delta;
}

}  // namespace

Matrix fd_gradient(const std::function<double(const Matrix&)>& scalar_fn,
                   const Matrix& point, const FdConfig& cfg) {
    const int n = static_cast<int>(point.rows());
    Matrix grad = Matrix::Zero(n, n);
    const double h = cfg.step_h;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Matrix plus = point, minus = point;
            plus(i, j) += h;
            plus(j, i) += h;
            minus(i, j) -= h;
            minus(j, i) -= h;
            double fp = scalar_fn(plus);
            double fm = scalar_fn(minus);
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw std::runtime_error("non-finite finite-difference eval");
            double g = (fp - fm) / (2.0 * h);
            grad(i, j) = g;
            grad(j, i) = g;
        }
    return grad;
}

double exact_eigen_change(const Graph& g, int i, int j, int k, double weight) {
    Matrix flipped = g.adjacency;
    double dw = (1.0 - 2.0 * g.adjacency(i, j)) * weight;
    flipped(i, j) += dw;
    flipped(j, i) += dw;
    Eigen::SelfAdjointEigenSolver<Matrix> before(normalized_laplacian(g));
    Eigen::SelfAdjointEigenSolver<Matrix> after(
        normalized_laplacian(flipped));
    return after.eigenvalues()(k) - before.eigenvalues()(k);
}

bool brute_projection_check(const Matrix& raw, double epsilon,
                            double resolution) {
    const int n = static_cast<int>(raw.rows());
    if (n > 3) throw std::invalid_argument("brute check limited to n <= 3");
    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) slots.emplace_back(i, j);
    const int s = static_cast<int>(slots.size());
    const int levels = static_cast<int>(std::floor(1.0 / resolution)) + 1;

    ProbabilityMatrix proj = project_to_budget(raw, epsilon);
    double proj_dist = 0.0;
    for (auto [i, j] : slots) {
        double d = proj.delta(i, j) - raw(i, j);
        proj_dist += 2.0 * d * d;  // both triangles
    }

    // exhaustive grid over feasible symmetric matrices
    std::vector<int> level(s, 0);
    double best = std::numeric_limits<double>::max();
    while (true) {
        double sum = 0.0, dist = 0.0;
        for (int t = 0; t < s; ++t) {
            double v = std::min(1.0, level[t] * resolution);
            sum += 2.0 * v;
            double d = v - raw(slots[t].first, slots[t].second);
            dist += 2.0 * d * d;
        }
        if (sum <= epsilon + 1e-12) best = std::min(best, dist);
        int t = 0;
        while (t < s && ++level[t] >= levels) level[t++] = 0;
        if (t == s) break;
    }
    // the grid minimum cannot beat the true projection by more than the
    // resolution slack
    double slack = 4.0 * s * resolution + 1e-9;
    return proj_dist <= best + slack;
}

namespace {

OracleCheckReport check_gradients(std::uint64_t seed, int instances) {
    OracleCheckReport rep{"spectrum_norm_grad_vs_fd", 0, 0, 0.0, 0};
    std::mt19937_64 rng(seed);
    FdConfig fd;
    for (int t = 0; t < instances; ++t) {
        Graph g = random_instance_graph(rng, 4, 24);
        ComplementDirection c = complement_direction(g);
        Matrix delta = random_interior_delta(g.n, rng);
        NoiseSpec noise{1e-6, rng()};
        SpectralSelection sel;  // full spectrum

        // degenerate instances have no defined per-eigenvalue derivative
        Matrix l = normalized_laplacian(relaxed_adjacency(g, c, delta, noise));
        Vector vals = eig_full(l).values;
        double min_gap = std::numeric_limits<double>::max();
        for (int i = 1; i < vals.size(); ++i)
            min_gap = std::min(min_gap, vals(i) - vals(i - 1));
        if (min_gap < 1e-6) {
            ++rep.skipped_degenerate;
            continue;
        }

        ++rep.instances;
        Matrix analytic = spectrum_norm_grad(g, c, delta, sel, noise).grad;
        Matrix numeric = fd_gradient(
            [&](const Matrix& d) {
                return spectrum_norm_sq(g, c, d, sel, noise);
            },
            delta, fd);
        double worst = 0.0;
        for (int i = 0; i < g.n; ++i)
            for (int j = i + 1; j < g.n; ++j)
                worst = std::max(
                    worst, rel_err(analytic(i, j), numeric(i, j), fd.atol / fd.rtol));
        rep.worst_rel_err = std::max(rep.worst_rel_err, worst);
        if (worst <= fd.rtol) ++rep.passes;
    }
    return rep;
}

OracleCheckReport check_projection(std::uint64_t seed, int instances) {
    OracleCheckReport rep{"projection_optimality", 0, 0, 0.0, 0};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_n(2, 8);
    std::uniform_real_distribution<double> unif(-0.5, 1.5);
    std::uniform_real_distribution<double> unif01(0.0, 1.0);
    for (int t = 0; t < instances; ++t) {
        ++rep.instances;
        int n = pick_n(rng);
        Matrix raw = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                double v = unif(rng);
                raw(i, j) = v;
                raw(j, i) = v;
            }
        int slots = n * (n - 1) / 2;
        double epsilon = unif01(rng) * slots;

        ProbabilityMatrix p = project_to_budget(raw, epsilon);
        bool ok = true;
        try {
            p.validate(epsilon);
        } catch (const std::exception&) {
            ok = false;
        }
        // idempotence
        ProbabilityMatrix pp = project_to_budget(p.delta, epsilon);
        double idem = (pp.delta - p.delta).cwiseAbs().maxCoeff();
        rep.worst_rel_err = std::max(rep.worst_rel_err, idem);
        if (idem > 1e-12) ok = false;
        // optimality against random feasible points
        double proj_dist = (p.delta - raw).norm();
        for (int s = 0; s < 1000 && ok; ++s) {
            Matrix y = Matrix::Zero(n, n);
            double sum = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    double v = unif01(rng);
                    y(i, j) = v;
                    y(j, i) = v;
                    sum += 2.0 * v;
                }
            if (sum > epsilon && sum > 0.0)
                y *= (epsilon / sum) * unif01(rng);
            if ((y - raw).norm() + 1e-9 < proj_dist) ok = false;
        }
        if (ok) ++rep.passes;
    }
    return rep;
}

OracleCheckReport check_brute_projection(std::uint64_t seed) {
    OracleCheckReport rep{"projection_brute_grid", 0, 0, 0.0, 0};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-0.5, 1.5);
    std::vector<double> epsilons = {0.0, 0.5, 1.5, 3.0, 6.0};
    for (int n = 2; n <= 3; ++n) {
        for (double eps : epsilons) {
            ++rep.instances;
            Matrix raw = Matrix::Zero(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    double v = unif(rng);
                    raw(i, j) = v;
                    raw(j, i) = v;
                }
            if (brute_projection_check(raw, eps, 1e-2)) ++rep.passes;
        }
    }
    return rep;
}

// first-order prediction is a rate (change per unit flip weight); the
// per-unit error shrinks ~10x when the weight shrinks 10x
OracleCheckReport check_eigen_change(std::uint64_t seed, int instances) {
    OracleCheckReport rep{"first_order_eigen_change_scaling", 0, 0, 0.0, 0};
    rep.required_fraction = 0.9;
    std::mt19937_64 rng(seed);
    for (int t = 0; t < instances; ++t) {
        Graph g = generate_sbm(16, 2, 0.7, 0.15, rng());
        EigenSystem es = eig_full(normalized_laplacian(g));
        std::uniform_int_distribution<int> pick(0, g.n - 1);
        int i = pick(rng), j = pick(rng);
        if (i == j) j = (j + 1) % g.n;
        int k = pick(rng);
        double gap_lo = (k > 0) ? es.values(k) - es.values(k - 1) : 1.0;
        double gap_hi =
            (k + 1 < g.n) ? es.values(k + 1) - es.values(k) : 1.0;
        if (std::min(gap_lo, gap_hi) < 1e-3) {
            ++rep.skipped_degenerate;
            continue;
        }
        ++rep.instances;
        double pred = first_order_eigen_change(es, g, i, j, k);
        double err_hi =
            std::abs(pred - exact_eigen_change(g, i, j, k, 0.1) / 0.1);
        double err_lo =
            std::abs(pred - exact_eigen_change(g, i, j, k, 0.01) / 0.01);
        if (err_hi < 1e-12 && err_lo < 1e-12) {
            ++rep.passes;  // exactly linear slot, nothing to scale
            continue;
        }
        double ratio = err_hi / std::max(err_lo, 1e-300);
        rep.worst_rel_err = std::max(rep.worst_rel_err, ratio);
        if (ratio >= 5.0 && ratio <= 20.0) ++rep.passes;
    }
    return rep;
}

OracleCheckReport check_gcl_gradients(std::uint64_t seed, int instances) {
    OracleCheckReport rep{"gcl_backprop_vs_fd", 0, 0, 0.0, 0};
    std::mt19937_64 rng(seed);
    const double h = 1e-5, rtol = 1e-3, atol = 1e-8;
    for (int t = 0; t < instances; ++t) {
        ++rep.instances;
        Graph g = generate_sbm(6, 2, 0.8, 0.3, rng());
        Matrix x = Matrix::Random(6, 5);
        ConvKind kind = (t % 2 == 0) ? ConvKind::kGcn : ConvKind::kGin;
        PoolKind pool = (t % 4 < 2) ? PoolKind::kMean : PoolKind::kSum;
        EncoderState enc = init_encoder(5, 4, 2, kind, rng());
        ReadoutState rd = init_readout(4, pool, rng());

        Graph v1 = g;
        Graph v2 = sample_view(g, ProbabilityMatrix{0.2 * g.adjacency}, rng());

        // cycle the three denominator readings; corrupted mode exercises the
        // extra backward pass through the shuffled-feature forward
        NegativeMode mode =
            (t % 3 == 0) ? NegativeMode::kCorrupted
                         : (t % 3 == 1) ? NegativeMode::kOppositeView
                                        : NegativeMode::kSameView;
        Matrix xc(x.rows(), x.cols());
        {
            std::vector<int> perm(x.rows());
            for (int i = 0; i < x.rows(); ++i) perm[i] = i;
            std::mt19937_64 prng(rng());
            std::shuffle(perm.begin(), perm.end(), prng);
            for (int i = 0; i < x.rows(); ++i) xc.row(i) = x.row(perm[i]);
        }
        const Matrix* xcp = mode == NegativeMode::kCorrupted ? &xc : nullptr;
        std::vector<Matrix> xcs{xc};
        auto loss_at = [&] {
            return gcl_loss(v1, v2, x, x, enc, rd, mode, xcp, xcp);
        };

        GclGradients grads;
        gcl_loss_and_grad({v1}, {v2}, {x}, {x}, enc, rd, &grads, mode,
                          xcp ? &xcs : nullptr, xcp ? &xcs : nullptr);

        double worst = 0.0;
        auto fd_param = [&](Matrix& param, const Matrix& analytic) {
            for (int i = 0; i < param.rows(); ++i)
                for (int j = 0; j < param.cols(); ++j) {
                    double orig = param(i, j);
                    param(i, j) = orig + h;
                    double fp = loss_at();
                    param(i, j) = orig - h;
                    double fm = loss_at();
                    param(i, j) = orig;
                    double num = (fp - fm) / (2.0 * h);
                    worst = std::max(worst,
                                     rel_err(analytic(i, j), num, atol / rtol));
                }
        };
        for (size_t l = 0; l < enc.layer_weights.size(); ++l)
            fd_param(enc.layer_weights[l], grads.layer_grads[l]);
        fd_param(rd.proj, grads.proj_grad);

        rep.worst_rel_err = std::max(rep.worst_rel_err, worst);
        if (worst <= rtol) ++rep.passes;
    }
    return rep;
}

}  // namespace

bool OracleReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed()) return false;
    return true;
}

std::string OracleReport::to_json() const {
    json arr = json::array();
    for (const auto& c : checks)
        arr.push_back({{"check_name", c.name},
                       {"instances", c.instances},
                       {"passes", c.passes},
                       {"worst_rel_err", c.worst_rel_err},
                       {"skipped_degenerate", c.skipped_degenerate},
                       {"passed", c.passed()}});
    json j;
    j["checks"] = arr;
    j["all_passed"] = all_passed();
    return j.dump(2);
}

OracleReport run_oracle_suite(const std::string& suite, std::uint64_t seed,
                              int instance_count) {
    OracleReport report;
    bool all = suite == "all";
    if (all || suite == "grad")
        report.checks.push_back(check_gradients(seed, instance_count));
    if (all || suite == "proj") {
        report.checks.push_back(
            check_projection(seed + 1, std::max(5, instance_count / 4)));
        report.checks.push_back(check_brute_projection(seed + 2));
    }
    if (all || suite == "eigchange")
        report.checks.push_back(check_eigen_change(seed + 3, instance_count));
    if (all || suite == "gcl")
        report.checks.push_back(check_gcl_gradients(
            seed + 4, std::max(3, instance_count / 10)));
    if (report.checks.empty())
        throw std::invalid_argument("unknown oracle suite: " + suite);
    return report;
}

}  // namespace specaug
