#include "specaug/augment.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "specaug/csv.hpp"

namespace specaug {

namespace {

using nlohmann::json;

double clip01(double x) { return std::min(1.0, std::max(0.0, x)); }

// sum over the strict upper triangle of clip(raw - mu, 0, 1)
double shifted_clip_sum(const Matrix& raw, double mu) {
    double s = 0.0;
    for (int i = 0; i < raw.rows(); ++i)
        for (int j = i + 1; j < raw.cols(); ++j)
            s += clip01(raw(i, j) - mu);
    return s;
}

std::string mode_name(SchemeMode mode) {
    switch (mode) {
        case SchemeMode::kSingle: return "single";
        case SchemeMode::kDouble: return "double";
        case SchemeMode::kOpposite: return "opposite";
    }
    return "?";
}

SchemeMode mode_from_name(const std::string& name) {
    if (name == "single") return SchemeMode::kSingle;
    if (name == "double") return SchemeMode::kDouble;
    if (name == "opposite") return SchemeMode::kOpposite;
    throw std::invalid_argument("unknown scheme mode: " + name);
}

// one eigendecomposition of the relaxed graph, restricted to the selection
struct Decomp {
    Matrix aprime;
    EigenSystem es;  // selected pairs only, ascending
};

Decomp decompose(const Graph& g, const ComplementDirection& c,
                 const Matrix& delta, SpectralSelection sel,
                 const Matrix& noise) {
    Decomp d;
    d.aprime = g.adjacency + c.c.cwiseProduct(delta) + noise;
    Matrix l = normalized_laplacian(d.aprime);
    if (sel.is_full(g.n)) {
        d.es = eig_full(l);
    } else {
        d.es = eig_selective(l, sel).system;
    }
    return d;
}

// symmetric-pair gradient of sum_k w_k lambda_k w.r.t. Delta
Matrix delta_grad(const Decomp& d, const ComplementDirection& c,
                  const Vector& weights) {
    std::vector<int> idx(static_cast<size_t>(d.es.values.size()));
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    return c.c.cwiseProduct(
        laplacian_eigen_sum_grad(d.aprime, d.es, idx, weights));
}

Matrix normalized(const Matrix& grad) {
    double norm = grad.norm();
    return norm > 0.0 ? Matrix(grad / norm) : grad;
}

}  // namespace

void ProbabilityMatrix::validate(double epsilon) const {
    const int n = static_cast<int>(delta.rows());
    for (int i = 0; i < n; ++i) {
        if (delta(i, i) != 0.0)
            throw std::invalid_argument("probability matrix diagonal not zero");
        for (int j = 0; j < n; ++j) {
            if (delta(i, j) != delta(j, i))
                throw std::invalid_argument("probability matrix not symmetric");
            if (delta(i, j) < 0.0 || delta(i, j) > 1.0)
                throw std::invalid_argument("probability outside [0,1]");
        }
    }
    if (l1_norm() > epsilon + 1e-8)
        throw std::invalid_argument("probability matrix violates L1 budget");
}

ProbabilityMatrix project_to_budget(const Matrix& raw, double epsilon) {
    const int n = static_cast<int>(raw.rows());
    ProbabilityMatrix out;
    out.delta = Matrix::Zero(n, n);
    if (epsilon <= 0.0) return out;

    // budget counts both triangles; work on the upper one
    const double half_budget = 0.5 * epsilon;
    double clipped_sum = shifted_clip_sum(raw, 0.0);
    double mu = 0.0;
    if (clipped_sum > half_budget) {
        double lo = 0.0, hi = raw.maxCoeff();
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            double s = shifted_clip_sum(raw, mid);
            if (s > half_budget)
                lo = mid;
            else
                hi = mid;
            if (std::abs(s - half_budget) <= 1e-10) break;
        }
        mu = hi;  // the feasible side, so the result never exceeds the budget
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double v = clip01(raw(i, j) - mu);
            out.delta(i, j) = v;
            out.delta(j, i) = v;
        }
    return out;
}

ProbabilityMatrix pgd_step(const ProbabilityMatrix& delta, const Matrix& grad,
                           double lr, bool ascent, double epsilon) {
    Matrix raw = delta.delta + (ascent ? lr : -lr) * grad;
    raw = 0.5 * (raw + raw.transpose()).eval();
    raw.diagonal().setZero();
    return project_to_budget(raw, epsilon);
}

AugmentationScheme optimize_scheme(const Graph& g, const SchemeConfig& cfg) {
    if (cfg.steps < 1) throw std::invalid_argument("steps must be >= 1");
    if (cfg.epsilon < 0.0) throw std::invalid_argument("epsilon must be >= 0");
    const int n = g.n;
    ComplementDirection c = complement_direction(g);
    Matrix noise = symmetric_uniform_noise(
        n, NoiseSpec{cfg.noise_eps, cfg.noise_seed});

    Matrix removal_mask = g.adjacency;  // 1 on edges, 0 elsewhere

    auto init_delta = [&]() {
        Matrix raw = Matrix::Zero(n, n);
        if (cfg.init == SchemeInit::kZeroPlusJitter) {
            std::mt19937_64 rng(cfg.init_seed);
            double cap = std::min(0.01, cfg.epsilon / (double(n) * n));
            std::uniform_real_distribution<double> unif(0.0, cap);
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    double v = unif(rng);
                    raw(i, j) = v;
                    raw(j, i) = v;
                }
        } else {
            double v = cfg.epsilon / (double(n) * (n - 1));
            raw.setConstant(v);
            raw.diagonal().setZero();
        }
        if (cfg.removal_only) raw = raw.cwiseProduct(removal_mask).eval();
        return project_to_budget(raw, cfg.epsilon);
    };

    auto step = [&](const ProbabilityMatrix& delta, const Matrix& grad,
                    bool ascent) {
        ProbabilityMatrix next =
            pgd_step(delta, normalized(grad), cfg.lr, ascent, cfg.epsilon);
        if (cfg.removal_only) {
            next.delta = next.delta.cwiseProduct(removal_mask).eval();
        }
        return next;
    };

    auto lgs_weights = [](const Decomp& d) {
        return Vector(2.0 * d.es.values);
    };
    auto diff_weights = [](const Decomp& d, const Vector& ref) {
        return Vector(2.0 * (d.es.values - ref));
    };

    AugmentationScheme scheme;
    scheme.mode = cfg.mode;
    scheme.epsilon = cfg.epsilon;
    scheme.noise_seed = cfg.noise_seed;
    scheme.init_seed = cfg.init_seed;

    Matrix zero = Matrix::Zero(n, n);
    Decomp base = decompose(g, c, zero, cfg.selection, noise);
    const Vector base_values = base.es.values;
    scheme.lgs0 = base_values.squaredNorm();

    ProbabilityMatrix d1 = init_delta();
    ProbabilityMatrix d2 = init_delta();
    const bool has_d2 = cfg.mode != SchemeMode::kSingle;

    for (int t = 1; t <= cfg.steps; ++t) {
        TrajectoryPoint pt;
        pt.step = t;
        switch (cfg.mode) {
            case SchemeMode::kSingle: {
                Decomp dec = decompose(g, c, d1.delta, cfg.selection, noise);
                Matrix grad = delta_grad(dec, c, diff_weights(dec, base_values));
                d1 = step(d1, grad, /*ascent=*/true);
                Decomp after = decompose(g, c, d1.delta, cfg.selection, noise);
                pt.lgs1 = pt.lgs2 = after.es.values.squaredNorm();
                pt.objective = (after.es.values - base_values).squaredNorm();
                break;
            }
            case SchemeMode::kDouble: {
                // alternate one step on each branch per iteration
                Decomp dec2 = decompose(g, c, d2.delta, cfg.selection, noise);
                Decomp dec1 = decompose(g, c, d1.delta, cfg.selection, noise);
                Matrix g1 =
                    delta_grad(dec1, c, diff_weights(dec1, dec2.es.values));
                d1 = step(d1, g1, /*ascent=*/true);
                dec1 = decompose(g, c, d1.delta, cfg.selection, noise);
                Matrix g2 =
                    delta_grad(dec2, c, diff_weights(dec2, dec1.es.values));
                d2 = step(d2, g2, /*ascent=*/true);
                dec2 = decompose(g, c, d2.delta, cfg.selection, noise);
                pt.lgs1 = dec1.es.values.squaredNorm();
                pt.lgs2 = dec2.es.values.squaredNorm();
                pt.objective =
                    (dec1.es.values - dec2.es.values).squaredNorm();
                break;
            }
            case SchemeMode::kOpposite: {
                Decomp dec1 = decompose(g, c, d1.delta, cfg.selection, noise);
                d1 = step(d1, delta_grad(dec1, c, lgs_weights(dec1)),
                          /*ascent=*/true);
                Decomp dec2 = decompose(g, c, d2.delta, cfg.selection, noise);
                d2 = step(d2, delta_grad(dec2, c, lgs_weights(dec2)),
                          /*ascent=*/false);
                pt.lgs1 = decompose(g, c, d1.delta, cfg.selection, noise)
                              .es.values.squaredNorm();
                pt.lgs2 = decompose(g, c, d2.delta, cfg.selection, noise)
                              .es.values.squaredNorm();
                pt.objective = pt.lgs1;
                break;
            }
        }
        pt.ratio1 = pt.lgs1 / scheme.lgs0;
        pt.ratio2 = pt.lgs2 / scheme.lgs0;
        scheme.trajectory.push_back(pt);
    }

    scheme.delta1 = d1;
    if (has_d2) scheme.delta2 = d2;
    return scheme;
}

PerturbationSample sample_perturbation(const ProbabilityMatrix& delta,
                                       std::uint64_t seed) {
    const int n = static_cast<int>(delta.delta.rows());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    PerturbationSample e;
    e.e = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (unif(rng) < delta.delta(i, j)) {
                e.e(i, j) = 1.0;
                e.e(j, i) = 1.0;
            }
        }
    return e;
}

Graph sample_view(const Graph& g, const ProbabilityMatrix& delta,
                  std::uint64_t seed) {
    return apply_perturbation(g, complement_direction(g),
                              sample_perturbation(delta, seed));
}

InterIntraSummary inter_intra_probability_summary(
    const Graph& g, const ProbabilityMatrix& delta,
    const std::vector<int>& labels) {
    if (static_cast<int>(labels.size()) != g.n)
        throw std::invalid_argument("labels length mismatch");
    double sum[4] = {0, 0, 0, 0};
    int count[4] = {0, 0, 0, 0};
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j) {
            bool edge = g.adjacency(i, j) != 0.0;
            bool inter = labels[i] != labels[j];
            int slot = (edge ? 0 : 2) + (inter ? 0 : 1);
            sum[slot] += delta.delta(i, j);
            ++count[slot];
        }
    InterIntraSummary s;
    s.mean_inter_remove = count[0] ? sum[0] / count[0] : 0.0;
    s.mean_intra_remove = count[1] ? sum[1] / count[1] : 0.0;
    s.mean_inter_add = count[2] ? sum[2] / count[2] : 0.0;
    s.mean_intra_add = count[3] ? sum[3] / count[3] : 0.0;
    return s;
}

namespace {

json delta_to_triplets(const Matrix& delta) {
    json arr = json::array();
    for (int i = 0; i < delta.rows(); ++i)
        for (int j = i + 1; j < delta.cols(); ++j)
            if (delta(i, j) > 1e-12)
                arr.push_back({i, j, delta(i, j)});
    return arr;
}

Matrix triplets_to_delta(const json& arr, int n) {
    Matrix delta = Matrix::Zero(n, n);
    for (const auto& t : arr) {
        int i = t[0], j = t[1];
        double p = t[2];
        delta(i, j) = p;
        delta(j, i) = p;
    }
    return delta;
}

}  // namespace

std::string scheme_to_json(const AugmentationScheme& scheme, int n) {
    json j;
    j["n"] = n;
    j["epsilon"] = scheme.epsilon;
    j["mode"] = mode_name(scheme.mode);
    j["seeds"] = {{"noise", scheme.noise_seed}, {"init", scheme.init_seed}};
    j["lgs0"] = scheme.lgs0;
    j["delta1"] = delta_to_triplets(scheme.delta1.delta);
    if (scheme.delta2)
        j["delta2"] = delta_to_triplets(scheme.delta2->delta);
    json traj = json::array();
    for (const auto& pt : scheme.trajectory)
        traj.push_back({{"step", pt.step},
                        {"lgs1", pt.lgs1},
                        {"lgs2", pt.lgs2},
                        {"ratio1", pt.ratio1},
                        {"ratio2", pt.ratio2}});
    j["trajectory"] = traj;
    return j.dump(2);
}

AugmentationScheme scheme_from_json(const std::string& text) {
    json j = json::parse(text);
    const int n = j.at("n");
    AugmentationScheme scheme;
    scheme.epsilon = j.at("epsilon");
    scheme.mode = mode_from_name(j.at("mode"));
    scheme.noise_seed = j.at("seeds").at("noise");
    scheme.init_seed = j.at("seeds").at("init");
    scheme.lgs0 = j.value("lgs0", 0.0);
    scheme.delta1.delta = triplets_to_delta(j.at("delta1"), n);
    if (j.contains("delta2")) {
        ProbabilityMatrix d2;
        d2.delta = triplets_to_delta(j.at("delta2"), n);
        scheme.delta2 = d2;
    }
    for (const auto& pt : j.at("trajectory")) {
        TrajectoryPoint p;
        p.step = pt.at("step");
        p.lgs1 = pt.at("lgs1");
        p.lgs2 = pt.at("lgs2");
        p.ratio1 = pt.at("ratio1");
        p.ratio2 = pt.at("ratio2");
        scheme.trajectory.push_back(p);
    }
    return scheme;
}

std::string trajectory_to_csv(const AugmentationScheme& scheme) {
    std::ostringstream out;
    out << "step,lgs1,lgs2,ratio1,ratio2\n";
    for (const auto& pt : scheme.trajectory)
        out << pt.step << "," << g17(pt.lgs1) << "," << g17(pt.lgs2) << ","
            << g17(pt.ratio1) << "," << g17(pt.ratio2) << "\n";
    return out.str();
}

}  // namespace specaug
