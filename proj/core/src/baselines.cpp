#include "specaug/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include "specaug/spectral.hpp"

namespace specaug {

namespace {

// k-means with k-means++ style seeding, fixed iteration cap
std::vector<int> kmeans(const Matrix& points, int k, std::mt19937_64& rng,
                        int max_iters, double* inertia_out) {
    const int n = static_cast<int>(points.rows());
    const int d = static_cast<int>(points.cols());
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Matrix centers(k, d);
    centers.row(0) = points.row(pick(rng));
    Vector dist2 = Vector::Constant(n, std::numeric_limits<double>::max());
    for (int c = 1; c < k; ++c) {
        for (int i = 0; i < n; ++i)
            dist2(i) = std::min(
                dist2(i), (points.row(i) - centers.row(c - 1)).squaredNorm());
        double total = dist2.sum();
        if (total <= 0.0) {
            centers.row(c) = points.row(pick(rng));
            continue;
        }
        double r = unif(rng) * total;
        int chosen = n - 1;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += dist2(i);
            if (acc >= r) {
                chosen = i;
                break;
            }
        }
        centers.row(c) = points.row(chosen);
    }

    std::vector<int> labels(n, 0);
    for (int it = 0; it < max_iters; ++it) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::max();
            for (int c = 0; c < k; ++c) {
                double dd = (points.row(i) - centers.row(c)).squaredNorm();
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            if (labels[i] != best) {
                labels[i] = best;
                changed = true;
            }
        }
        centers.setZero();
        std::vector<int> counts(k, 0);
        for (int i = 0; i < n; ++i) {
            centers.row(labels[i]) += points.row(i);
            ++counts[labels[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0)
                centers.row(c) /= counts[c];
            else
                centers.row(c) = points.row(pick(rng));  // revive empty cluster
        }
        if (!changed && it > 0) break;
    }

    double inertia = 0.0;
    for (int i = 0; i < n; ++i)
        inertia += (points.row(i) - centers.row(labels[i])).squaredNorm();
    if (inertia_out) *inertia_out = inertia;
    return labels;
}

}  // namespace

ProbabilityMatrix uniform_scheme(const Graph& g, double sigma) {
    if (sigma < 0.0 || sigma > 1.0)
        throw std::invalid_argument("sigma must be in [0,1]");
    ProbabilityMatrix out;
    out.delta = sigma * g.adjacency;
    return out;
}

ClusterAssignment spectral_clustering(const Graph& g, int k,
                                      std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    if (k > g.n) throw std::invalid_argument("k > n");
    EigenSystem es = eig_full(normalized_laplacian(g));

    Matrix embedding = es.vectors.leftCols(k);
    for (int i = 0; i < g.n; ++i) {
        double norm = embedding.row(i).norm();
        if (norm > 1e-12) embedding.row(i) /= norm;
    }

    std::mt19937_64 rng(seed);
    std::vector<int> best_labels;
    double best_inertia = std::numeric_limits<double>::max();
    for (int restart = 0; restart < 20; ++restart) {
        double inertia = 0.0;
        std::vector<int> labels = kmeans(embedding, k, rng, 300, &inertia);
        if (inertia < best_inertia) {
            best_inertia = inertia;
            best_labels = labels;
        }
    }

    // relabel so every id in [0,k') is used
    std::map<int, int> remap;
    for (int& l : best_labels) {
        auto [it, inserted] =
            remap.emplace(l, static_cast<int>(remap.size()));
        l = it->second;
    }
    return {best_labels, static_cast<int>(remap.size())};
}

int eigengap_cluster_count(const Graph& g, int max_k) {
    EigenSystem es = eig_full(normalized_laplacian(g));
    int limit = std::min(max_k, g.n - 1);
    int best_k = 2;
    double best_gap = -1.0;
    for (int i = 1; i <= limit; ++i) {
        double gap = es.values(i) - es.values(i - 1);
        if (gap > best_gap) {
            best_gap = gap;
            best_k = std::max(2, i);
        }
    }
    return best_k;
}

ProbabilityMatrix clustered_scheme(const Graph& g, double sigma,
                                   const ClusterAssignment& clusters,
                                   bool* warning_clamped) {
    if (static_cast<int>(clusters.labels.size()) != g.n)
        throw std::invalid_argument("cluster labels length mismatch");
    const int m = g.edge_count();
    int m_inter = 0;
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            if (g.adjacency(i, j) != 0.0 &&
                clusters.labels[i] != clusters.labels[j])
                ++m_inter;
    const int m_intra = m - m_inter;

    if (warning_clamped) *warning_clamped = false;
    if (m_inter == 0) return uniform_scheme(g, sigma);  // degenerate partition

    double sigma_inter =
        std::min(1.2 * sigma, sigma * double(m) / double(m_inter));
    double sigma_intra =
        (m_intra > 0)
            ? (sigma * m - sigma_inter * m_inter) / double(m_intra)
            : 0.0;
    if (m_intra == 0) sigma_inter = std::min(1.0, sigma * m / double(m_inter));
    if (sigma_intra < 0.0 || sigma_intra > 1.0) {
        sigma_intra = std::min(1.0, std::max(0.0, sigma_intra));
        if (warning_clamped) *warning_clamped = true;
    }

    ProbabilityMatrix out;
    out.delta = Matrix::Zero(g.n, g.n);
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j) {
            if (g.adjacency(i, j) == 0.0) continue;
            double p = (clusters.labels[i] != clusters.labels[j]) ? sigma_inter
                                                                  : sigma_intra;
            out.delta(i, j) = p;
            out.delta(j, i) = p;
        }
    return out;
}

std::vector<SchemeComparisonRow> compare_spectral_change(
    const Graph& g,
    const std::vector<std::pair<std::string, ProbabilityMatrix>>& schemes,
    double sigma, int samples, std::uint64_t seed, int low_k) {
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    std::vector<SchemeComparisonRow> rows;
    for (const auto& [name, delta] : schemes) {
        double sum = 0.0, sum_sq = 0.0;
        for (int s = 0; s < samples; ++s) {
            Graph view = sample_view(g, delta, seed + static_cast<std::uint64_t>(s));
            double dist = spectral_distance(g, view, low_k);
            sum += dist;
            sum_sq += dist * dist;
        }
        double mean = sum / samples;
        double var = std::max(0.0, sum_sq / samples - mean * mean);
        rows.push_back({name, sigma, mean, std::sqrt(var), samples});
    }
    return rows;
}

double adjusted_rand_index(const std::vector<int>& a,
                           const std::vector<int>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("labelings differ in length");
    const int n = static_cast<int>(a.size());
    std::map<std::pair<int, int>, long long> contingency;
    std::map<int, long long> row_sum, col_sum;
    for (int i = 0; i < n; ++i) {
        ++contingency[{a[i], b[i]}];
        ++row_sum[a[i]];
        ++col_sum[b[i]];
    }
    auto choose2 = [](long long x) { return x * (x - 1) / 2.0; };
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, c] : contingency) sum_ij += choose2(c);
    for (const auto& [key, c] : row_sum) sum_a += choose2(c);
    for (const auto& [key, c] : col_sum) sum_b += choose2(c);
    double total = choose2(n);
    double expected = sum_a * sum_b / total;
    double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;
    return (sum_ij - expected) / (max_index - expected);
}

}  // namespace specaug
