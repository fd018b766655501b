#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specaug/augment.hpp"
#include "specaug/graph.hpp"

namespace specaug {

struct ClusterAssignment {
    std::vector<int> labels;  // length n, ids in [0, k)
    int k = 0;
};

/// Delta_ij = sigma on edges, 0 elsewhere.
ProbabilityMatrix uniform_scheme(const Graph& g, double sigma);

/// Ng-Jordan-Weiss spectral clustering: row-normalized embedding from the k
/// smallest normalized-Laplacian eigenvectors, k-means with 20 seeded
/// restarts, 300 iterations max.
ClusterAssignment spectral_clustering(const Graph& g, int k,
                                      std::uint64_t seed);

/// Largest gap among the first max_k normalized-Laplacian eigenvalues.
int eigengap_cluster_count(const Graph& g, int max_k = 10);

/// sigma_inter = min(1.2 sigma, sigma m / m_inter) on inter-cluster edges,
/// sigma_intra = (sigma m - sigma_inter m_inter) / m_intra on intra-cluster
/// edges, so sigma*m edges are removed in expectation. Out-of-range
/// sigma_intra is clamped (warning_clamped set).
ProbabilityMatrix clustered_scheme(const Graph& g, double sigma,
                                   const ClusterAssignment& clusters,
                                   bool* warning_clamped = nullptr);

struct SchemeComparisonRow {
    std::string scheme;
    double sigma = 0.0;
    double mean_distance = 0.0;
    double std_dev = 0.0;
    int samples = 0;
};

/// Mean +/- std of spectral_distance(g, sampled view) per scheme, sampling
/// with per-sample seeds seed + index. low_k > 0 compares only the low_k
/// smallest eigenvalues, where cluster-structure changes concentrate; the
/// full-spectrum distance is dominated by bulk eigenvalues and washes out
/// the inter/intra allocation difference at small graph sizes.
std::vector<SchemeComparisonRow> compare_spectral_change(
    const Graph& g,
    const std::vector<std::pair<std::string, ProbabilityMatrix>>& schemes,
    double sigma, int samples, std::uint64_t seed, int low_k = 0);

/// Adjusted Rand index between two labelings (test/acceptance utility).
double adjusted_rand_index(const std::vector<int>& a,
                           const std::vector<int>& b);

}  // namespace specaug
