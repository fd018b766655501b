#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specaug/graph.hpp"
#include "specaug/spectral.hpp"

namespace specaug {

/// Bernoulli flip probabilities: symmetric, zero diagonal, entries in [0,1],
/// entrywise L1 norm (both triangles) <= epsilon.
struct ProbabilityMatrix {
    Matrix delta;

    double l1_norm() const { return delta.cwiseAbs().sum(); }
    void validate(double epsilon) const;
};

enum class SchemeMode { kSingle, kDouble, kOpposite };
enum class SchemeInit { kZeroPlusJitter, kUniformBudget };

struct SchemeConfig {
    SchemeMode mode = SchemeMode::kOpposite;
    double epsilon = 0.0;         // matrix-L1 budget, both triangles counted
    int steps = 50;
    double lr = 1.0;              // step size on the Frobenius-normalized gradient
    SpectralSelection selection;  // default full spectrum
    double noise_eps = 1e-6;
    std::uint64_t noise_seed = 0;
    SchemeInit init = SchemeInit::kZeroPlusJitter;
    std::uint64_t init_seed = 0;
    bool removal_only = false;    // zero Delta on non-edge slots every step
};

struct TrajectoryPoint {
    int step = 0;
    double lgs1 = 0.0;   // L_GS(Delta_1)
    double lgs2 = 0.0;   // L_GS(Delta_2), = lgs1 for single mode
    double ratio1 = 1.0; // L_GS(Delta_1) / L_GS(0)
    double ratio2 = 1.0;
    double objective = 0.0;  // mode-specific objective being ascended
};

struct AugmentationScheme {
    SchemeMode mode = SchemeMode::kOpposite;
    double epsilon = 0.0;
    std::uint64_t noise_seed = 0;
    std::uint64_t init_seed = 0;
    ProbabilityMatrix delta1;
    std::optional<ProbabilityMatrix> delta2;
    std::vector<TrajectoryPoint> trajectory;
    double lgs0 = 0.0;   // spectrum norm of the unperturbed graph
};

/// Euclidean projection of a symmetric zero-diagonal matrix onto
/// [0,1]^{nxn} intersected with the L1 ball of radius epsilon. Entrywise
/// clip; if the clipped sum still exceeds epsilon, bisect the shift mu >= 0
/// so that sum_ij clip(raw_ij - mu, 0, 1) = epsilon.
ProbabilityMatrix project_to_budget(const Matrix& raw, double epsilon);

/// P_S[Delta +/- lr * grad].
ProbabilityMatrix pgd_step(const ProbabilityMatrix& delta, const Matrix& grad,
                           double lr, bool ascent, double epsilon);

/// Projected gradient optimization of the edge-flip probability matrices for
/// the three schemes. Deterministic given the config seeds; automorphism
/// noise is drawn once per run.
AugmentationScheme optimize_scheme(const Graph& g, const SchemeConfig& cfg);

/// Draw E_ij ~ Bernoulli(Delta_ij) on the upper triangle, mirror, apply.
Graph sample_view(const Graph& g, const ProbabilityMatrix& delta,
                  std::uint64_t seed);

PerturbationSample sample_perturbation(const ProbabilityMatrix& delta,
                                       std::uint64_t seed);

struct InterIntraSummary {
    double mean_inter_remove = 0.0;
    double mean_intra_remove = 0.0;
    double mean_inter_add = 0.0;
    double mean_intra_add = 0.0;
};

/// Mean Delta over the four slot classes (edge / non-edge x inter / intra
/// cluster).
InterIntraSummary inter_intra_probability_summary(
    const Graph& g, const ProbabilityMatrix& delta,
    const std::vector<int>& labels);

/// JSON round-trip: {n, epsilon, mode, seeds, delta1/delta2 sparse triplets
/// (p > 1e-12), trajectory}.
std::string scheme_to_json(const AugmentationScheme& scheme, int n);
AugmentationScheme scheme_from_json(const std::string& text);

/// Trajectory CSV: step, lgs1, lgs2, ratio1, ratio2.
std::string trajectory_to_csv(const AugmentationScheme& scheme);

}  // namespace specaug
