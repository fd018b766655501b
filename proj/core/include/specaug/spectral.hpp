#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "specaug/graph.hpp"

namespace specaug {

/// Eigenvalues ascending with matching orthonormal eigenvectors as columns.
/// Sign convention: first component of each vector with |.| > 1e-12 is
/// positive, so fixtures are reproducible across runs.
struct EigenSystem {
    Vector values;   // length p
    Matrix vectors;  // n x p
};

/// Retain the K lowest and K highest eigenpairs. K <= 0 or 2K >= n means the
/// full spectrum.
struct SpectralSelection {
    int k_extreme = 0;
    bool is_full(int n) const { return k_extreme <= 0 || 2 * k_extreme >= n; }
};

/// Symmetric uniform noise eps*(N+N^T)/2, N_ij ~ U(0,1), zero diagonal;
/// added to the relaxed adjacency to break eigenvalue multiplicity so the
/// per-eigenvalue derivative u_k u_k^T is defined.
struct NoiseSpec {
    double magnitude = 0.0;
    std::uint64_t seed = 0;
};

Matrix symmetric_uniform_noise(int n, const NoiseSpec& spec);

EigenSystem eig_full(const Matrix& l);

struct SelectiveResult {
    EigenSystem system;
    bool lanczos_fallback = false;  // true if we fell back to eig_full
};

/// K smallest and K largest eigenpairs via Lanczos with full
/// reorthogonalization; smallest found on 2I - L and mapped back. Falls back
/// to eig_full on non-convergence or degenerate selection.
SelectiveResult eig_selective(const Matrix& l, SpectralSelection sel);

/// Indices into a length-n ascending spectrum retained by the selection.
std::vector<int> selected_indices(int n, SpectralSelection sel);

struct ProbabilityMatrix;  // augment.hpp

/// Relaxed adjacency A + C o Delta (+ noise) used by the spectral objective.
Matrix relaxed_adjacency(const Graph& g, const ComplementDirection& c,
                         const Matrix& delta, const NoiseSpec& noise);

/// L_GS(Delta) = sum over the selection of lambda_k^2 for
/// Lap(A + C o Delta + noise).
double spectrum_norm_sq(const Graph& g, const ComplementDirection& c,
                        const Matrix& delta, SpectralSelection sel,
                        const NoiseSpec& noise);

struct GradResult {
    Matrix grad;                    // symmetric, zero diagonal
    bool degenerate_warning = false;  // min selected eigengap < 1e-10
};

/// d L_GS / d Delta with the symmetric-pair convention: Delta_ij and
/// Delta_ji move together and the same derivative is reported on both
/// entries. Includes the degree dependence of D^{-1/2}.
GradResult spectrum_norm_grad(const Graph& g, const ComplementDirection& c,
                              const Matrix& delta, SpectralSelection sel,
                              const NoiseSpec& noise);

/// Chain-rule core shared by all spectral objectives: given the relaxed
/// adjacency and per-eigenvalue weights w_k over `idx`, returns the
/// symmetric-pair gradient of sum_k w_k * lambda_k w.r.t. the adjacency
/// entries (so dF/dDelta = C o result).
Matrix laplacian_eigen_sum_grad(const Matrix& aprime, const EigenSystem& es,
                                const std::vector<int>& idx,
                                const Vector& weights,
                                double degree_floor = 1e-8);

/// L2 distance of ascending normalized-Laplacian spectra. low_k > 0
/// restricts the comparison to the low_k smallest eigenvalues (the
/// cluster-sensitive end of the spectrum); low_k = 0 compares the full
/// spectra.
double spectral_distance(const Graph& g1, const Graph& g2, int low_k = 0);

/// Second-smallest normalized-Laplacian eigenvalue (Fiedler value).
double algebraic_connectivity(const Graph& g);

/// Number of eigenvalues below tol = number of connected components.
int connected_components_spectral(const Graph& g, double tol = 1e-8);

struct DiameterBounds {
    double lower = 0.0;   // 4 / (n * lambda_2), second smallest nonzero
    double upper = 0.0;   // r - 1 where r = distinct eigenvalue count
    int exact = 0;        // BFS diameter
};

/// Spectral diameter bounds plus the exact BFS diameter for validation.
/// Throws std::domain_error on disconnected graphs.
DiameterBounds diameter_bounds(const Graph& g);

/// D(v_i, v_j) = sum_l exp(-t*lambda_l)^2 (u_l[i] - u_l[j])^2.
double diffusion_distance(const Graph& g, int i, int j, double t);

/// U g(Lambda) U^T x.
Vector apply_spectral_filter(const Graph& g, const Vector& signal,
                             const std::function<double(double)>& filter);

/// First-order change of the k-th normalized-Laplacian eigenvalue when
/// flipping edge (i,j): -dw (2 u_ki u_kj - lambda (u_ki^2 + u_kj^2)) with
/// dw = 1 - 2 A_ij, u the D-normalized generalized eigenvector v/sqrt(d)
/// and lambda = 1 - lambda_k the adjacency generalized eigenvalue.
double first_order_eigen_change(const EigenSystem& es, const Graph& g, int i,
                                int j, int k);

}  // namespace specaug
