#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace specaug {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Undirected graph: symmetric adjacency with zero diagonal and entries in
/// [0,1]. Binary for observed graphs, fractional while an augmentation
/// scheme is being relaxed/optimized.
struct Graph {
    int n = 0;
    Matrix adjacency;                              // n x n
    std::optional<Matrix> features;                // n x d
    std::optional<std::vector<int>> node_labels;   // length n
    std::optional<Matrix> positions;               // n x 2, geometric graphs

    /// Nonzero entries of the strict upper triangle.
    int edge_count() const;
    bool is_binary(double tol = 0.0) const;
    /// Throws std::invalid_argument if symmetry / zero-diagonal / range
    /// invariants are violated.
    void validate() const;
};

/// C = complement direction, c_ij = +1 where an edge may be added,
/// -1 where an edge may be removed, 0 on the diagonal.
struct ComplementDirection {
    Matrix c;
};

/// One Bernoulli draw of edge flips: symmetric binary, zero diagonal.
struct PerturbationSample {
    Matrix e;
};

struct LoadStats {
    int self_loops_dropped = 0;
    int duplicates_merged = 0;
};

/// Builds a binary graph from an (i, j) edge list; symmetrizes, deduplicates
/// and drops self-loops.
Graph make_graph(int n, const std::vector<std::pair<int, int>>& edges,
                 LoadStats* stats = nullptr);

/// Reads a whitespace-separated "src dst [weight]" edge list with 0-based
/// node ids. If n < 0 the node count is max id + 1. Malformed lines raise
/// std::runtime_error with the line number.
Graph load_graph(const std::string& path, int n = -1, LoadStats* stats = nullptr);

void save_edge_list(const Graph& g, const std::string& path);

Vector degrees(const Graph& g);

/// C = (11^T - I - A) - A for binary A. Throws on non-binary input.
ComplementDirection complement_direction(const Graph& g);

/// L = I - D^{-1/2} A D^{-1/2} with degrees floored at degree_floor so
/// isolated nodes contribute an identity row/column. Symmetrized after
/// forming.
Matrix normalized_laplacian(const Matrix& adjacency, double degree_floor = 1e-8);
Matrix normalized_laplacian(const Graph& g, double degree_floor = 1e-8);

/// L_u = D - A.
Matrix unnormalized_laplacian(const Graph& g);

/// t(A) = A + C o E. Result stays binary/symmetric/zero-diagonal.
Graph apply_perturbation(const Graph& g, const ComplementDirection& c,
                         const PerturbationSample& e);

/// E[t(A)] = A + C o Delta, entries in [0,1].
Matrix expected_view(const Graph& g, const ComplementDirection& c,
                     const Matrix& delta);

/// Balanced stochastic block model; node_labels = cluster ids.
Graph generate_sbm(int n, int k, double p_in, double p_out, std::uint64_t seed);

/// Uniform points in the unit square, edge iff distance <= radius.
/// Positions retained for plotting export.
Graph generate_random_geometric(int n, double radius, std::uint64_t seed);

}  // namespace specaug
