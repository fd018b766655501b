#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "specaug/graph.hpp"

namespace specaug {

struct FdConfig {
    double step_h = 1e-5;
    double rtol = 1e-4;
    double atol = 1e-8;
};

/// Central-difference gradient of a scalar matrix function, perturbing each
/// upper-triangle entry and its mirror together, result mirrored. Throws on
/// non-finite evaluations.
Matrix fd_gradient(const std::function<double(const Matrix&)>& scalar_fn,
                   const Matrix& point, const FdConfig& cfg = {});

/// lambda_k under an edge flip of weight w at (i,j), computed by two full
/// decompositions with sorted-index pairing. Independent of the first-order
/// prediction it validates.
double exact_eigen_change(const Graph& g, int i, int j, int k,
                          double weight = 1.0);

/// Brute-force grid search over the constraint set for n <= 3 free entries:
/// true iff no grid point beats project_to_budget's output by more than the
/// grid resolution allows.
bool brute_projection_check(const Matrix& raw, double epsilon,
                            double resolution);

struct OracleCheckReport {
    std::string name;
    int instances = 0;
    int passes = 0;
    double worst_rel_err = 0.0;
    int skipped_degenerate = 0;
    // fraction of instances that must pass (1.0 for exact checks, 0.9 for
    // the statistical linearization-scaling check)
    double required_fraction = 1.0;
    bool passed() const {
        return instances > 0 &&
               passes >= required_fraction * instances - 1e-12;
    }
};

struct OracleReport {
    std::vector<OracleCheckReport> checks;
    bool all_passed() const;
    std::string to_json() const;
};

/// Suites: "grad", "proj", "eigchange", "gcl", or "all". instance_count
/// scales the randomized instances per check.
OracleReport run_oracle_suite(const std::string& suite, std::uint64_t seed,
                              int instance_count);

}  // namespace specaug
