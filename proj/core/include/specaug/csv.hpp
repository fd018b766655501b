#pragma once

#include <string>
#include <vector>

#include "specaug/graph.hpp"

namespace specaug {

/// 17-significant-digit float formatting: round-trip exact for doubles.
std::string g17(double x);

/// Headerless CSV matrix (row i = node i), '.' decimal.
Matrix load_csv_matrix(const std::string& path);
void save_csv_matrix(const Matrix& m, const std::string& path);

std::vector<int> load_labels_csv(const std::string& path);
void save_labels_csv(const std::vector<int>& labels, const std::string& path);

/// Header + rows, comma separated.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace specaug
