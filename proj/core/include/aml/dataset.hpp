#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aml {

// Observed sample: covariates X (n x d), treatment/indicator W, outcome Y.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd W;
  Eigen::VectorXd Y;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index d() const { return X.cols(); }
};

// Schema or value problem in user-supplied data; the message carries the
// row/column location when one applies.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kAutoDim = -1;

// Reads a comma-separated file with a header naming columns y, w, x1..xd
// (case-insensitive, any order). expected_dim pins d; kAutoDim infers it
// from the header. Rejects missing/unknown columns, non-numeric cells,
// non-finite values, and n < 2, reporting the offending row and column.
Dataset load_csv(const std::string& path, int expected_dim = kAutoDim);

// Inverse of load_csv up to numeric formatting (17 significant digits).
void write_csv(const Dataset& ds, const std::string& path);

// Cross-fitting fold labels: fold_of[i] in [0, K), every fold nonempty,
// sizes differing by at most one.
struct FoldAssignment {
  std::vector<int> fold_of;
  int K = 0;

  Eigen::Index n() const { return static_cast<Eigen::Index>(fold_of.size()); }
  std::vector<std::vector<Eigen::Index>> fold_indices() const;
};

// Pure function of (n, K, seed): a seeded shuffle dealt round-robin.
FoldAssignment make_folds(Eigen::Index n, int K, std::uint64_t seed);

}  // namespace aml
