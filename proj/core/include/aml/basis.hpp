#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace aml {

// Weighted tensor-product Hermite dictionary. Terms are products of
// probabilists' Hermite polynomials normalized to unit variance under the
// standard Gaussian, downweighted by order so higher-order terms carry
// geometrically less of the class's mass.
struct BasisSpec {
  int d = 1;
  int max_order = 3;
  bool normalize_weights = true;
  bool include_intercept = true;
};

struct MultiIndex {
  std::vector<int> exponents;  // length d
  int total_order = 0;
};

// Data-adaptive binary features used to widen the balance class: histogram
// strata of an estimated treatment intensity plus recursive dyadic median
// partitions of the covariates.
struct ExtendedFeatureSpec {
  std::vector<double> strata_widths{0.05, 0.1, 0.2};
  int dyadic_depth = 3;
  bool enabled = false;
};

// He_k(x) / sqrt(k!), evaluated by the three-term recurrence
// He_{k+1}(x) = x He_k(x) - k He_{k-1}(x).
double hermite_eval(int k, double x);

// All multi-indices with total order <= max_order, sorted by total order
// then lexicographically on exponents; the all-zero index comes first when
// include_intercept is set.
std::vector<MultiIndex> enumerate_terms(const BasisSpec& spec);

// Number of d-variate monomials of total order exactly k: C(k+d-1, k).
double order_term_count(int k, int d);

// Weight a_j shared by all order-k terms: c / (k sqrt(n_{k,d})), where c
// rescales the truncated dictionary so sum_{j>=1} a_j^2 = 1 exactly when
// normalize_weights is set (c = 1 otherwise). The intercept weight is 1.
double basis_weight(int k, int d, const BasisSpec& spec);

// n x p matrix whose column j evaluates the j-th weighted term on each row
// of X.
Eigen::MatrixXd design_matrix(const Eigen::Ref<const Eigen::MatrixXd>& X,
                              const BasisSpec& spec);

// Binary partition features: for each configured width, indicators of
// nonempty histogram bins of e_hat covering [min e_hat, max e_hat]; plus
// leaf indicators of depth-`dyadic_depth` recursive median splits cycling
// covariates in index order. Columns are raw 0/1 indicators: entering the
// balance class at unit scale is what forces near-exact per-stratum
// balance, the entire point of the widened class. The seed is reserved for
// randomized partition schemes; the two implemented here are deterministic.
Eigen::MatrixXd extended_features(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                  const Eigen::Ref<const Eigen::VectorXd>& e_hat,
                                  const ExtendedFeatureSpec& spec,
                                  std::uint64_t seed = 0);

}  // namespace aml
