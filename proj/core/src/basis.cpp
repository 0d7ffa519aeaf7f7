#include "aml/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace aml {

namespace {

// Emits exponent vectors of total order k in lexicographic order.
void emit_compositions(int pos, int remaining, int d, int k, std::vector<int>& e,
                       std::vector<MultiIndex>& terms) {
  if (pos == d - 1) {
    e[pos] = remaining;
    terms.push_back({e, k});
    return;
  }
  for (int v = 0; v <= remaining; ++v) {
    e[pos] = v;
    emit_compositions(pos + 1, remaining - v, d, k, e, terms);
  }
}

}  // namespace

double hermite_eval(int k, double x) {
  if (k < 0) throw std::invalid_argument("hermite order must be >= 0");
  double prev = 1.0;  // He_0
  if (k == 0) return prev;
  double cur = x;  // He_1
  for (int j = 1; j < k; ++j) {
    const double next = x * cur - static_cast<double>(j) * prev;
    prev = cur;
    cur = next;
  }
  double fact = 1.0;
  for (int j = 2; j <= k; ++j) fact *= j;
  return cur / std::sqrt(fact);
}

std::vector<MultiIndex> enumerate_terms(const BasisSpec& spec) {
  if (spec.d < 1 || spec.max_order < 1) {
    throw std::invalid_argument("basis requires d >= 1 and max_order >= 1");
  }
  std::vector<MultiIndex> terms;
  std::vector<int> e(spec.d, 0);
  if (spec.include_intercept) terms.push_back({e, 0});
  for (int k = 1; k <= spec.max_order; ++k) {
    emit_compositions(0, k, spec.d, k, e, terms);
  }
  return terms;
}

double order_term_count(int k, int d) {
  // C(k+d-1, k) computed multiplicatively.
  double c = 1.0;
  for (int i = 1; i <= k; ++i) {
    c *= static_cast<double>(d - 1 + i) / static_cast<double>(i);
  }
  return std::round(c);
}

double basis_weight(int k, int d, const BasisSpec& spec) {
  if (k == 0) return 1.0;
  if (k > spec.max_order) {
    throw std::invalid_argument("order exceeds basis max_order");
  }
  double scale = 1.0;
  if (spec.normalize_weights) {
    double s = 0.0;
    for (int j = 1; j <= spec.max_order; ++j) s += 1.0 / (static_cast<double>(j) * j);
    scale = 1.0 / std::sqrt(s);
  }
  return scale / (static_cast<double>(k) * std::sqrt(order_term_count(k, d)));
}

Eigen::MatrixXd design_matrix(const Eigen::Ref<const Eigen::MatrixXd>& X,
                              const BasisSpec& spec) {
  if (X.cols() != spec.d) {
    throw std::invalid_argument("design_matrix: X has wrong column count");
  }
  const auto terms = enumerate_terms(spec);
  const Eigen::Index n = X.rows();
  const Eigen::Index p = static_cast<Eigen::Index>(terms.size());

  // Precompute normalized Hermite values He_k(x)/sqrt(k!) for every
  // coordinate and order once; the tensor products then read from this
  // table.
  const int mo = spec.max_order;
  std::vector<Eigen::MatrixXd> herm(mo + 1);
  for (int k = 0; k <= mo; ++k) herm[k].resize(n, X.cols());
  herm[0].setOnes();
  if (mo >= 1) herm[1] = X;
  for (int k = 1; k < mo; ++k) {
    herm[k + 1] = X.cwiseProduct(herm[k]) - static_cast<double>(k) * herm[k - 1];
  }
  // Normalize each order by sqrt(k!).
  double fact = 1.0;
  for (int k = 2; k <= mo; ++k) {
    fact *= k;
    herm[k] /= std::sqrt(fact);
  }

  Eigen::MatrixXd Phi(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& term = terms[j];
    Eigen::VectorXd col = Eigen::VectorXd::Constant(
        n, basis_weight(term.total_order, spec.d, spec));
    for (int l = 0; l < spec.d; ++l) {
      const int e = term.exponents[l];
      if (e > 0) col.array() *= herm[e].col(l).array();
    }
    Phi.col(j) = col;
  }
  return Phi;
}

namespace {

// Appends indicator columns for one partition of the rows.
void append_partition(std::vector<std::vector<Eigen::Index>>&& groups,
                      std::vector<std::vector<Eigen::Index>>& columns) {
  for (auto& g : groups) {
    if (!g.empty()) columns.push_back(std::move(g));
  }
}

std::vector<std::vector<Eigen::Index>> histogram_bins(
    const Eigen::Ref<const Eigen::VectorXd>& e_hat, double width) {
  const double lo = e_hat.minCoeff();
  const double hi = e_hat.maxCoeff();
  const int nbins = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
  std::vector<std::vector<Eigen::Index>> bins(nbins);
  for (Eigen::Index i = 0; i < e_hat.size(); ++i) {
    int b = static_cast<int>(std::floor((e_hat[i] - lo) / width));
    b = std::clamp(b, 0, nbins - 1);
    bins[b].push_back(i);
  }
  return bins;
}

void dyadic_split(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  std::vector<Eigen::Index> rows, int depth, int feature,
                  std::vector<std::vector<Eigen::Index>>& leaves) {
  if (depth == 0 || rows.empty()) {
    leaves.push_back(std::move(rows));
    return;
  }
  const int f = feature % static_cast<int>(X.cols());
  std::vector<double> vals;
  vals.reserve(rows.size());
  for (auto i : rows) vals.push_back(X(i, f));
  std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
  const double median = vals[vals.size() / 2];

  std::vector<Eigen::Index> left, right;
  for (auto i : rows) {
    (X(i, f) < median ? left : right).push_back(i);
  }
  dyadic_split(X, std::move(left), depth - 1, feature + 1, leaves);
  dyadic_split(X, std::move(right), depth - 1, feature + 1, leaves);
}

}  // namespace

Eigen::MatrixXd extended_features(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                  const Eigen::Ref<const Eigen::VectorXd>& e_hat,
                                  const ExtendedFeatureSpec& spec,
                                  std::uint64_t /*seed*/) {
  if (e_hat.size() != X.rows()) {
    throw std::invalid_argument("extended_features: e_hat length mismatch");
  }
  if (!e_hat.allFinite()) {
    throw std::invalid_argument("extended_features: e_hat must be finite");
  }
  for (double w : spec.strata_widths) {
    if (!(w > 0.0)) throw std::invalid_argument("strata widths must be positive");
  }
  if (spec.dyadic_depth < 0) {
    throw std::invalid_argument("dyadic depth must be >= 0");
  }

  const Eigen::Index n = X.rows();
  std::vector<std::vector<Eigen::Index>> columns;
  for (double w : spec.strata_widths) {
    append_partition(histogram_bins(e_hat, w), columns);
  }
  if (spec.dyadic_depth > 0) {
    std::vector<Eigen::Index> all(n);
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    std::vector<std::vector<Eigen::Index>> leaves;
    dyadic_split(X, std::move(all), spec.dyadic_depth, 0, leaves);
    append_partition(std::move(leaves), columns);
  }

  const Eigen::Index q = static_cast<Eigen::Index>(columns.size());
  Eigen::MatrixXd Psi = Eigen::MatrixXd::Zero(n, q);
  for (Eigen::Index c = 0; c < q; ++c) {
    for (auto i : columns[c]) Psi(i, c) = 1.0;
  }
  return Psi;
}

}  // namespace aml
