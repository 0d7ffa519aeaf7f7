#include "aml/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "aml/rng.hpp"

namespace aml {

namespace {

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string strip(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(strip(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError("non-numeric value '" + cell + "' at row " +
                    std::to_string(row) + ", column " + col);
  }
  if (!std::isfinite(value)) {
    throw DataError("non-finite value '" + cell + "' at row " +
                    std::to_string(row) + ", column " + col);
  }
  return value;
}

}  // namespace

Dataset load_csv(const std::string& path, int expected_dim) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path);
  const auto header = split_line(line);

  // Map header names to roles: y, w, or x<index>.
  int y_col = -1, w_col = -1;
  std::vector<int> x_col;  // x_col[j] = column index of x{j+1}
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = to_lower(header[c]);
    if (name == "y") {
      if (y_col >= 0) throw DataError("duplicate column y");
      y_col = static_cast<int>(c);
    } else if (name == "w") {
      if (w_col >= 0) throw DataError("duplicate column w");
      w_col = static_cast<int>(c);
    } else if (name.size() > 1 && name[0] == 'x') {
      int idx = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (ec != std::errc() || ptr != name.data() + name.size() || idx < 1) {
        throw DataError("unexpected column '" + header[c] + "'");
      }
      if (static_cast<std::size_t>(idx) > x_col.size()) x_col.resize(idx, -1);
      if (x_col[idx - 1] >= 0) throw DataError("duplicate column " + name);
      x_col[idx - 1] = static_cast<int>(c);
    } else {
      throw DataError("unexpected column '" + header[c] + "'");
    }
  }
  if (y_col < 0) throw DataError("column y not found");
  if (w_col < 0) throw DataError("column w not found");
  for (std::size_t j = 0; j < x_col.size(); ++j) {
    if (x_col[j] < 0) throw DataError("column x" + std::to_string(j + 1) + " not found");
  }
  const int d = static_cast<int>(x_col.size());
  if (d < 1) throw DataError("no covariate columns x1..xd found");
  if (expected_dim != kAutoDim && d != expected_dim) {
    throw DataError("expected " + std::to_string(expected_dim) +
                    " covariate columns, found " + std::to_string(d));
  }

  std::vector<std::vector<double>> rows;
  std::size_t row_no = 1;  // header is row 1
  while (std::getline(in, line)) {
    ++row_no;
    if (strip(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(row_no) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    std::vector<double> row(2 + d);
    row[0] = parse_cell(cells[y_col], row_no, "y");
    row[1] = parse_cell(cells[w_col], row_no, "w");
    for (int j = 0; j < d; ++j) {
      row[2 + j] = parse_cell(cells[x_col[j]], row_no, "x" + std::to_string(j + 1));
    }
    rows.push_back(std::move(row));
  }

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  if (n < 2) throw DataError("need at least 2 data rows, found " + std::to_string(n));

  Dataset ds;
  ds.X.resize(n, d);
  ds.W.resize(n);
  ds.Y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ds.Y[i] = rows[i][0];
    ds.W[i] = rows[i][1];
    for (int j = 0; j < d; ++j) ds.X(i, j) = rows[i][2 + j];
  }
  return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "y,w";
  for (Eigen::Index j = 0; j < ds.d(); ++j) out << ",x" << (j + 1);
  out << "\n";
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << sep;
  };
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    put(ds.Y[i], ',');
    put(ds.W[i], ds.d() > 0 ? ',' : '\n');
    for (Eigen::Index j = 0; j < ds.d(); ++j) {
      put(ds.X(i, j), j + 1 == ds.d() ? '\n' : ',');
    }
  }
}

std::vector<std::vector<Eigen::Index>> FoldAssignment::fold_indices() const {
  std::vector<std::vector<Eigen::Index>> out(K);
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    out[fold_of[i]].push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

FoldAssignment make_folds(Eigen::Index n, int K, std::uint64_t seed) {
  if (K < 2 || static_cast<Eigen::Index>(K) > n) {
    throw std::invalid_argument("fold count K must satisfy 2 <= K <= n");
  }
  std::vector<Eigen::Index> perm(n);
  for (Eigen::Index i = 0; i < n; ++i) perm[i] = i;
  Rng rng = Rng::from_key({seed, static_cast<std::uint64_t>(n),
                           static_cast<std::uint64_t>(K), 0x666f6c6473ULL});
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const Eigen::Index j =
        static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  FoldAssignment fa;
  fa.K = K;
  fa.fold_of.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    fa.fold_of[perm[i]] = static_cast<int>(i % K);
  }
  return fa;
}

}  // namespace aml
