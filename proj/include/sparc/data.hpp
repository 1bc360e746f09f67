#pragma once

// Datasets: the grouped-feature synthetic generator, CSV ingestion and
// writing, seeded train/validation/test splitting, column normalization and
// correlation screening.

#include "sparc/prox.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sparc {

enum class Task { Regression, Classification };
enum class Split { Train, Validation, Test };

inline const char* to_string(Task t) {
  return t == Task::Regression ? "regression" : "classification";
}

inline const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    default: return "test";
  }
}

inline Task parse_task(std::string_view s) {
  if (s == "regression") return Task::Regression;
  if (s == "classification") return Task::Classification;
  throw std::invalid_argument("unknown task '" + std::string(s) + "'");
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "validation") return Split::Validation;
  if (s == "test") return Split::Test;
  throw std::invalid_argument("unknown split label '" + std::string(s) + "'");
}

/// Error raised for malformed or unreadable data files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  Matrix A;
  Vector y;
  Task task = Task::Regression;
  std::optional<Vector> truth;
  std::vector<Split> splits;
  std::vector<std::string> feature_names;
  std::string label_name = "label";

  Index samples() const { return A.rows(); }
  Index features() const { return A.cols(); }

  std::vector<Index> rows(Split which) const {
    std::vector<Index> out;
    for (std::size_t i = 0; i < splits.size(); ++i) {
      if (splits[i] == which) out.push_back(static_cast<Index>(i));
    }
    return out;
  }

  Matrix design(Split which) const { return A(rows(which), Eigen::all); }
  Vector response(Split which) const { return y(rows(which)); }

  /// Throws std::invalid_argument when the invariants do not hold.
  void validate() const {
    detail::require(y.size() == A.rows(), "response length does not match design rows");
    detail::require(splits.size() == static_cast<std::size_t>(A.rows()),
                    "split labels do not cover every row");
    detail::require(feature_names.empty() || feature_names.size() == static_cast<std::size_t>(A.cols()),
                    "feature name count does not match columns");
    if (truth) detail::require(truth->size() == A.cols(), "ground truth length does not match columns");
    if (task == Task::Classification) {
      for (Index i = 0; i < y.size(); ++i) {
        detail::require(y[i] == 1.0 || y[i] == -1.0, "classification responses must be -1 or +1");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

enum class Normalization { UnitNorm, ZScore };

inline Normalization parse_normalization(std::string_view s) {
  if (s == "l2") return Normalization::UnitNorm;
  if (s == "zscore") return Normalization::ZScore;
  throw std::invalid_argument("unknown normalization '" + std::string(s) + "' (expected l2 or zscore)");
}

inline const char* to_string(Normalization n) { return n == Normalization::UnitNorm ? "l2" : "zscore"; }

struct NormalizedColumns {
  Matrix A;
  Vector scale;
  Vector center;  // zero for unit-norm scaling
};

/// Scales every column using statistics from `reference_rows` only:
/// unit Euclidean norm, or zero mean and unit standard deviation. The same
/// transform is applied to all rows. A column that vanishes on the reference
/// rows is an error.
inline NormalizedColumns normalize_columns(const Matrix& A, const std::vector<Index>& reference_rows,
                                           Normalization mode = Normalization::UnitNorm) {
  detail::require(!reference_rows.empty(), "normalization needs at least one reference row");
  const Matrix ref = A(reference_rows, Eigen::all);
  NormalizedColumns out{A, Vector(A.cols()), Vector::Zero(A.cols())};
  for (Index j = 0; j < A.cols(); ++j) {
    double scale = 0.0;
    if (mode == Normalization::UnitNorm) {
      scale = ref.col(j).norm();
    } else {
      out.center[j] = ref.col(j).mean();
      scale = std::sqrt((ref.col(j).array() - out.center[j]).square().mean());
    }
    if (!(scale > 0.0)) {
      throw std::invalid_argument("column " + std::to_string(j) + " is constant on the reference rows");
    }
    out.scale[j] = scale;
    out.A.col(j) = (A.col(j).array() - out.center[j]) / scale;
  }
  return out;
}

inline NormalizedColumns normalize_columns(const Matrix& A, Normalization mode = Normalization::UnitNorm) {
  std::vector<Index> all(static_cast<std::size_t>(A.rows()));
  std::iota(all.begin(), all.end(), Index{0});
  return normalize_columns(A, all, mode);
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

/// Grouped-feature regression benchmark. Each of `groups` blocks holds
/// `group_size` columns sharing a latent N(0,1) factor plus independent
/// noise; the remaining columns are independent N(0,1). The true vector is
/// `signal` on every grouped column and zero elsewhere.
struct SyntheticSpec {
  Index groups = 3;
  Index group_size = 5;
  Index irrelevant = 25;
  double signal = 3.0;
  double within_group_variance = 0.16;
  double noise_variance = 0.01;
  Index train = 20;
  Index validation = 40;
  Index test = 200;
  std::uint64_t seed = 0;
  Normalization normalization = Normalization::UnitNorm;

  Index features() const { return groups * group_size + irrelevant; }
  Index samples() const { return train + validation + test; }

  void validate() const {
    detail::require(groups >= 0 && group_size >= 1 && irrelevant >= 0 && features() >= 1,
                    "synthetic layout must have at least one feature");
    detail::require(within_group_variance >= 0.0 && noise_variance >= 0.0, "variances must be non-negative");
    detail::require(train >= 1 && validation >= 1 && test >= 1, "sample counts must be positive");
  }
};

using Rng = std::mt19937_64;

namespace detail {

// Draws n rows of the grouped design, unnormalized.
inline Matrix grouped_design(Index n, Index groups, Index group_size, Index irrelevant,
                             double within_group_variance, Rng& rng) {
  std::normal_distribution<double> standard(0.0, 1.0);
  const double noise_sd = std::sqrt(within_group_variance);
  const Index p = groups * group_size + irrelevant;
  Matrix A(n, p);
  std::vector<double> latent(static_cast<std::size_t>(groups));
  for (Index i = 0; i < n; ++i) {
    for (auto& z : latent) z = standard(rng);
    Index j = 0;
    for (Index g = 0; g < groups; ++g) {
      for (Index m = 0; m < group_size; ++m, ++j) {
        A(i, j) = latent[static_cast<std::size_t>(g)] + noise_sd * standard(rng);
      }
    }
    for (; j < p; ++j) A(i, j) = standard(rng);
  }
  return A;
}

inline Vector grouped_truth(Index groups, Index group_size, Index irrelevant, double signal) {
  Vector truth = Vector::Zero(groups * group_size + irrelevant);
  truth.head(groups * group_size).setConstant(signal);
  return truth;
}

}  // namespace detail

/// Rows are assigned to splits in generation order (train, validation,
/// test). Columns are normalized with training-row statistics before the
/// response is formed, so the ground truth lives in the normalized space.
inline Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Index n = spec.samples();
  const Matrix raw = detail::grouped_design(n, spec.groups, spec.group_size, spec.irrelevant,
                                            spec.within_group_variance, rng);
  Dataset ds;
  ds.task = Task::Regression;
  ds.splits.assign(static_cast<std::size_t>(spec.train), Split::Train);
  ds.splits.insert(ds.splits.end(), static_cast<std::size_t>(spec.validation), Split::Validation);
  ds.splits.insert(ds.splits.end(), static_cast<std::size_t>(spec.test), Split::Test);
  ds.A = normalize_columns(raw, ds.rows(Split::Train), spec.normalization).A;
  ds.truth = detail::grouped_truth(spec.groups, spec.group_size, spec.irrelevant, spec.signal);

  std::normal_distribution<double> noise(0.0, std::sqrt(spec.noise_variance));
  ds.y = ds.A * *ds.truth;
  for (Index i = 0; i < n; ++i) ds.y[i] += noise(rng);
  for (Index j = 0; j < ds.A.cols(); ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));
  return ds;
}

/// Classification counterpart: the same grouped design, with labels given by
/// the sign of a noisy planted linear score. Rows are unsplit (all train)
/// and unnormalized; callers split and normalize.
struct ClassificationSpec {
  Index samples = 300;
  Index groups = 3;
  Index group_size = 5;
  Index irrelevant = 85;
  double signal = 3.0;
  double within_group_variance = 0.16;
  double noise_variance = 1.0;
  std::uint64_t seed = 0;

  Index features() const { return groups * group_size + irrelevant; }
};

inline Dataset generate_synthetic_classification(const ClassificationSpec& spec) {
  detail::require(spec.samples >= 1 && spec.features() >= 1, "classification layout must be non-empty");
  detail::require(spec.within_group_variance >= 0.0 && spec.noise_variance >= 0.0,
                  "variances must be non-negative");
  Rng rng(spec.seed);
  Dataset ds;
  ds.task = Task::Classification;
  ds.A = detail::grouped_design(spec.samples, spec.groups, spec.group_size, spec.irrelevant,
                                spec.within_group_variance, rng);
  ds.truth = detail::grouped_truth(spec.groups, spec.group_size, spec.irrelevant, spec.signal);
  std::normal_distribution<double> noise(0.0, std::sqrt(spec.noise_variance));
  const Vector score = ds.A * *ds.truth;
  ds.y.resize(spec.samples);
  for (Index i = 0; i < spec.samples; ++i) ds.y[i] = score[i] + noise(rng) >= 0.0 ? 1.0 : -1.0;
  ds.splits.assign(static_cast<std::size_t>(spec.samples), Split::Train);
  for (Index j = 0; j < ds.A.cols(); ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));
  return ds;
}

// ---------------------------------------------------------------------------
// Splitting and screening
// ---------------------------------------------------------------------------

struct SplitFractions {
  double train = 0.5;
  double validation = 0.3;
  double test = 0.2;
};

/// Seeded uniform shuffle of the rows, then contiguous assignment: train
/// gets floor(f_train * n) rows, validation floor(f_val * n), test the rest.
inline Dataset split_dataset(Dataset ds, const SplitFractions& f, std::uint64_t seed) {
  detail::require(f.train > 0.0 && f.validation > 0.0 && f.test > 0.0,
                  "split fractions must all be positive");
  detail::require(std::abs(f.train + f.validation + f.test - 1.0) <= 1e-9,
                  "split fractions must sum to 1");
  const Index n = ds.samples();
  // The 1e-9 slack keeps products such as 0.29 * 100 from flooring to 28.
  const auto count = [n](double frac) {
    return static_cast<Index>(std::floor(frac * static_cast<double>(n) + 1e-9));
  };
  const Index n_train = count(f.train);
  const Index n_val = count(f.validation);
  const Index n_test = n - n_train - n_val;
  if (n_train < 1 || n_val < 1 || n_test < 1) {
    throw std::invalid_argument("split of " + std::to_string(n) + " rows leaves an empty partition (" +
                                std::to_string(n_train) + "/" + std::to_string(n_val) + "/" +
                                std::to_string(n_test) + ")");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  ds.splits.assign(static_cast<std::size_t>(n), Split::Test);
  for (Index r = 0; r < n_train + n_val; ++r) {
    ds.splits[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] =
        r < n_train ? Split::Train : Split::Validation;
  }
  return ds;
}

/// Indices (ascending) of the m columns with the largest absolute Pearson
/// correlation with y on the given rows. Constant columns score zero.
inline std::vector<Index> screen_by_correlation(const Matrix& A, const Vector& y,
                                                const std::vector<Index>& rows, Index m) {
  detail::require(m >= 1, "screen size must be positive");
  const Index p = A.cols();
  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  if (m >= p) return order;

  const Matrix sub = A(rows, Eigen::all);
  const Vector ys = y(rows);
  const Vector yc = ys.array() - ys.mean();
  std::vector<double> score(static_cast<std::size_t>(p), 0.0);
  for (Index j = 0; j < p; ++j) {
    const Vector xc = sub.col(j).array() - sub.col(j).mean();
    const double denom = xc.norm() * yc.norm();
    score[static_cast<std::size_t>(j)] = denom > 0.0 ? std::abs(xc.dot(yc)) / denom : 0.0;
  }
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(m));
  std::sort(order.begin(), order.end());
  return order;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

struct CsvOptions {
  std::string label_column;  // empty: last column
  Task task = Task::Regression;
  std::string split_column;  // read split labels from this column when present
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

inline std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace detail

/// Parses a header line followed by numeric rows. The label column becomes
/// y and all other columns (except the split column) become A in header
/// order. The label defaults to the last non-split column. For
/// classification any two distinct raw labels are accepted; the
/// lexicographically smaller maps to -1. Rows default to the train split.
inline Dataset load_csv(std::istream& in, const CsvOptions& options, const std::string& source = "<stream>") {
  const auto fail = [&](std::size_t line, const std::string& msg) -> DataError {
    return DataError(source + ":" + std::to_string(line) + ": " + msg);
  };

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::trim(line).empty()) {
      header = detail::split_fields(line);
      break;
    }
  }
  if (header.empty()) throw DataError(source + ": empty file");

  const auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  std::optional<std::size_t> split_idx;
  if (!options.split_column.empty()) split_idx = find_column(options.split_column);
  // Default label: the last column other than the split column.
  std::size_t label_idx = header.size() - 1;
  if (split_idx && *split_idx == label_idx && label_idx > 0) --label_idx;
  if (!options.label_column.empty()) {
    const auto found = find_column(options.label_column);
    if (!found) throw fail(line_no, "label column '" + options.label_column + "' not in header");
    label_idx = *found;
  }
  if (split_idx && *split_idx == label_idx) throw fail(line_no, "label and split columns coincide");

  Dataset ds;
  ds.task = options.task;
  ds.label_name = header[label_idx];
  std::vector<std::size_t> feature_idx;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_idx || (split_idx && c == *split_idx)) continue;
    feature_idx.push_back(c);
    ds.feature_names.push_back(header[c]);
  }

  std::vector<double> values;
  std::vector<std::string> raw_labels;
  std::vector<double> numeric_labels;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const std::vector<std::string> fields = detail::split_fields(line);
    if (fields.size() != header.size()) {
      throw fail(line_no, "row has " + std::to_string(fields.size()) + " fields, header has " +
                              std::to_string(header.size()));
    }
    for (std::size_t c : feature_idx) {
      const auto v = detail::parse_number(fields[c]);
      if (!v) throw fail(line_no, "non-numeric cell '" + fields[c] + "' in column '" + header[c] + "'");
      values.push_back(*v);
    }
    if (options.task == Task::Classification) {
      raw_labels.push_back(fields[label_idx]);
    } else {
      const auto v = detail::parse_number(fields[label_idx]);
      if (!v) throw fail(line_no, "non-numeric label '" + fields[label_idx] + "'");
      numeric_labels.push_back(*v);
    }
    if (split_idx) {
      try {
        ds.splits.push_back(parse_split(fields[*split_idx]));
      } catch (const std::invalid_argument& e) {
        throw fail(line_no, e.what());
      }
    } else {
      ds.splits.push_back(Split::Train);
    }
    ++rows;
  }

  const auto n = static_cast<Index>(rows);
  const auto p = static_cast<Index>(feature_idx.size());
  ds.A = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, p);
  ds.y.resize(n);
  if (options.task == Task::Classification) {
    const std::set<std::string> classes(raw_labels.begin(), raw_labels.end());
    if (classes.size() > 2) {
      throw DataError(source + ": classification label column '" + ds.label_name + "' has " +
                      std::to_string(classes.size()) + " distinct values");
    }
    const std::string negative = classes.empty() ? std::string() : *classes.begin();
    for (Index i = 0; i < n; ++i) {
      ds.y[i] = (classes.size() == 2 && raw_labels[static_cast<std::size_t>(i)] == negative) ? -1.0 : 1.0;
    }
  } else {
    for (Index i = 0; i < n; ++i) ds.y[i] = numeric_labels[static_cast<std::size_t>(i)];
  }
  return ds;
}

inline Dataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return load_csv(in, options, path);
}

/// Writes header + rows with shortest round-trip number formatting; the
/// label goes last, followed by an optional "split" column.
inline void write_csv(std::ostream& out, const Dataset& ds, bool with_split = false) {
  for (Index j = 0; j < ds.features(); ++j) {
    out << (ds.feature_names.empty() ? "x" + std::to_string(j + 1)
                                     : ds.feature_names[static_cast<std::size_t>(j)])
        << ',';
  }
  out << ds.label_name;
  if (with_split) out << ",split";
  out << '\n';
  for (Index i = 0; i < ds.samples(); ++i) {
    for (Index j = 0; j < ds.features(); ++j) out << detail::format_number(ds.A(i, j)) << ',';
    out << detail::format_number(ds.y[i]);
    if (with_split) out << ',' << to_string(ds.splits[static_cast<std::size_t>(i)]);
    out << '\n';
  }
}

inline void write_csv(const std::string& path, const Dataset& ds, bool with_split = false) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_csv(out, ds, with_split);
  if (!out) throw DataError("write failed for '" + path + "'");
}

/// Reads a (name, value) coefficient file as written by the CLI and returns
/// values aligned to `feature_names`; unnamed features are zero.
inline Vector load_coefficients(const std::string& path, const std::vector<std::string>& feature_names) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::map<std::string, double> named;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != 2) throw DataError(path + ":" + std::to_string(line_no) + ": expected 2 fields");
    if (header) {
      header = false;
      if (!detail::parse_number(fields[1])) continue;
    }
    const auto v = detail::parse_number(fields[1]);
    if (!v) throw DataError(path + ":" + std::to_string(line_no) + ": non-numeric coefficient");
    named[fields[0]] = *v;
  }
  Vector out = Vector::Zero(static_cast<Index>(feature_names.size()));
  for (std::size_t j = 0; j < feature_names.size(); ++j) {
    if (const auto it = named.find(feature_names[j]); it != named.end()) out[static_cast<Index>(j)] = it->second;
  }
  return out;
}

}  // namespace sparc
