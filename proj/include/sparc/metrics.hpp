#pragma once

// Evaluation metrics for a fitted coefficient vector e against a test split:
// MAE, MSE, SER, DoF, CLA and NNZ.

#include "sparc/data.hpp"
#include "sparc/prox.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace sparc {

struct MetricsReport {
  std::optional<double> mae;
  std::optional<double> mse;
  std::optional<double> ser;
  std::optional<double> dof;
  std::optional<double> cla;
  std::optional<double> nnz;

  /// Field names in serialization order.
  static const std::vector<std::string>& names() {
    static const std::vector<std::string> n{"MAE", "MSE", "SER", "DoF", "CLA", "NNZ"};
    return n;
  }

  std::optional<double> get(const std::string& name) const {
    if (name == "MAE") return mae;
    if (name == "MSE") return mse;
    if (name == "SER") return ser;
    if (name == "DoF") return dof;
    if (name == "CLA") return cla;
    if (name == "NNZ") return nnz;
    throw std::invalid_argument("unknown metric '" + name + "'");
  }

  void set(const std::string& name, std::optional<double> value) {
    if (name == "MAE") mae = value;
    else if (name == "MSE") mse = value;
    else if (name == "SER") ser = value;
    else if (name == "DoF") dof = value;
    else if (name == "CLA") cla = value;
    else if (name == "NNZ") nnz = value;
    else throw std::invalid_argument("unknown metric '" + name + "'");
  }
};

inline nlohmann::json to_json(const MetricsReport& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& name : MetricsReport::names()) {
    const auto v = m.get(name);
    j[name] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  }
  return j;
}

inline MetricsReport metrics_from_json(const nlohmann::json& j) {
  MetricsReport m;
  for (const auto& name : MetricsReport::names()) {
    if (j.contains(name) && !j.at(name).is_null()) m.set(name, j.at(name).get<double>());
  }
  return m;
}

inline std::string csv_header(const MetricsReport&) {
  std::string out;
  for (const auto& name : MetricsReport::names()) out += (out.empty() ? "" : ",") + name;
  return out;
}

/// Missing metrics are empty cells.
inline std::string csv_row(const MetricsReport& m) {
  std::string out;
  bool first = true;
  for (const auto& name : MetricsReport::names()) {
    if (!first) out += ',';
    first = false;
    if (const auto v = m.get(name)) out += detail::format_number(*v);
  }
  return out;
}

/// ||A (truth - e)||_1
inline double mae(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Vector>& truth,
                  const Eigen::Ref<const Vector>& e) {
  detail::require(truth.size() == e.size() && A.cols() == e.size(), "metric dimension mismatch");
  return (A * (truth - e)).lpNorm<1>();
}

/// ||A (truth - e)||_2^2
inline double mse(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Vector>& truth,
                  const Eigen::Ref<const Vector>& e) {
  detail::require(truth.size() == e.size() && A.cols() == e.size(), "metric dimension mismatch");
  return (A * (truth - e)).squaredNorm();
}

/// Empty when the ground truth is unknown.
inline std::optional<double> try_mae(const Eigen::Ref<const Matrix>& A, const std::optional<Vector>& truth,
                                     const Eigen::Ref<const Vector>& e) {
  if (!truth) return std::nullopt;
  return mae(A, *truth, e);
}

inline std::optional<double> try_mse(const Eigen::Ref<const Matrix>& A, const std::optional<Vector>& truth,
                                     const Eigen::Ref<const Vector>& e) {
  if (!truth) return std::nullopt;
  return mse(A, *truth, e);
}

/// Selection error rate in percent: 100 * || |truth| - |e| ||_1 / p.
inline double ser(const Eigen::Ref<const Vector>& truth, const Eigen::Ref<const Vector>& e) {
  detail::require(truth.size() == e.size() && e.size() > 0, "metric dimension mismatch");
  return 100.0 * (truth.cwiseAbs() - e.cwiseAbs()).lpNorm<1>() / static_cast<double>(e.size());
}

inline constexpr double kDefaultDofTolerance = 1e-4;
inline constexpr double kDefaultNnzTolerance = 1e-8;

inline Index nnz(const Eigen::Ref<const Vector>& e, double tol = kDefaultNnzTolerance) {
  return static_cast<Index>((e.array().abs() > tol).count());
}

/// Number of distinct magnitude classes among the entries counted by nnz.
/// Magnitudes a <= b are linked when b - a <= tol * (1 + b); classes are the
/// connected components of that relation.
inline Index dof(const Eigen::Ref<const Vector>& e, double tol = kDefaultDofTolerance,
                 double zero_tol = kDefaultNnzTolerance) {
  std::vector<double> mags;
  for (Index i = 0; i < e.size(); ++i) {
    if (std::abs(e[i]) > zero_tol) mags.push_back(std::abs(e[i]));
  }
  std::sort(mags.begin(), mags.end());
  // Linked partners of mags[i] form a contiguous run above i, so a class ends
  // at i exactly when no element at or below i reaches i + 1.
  Index classes = 0;
  std::size_t reach = 0;
  for (std::size_t i = 0; i < mags.size(); ++i) {
    if (i > reach || i == 0) ++classes;
    std::size_t j = std::max(reach, i);
    while (j + 1 < mags.size() && mags[j + 1] - mags[i] <= tol * (1.0 + mags[j + 1])) ++j;
    reach = std::max(reach, j);
  }
  return classes;
}

/// Percentage of rows with sign(a_i . e) == y_i, taking sign(0) = +1.
inline double cla(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Vector>& y,
                  const Eigen::Ref<const Vector>& e) {
  detail::require(A.rows() == y.size() && A.cols() == e.size() && y.size() > 0, "metric dimension mismatch");
  const Vector score = A * e;
  Index correct = 0;
  for (Index i = 0; i < y.size(); ++i) {
    if ((score[i] >= 0.0 ? 1.0 : -1.0) == y[i]) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(y.size());
}

struct MetricOptions {
  double dof_tolerance = kDefaultDofTolerance;
  double nnz_tolerance = kDefaultNnzTolerance;
  bool per_sample = false;  // divide MAE and MSE by the test row count
};

/// All metrics available for the dataset's task on its test rows. MAE, MSE
/// and SER need ground truth; CLA needs a classification task.
inline MetricsReport evaluate(const Dataset& ds, const Eigen::Ref<const Vector>& e,
                              const MetricOptions& options = {}) {
  const Matrix A = ds.design(Split::Test);
  MetricsReport m;
  if (ds.truth) {
    const double scale = options.per_sample && A.rows() > 0 ? 1.0 / static_cast<double>(A.rows()) : 1.0;
    m.mae = scale * mae(A, *ds.truth, e);
    m.mse = scale * mse(A, *ds.truth, e);
    m.ser = ser(*ds.truth, e);
  }
  if (ds.task == Task::Classification && A.rows() > 0) m.cla = cla(A, ds.response(Split::Test), e);
  m.dof = static_cast<double>(dof(e, options.dof_tolerance, options.nnz_tolerance));
  m.nnz = static_cast<double>(nnz(e, options.nnz_tolerance));
  return m;
}

}  // namespace sparc
