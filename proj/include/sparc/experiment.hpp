#pragma once

// Validation-set hyperparameter search, seeded repetition loops, aggregation
// and report emission (CSV table, JSON detail, coefficient profile).

#include "sparc/data.hpp"
#include "sparc/metrics.hpp"
#include "sparc/prox.hpp"
#include "sparc/solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace sparc {

enum class Method { Lasso, ElasticNet, Oscar, Sparc };

inline const std::vector<Method>& all_methods() {
  static const std::vector<Method> m{Method::Lasso, Method::ElasticNet, Method::Oscar, Method::Sparc};
  return m;
}

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Lasso: return "lasso";
    case Method::ElasticNet: return "en";
    case Method::Oscar: return "oscar";
    default: return "sparc";
  }
}

inline Method parse_method(std::string_view s) {
  if (s == "lasso") return Method::Lasso;
  if (s == "en" || s == "elastic-net" || s == "elasticnet") return Method::ElasticNet;
  if (s == "oscar") return Method::Oscar;
  if (s == "sparc") return Method::Sparc;
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

/// `count` points spaced logarithmically from `lo` to `hi` inclusive.
inline std::vector<double> log_grid(double lo, double hi, int count) {
  detail::require(lo > 0.0 && hi >= lo && count >= 1, "invalid logarithmic grid");
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out.push_back(std::pow(10.0, std::log10(lo) + t * (std::log10(hi) - std::log10(lo))));
  }
  return out;
}

/// Per-method hyperparameter grids. Fits run in the listed order and each
/// warm-starts from the previous solution.
struct GridSpec {
  std::vector<double> lasso;
  std::vector<std::pair<double, double>> elastic_net;
  std::vector<std::pair<double, double>> oscar;
  std::vector<std::pair<double, Index>> sparc;

  /// Builds grids from a shared lambda list and a SPARC K list. Lambdas are
  /// visited from largest to smallest; two-parameter grids are the full
  /// Cartesian product with the first parameter outermost; SPARC iterates K
  /// outermost.
  static GridSpec from_lists(std::vector<double> lambdas, const std::vector<Index>& ks) {
    detail::require(!lambdas.empty(), "lambda grid must not be empty");
    std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
    GridSpec g;
    g.lasso = lambdas;
    for (double a : lambdas) {
      for (double b : lambdas) {
        g.elastic_net.emplace_back(a, b);
        g.oscar.emplace_back(a, b);
      }
    }
    for (Index k : ks) {
      for (double l : lambdas) g.sparc.emplace_back(l, k);
    }
    return g;
  }

  static std::vector<Index> default_k_grid() { return {5, 10, 15, 20, 25}; }

  /// Ten lambdas log-spaced on [1e-3, 10]; K in {5, 10, 15, 20, 25}.
  static GridSpec defaults() { return from_lists(log_grid(1e-3, 1e1, 10), default_k_grid()); }

  std::vector<Regularizer> points(Method m) const {
    std::vector<Regularizer> out;
    switch (m) {
      case Method::Lasso:
        for (double l : lasso) out.emplace_back(Lasso{l});
        break;
      case Method::ElasticNet:
        for (auto [a, b] : elastic_net) out.emplace_back(ElasticNet{a, b});
        break;
      case Method::Oscar:
        for (auto [a, b] : oscar) out.emplace_back(Oscar{a, b});
        break;
      case Method::Sparc:
        for (auto [l, k] : sparc) out.emplace_back(Sparc{l, k});
        break;
    }
    return out;
  }

  /// Drops SPARC points whose K exceeds p.
  GridSpec restricted_to(Index p) const {
    GridSpec g = *this;
    std::erase_if(g.sparc, [p](const auto& point) { return point.second > p; });
    return g;
  }
};

inline nlohmann::json to_json(const Regularizer& reg) {
  return std::visit(
      [](const auto& r) -> nlohmann::json {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Lasso>) return {{"method", "lasso"}, {"lambda1", r.lambda1}};
        else if constexpr (std::is_same_v<T, ElasticNet>)
          return {{"method", "en"}, {"lambda1", r.lambda1}, {"lambda2", r.lambda2}};
        else if constexpr (std::is_same_v<T, Oscar>)
          return {{"method", "oscar"}, {"lambda1", r.lambda1}, {"lambda2", r.lambda2}};
        else return {{"method", "sparc"}, {"lambda", r.lambda}, {"k", r.k}};
      },
      reg);
}

inline Regularizer regularizer_from_json(const nlohmann::json& j) {
  switch (parse_method(j.at("method").get<std::string>())) {
    case Method::Lasso: return Lasso{j.at("lambda1").get<double>()};
    case Method::ElasticNet: return ElasticNet{j.at("lambda1").get<double>(), j.at("lambda2").get<double>()};
    case Method::Oscar: return Oscar{j.at("lambda1").get<double>(), j.at("lambda2").get<double>()};
    default: return Sparc{j.at("lambda").get<double>(), j.at("k").get<Index>()};
  }
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

struct GridSearchResult {
  Regularizer best;
  std::size_t best_index = 0;
  Vector coefficients;
  double score = 0.0;  // validation MSE (regression) or CLA (classification)
};

/// Fits every grid point on the training rows and selects on the validation
/// rows: lowest prediction MSE for regression, highest CLA for
/// classification. Ties go to the smaller NNZ, then to the earlier point.
inline GridSearchResult grid_search(const Dataset& ds, const std::vector<Regularizer>& grid,
                                    const SolverConfig& cfg, const MetricOptions& metric_options = {}) {
  detail::require(!grid.empty(), "hyperparameter grid is empty");
  const Matrix A_train = ds.design(Split::Train);
  const Vector y_train = ds.response(Split::Train);
  const Matrix A_val = ds.design(Split::Validation);
  const Vector y_val = ds.response(Split::Validation);
  detail::require(A_train.rows() > 0 && A_val.rows() > 0, "grid search needs train and validation rows");
  const bool classify = ds.task == Task::Classification;

  std::optional<GridSearchResult> best;
  Index best_nnz = 0;
  Vector warm = Vector::Zero(ds.features());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const Objective obj(A_train, y_train, grid[g]);
    SolverResult fit = sparsa_solve(obj, cfg, warm);
    const double score = classify ? cla(A_val, y_val, fit.x) : (y_val - A_val * fit.x).squaredNorm();
    const Index fit_nnz = nnz(fit.x, metric_options.nnz_tolerance);
    const bool better = !best || (classify ? score > best->score : score < best->score) ||
                        (score == best->score && fit_nnz < best_nnz);
    if (better) {
      best = GridSearchResult{grid[g], g, fit.x, score};
      best_nnz = fit_nnz;
    }
    warm = std::move(fit.x);
  }
  return *best;
}

// ---------------------------------------------------------------------------
// Repetitions and reports
// ---------------------------------------------------------------------------

/// A dataset ready for fitting, plus the map from model coefficients back to
/// the source feature space.
struct PreparedData {
  Dataset data;
  std::vector<Index> columns;  // source column of each model column
  Vector scale;                // model coefficient = source coefficient * scale
};

/// Produces the dataset for one repetition from its derived seed.
using DataSource = std::function<PreparedData(std::uint64_t seed)>;

inline DataSource synthetic_source(SyntheticSpec spec) {
  return [spec](std::uint64_t seed) mutable {
    spec.seed = seed;
    PreparedData out{generate_synthetic(spec), {}, Vector::Ones(spec.features())};
    for (Index j = 0; j < spec.features(); ++j) out.columns.push_back(j);
    return out;
  };
}

struct PipelineOptions {
  SplitFractions fractions;
  Normalization normalization = Normalization::UnitNorm;
  std::optional<Index> screen;  // keep the top-m training-correlated columns
};

/// Re-splits a fixed dataset with each seed, normalizes with training-row
/// statistics and optionally screens columns (also on training rows).
/// Ground truth, if any, is mapped into the normalized space.
inline PreparedData prepare(const Dataset& source, const PipelineOptions& options, std::uint64_t seed) {
  Dataset split = split_dataset(source, options.fractions, seed);
  const std::vector<Index> train = split.rows(Split::Train);
  std::vector<Index> columns(static_cast<std::size_t>(source.features()));
  std::iota(columns.begin(), columns.end(), Index{0});
  if (options.screen) columns = screen_by_correlation(split.A, split.y, train, *options.screen);

  PreparedData out;
  out.columns = columns;
  Dataset& ds = out.data;
  ds.task = split.task;
  ds.y = split.y;
  ds.splits = split.splits;
  ds.label_name = split.label_name;
  const Matrix selected = split.A(Eigen::all, columns);
  const NormalizedColumns norm = normalize_columns(selected, train, options.normalization);
  ds.A = norm.A;
  out.scale = norm.scale;
  for (Index c : columns) {
    ds.feature_names.push_back(source.feature_names.empty()
                                   ? "x" + std::to_string(c + 1)
                                   : source.feature_names[static_cast<std::size_t>(c)]);
  }
  if (source.truth) ds.truth = (*source.truth)(columns).cwiseProduct(norm.scale);
  return out;
}

inline DataSource dataset_source(Dataset source, PipelineOptions options) {
  return [source = std::move(source), options](std::uint64_t seed) { return prepare(source, options, seed); };
}

inline DataSource classification_source(ClassificationSpec spec, PipelineOptions options = {}) {
  return [spec, options](std::uint64_t seed) mutable {
    spec.seed = seed;
    return prepare(generate_synthetic_classification(spec), options, seed);
  };
}

struct RepetitionRecord {
  int repetition = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::optional<Regularizer> selected;
  MetricsReport metrics;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;
  int count = 0;
};

struct MethodSummary {
  Method method = Method::Lasso;
  std::vector<RepetitionRecord> repetitions;
  std::map<std::string, MetricSummary> summary;

  int failures() const {
    return static_cast<int>(std::count_if(repetitions.begin(), repetitions.end(),
                                          [](const auto& r) { return r.failed; }));
  }
};

struct BenchmarkReport {
  Task task = Task::Regression;
  int repetitions = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::string> table_metrics;
  std::vector<MethodSummary> methods;
  std::map<std::string, std::string> header;  // every setting that shaped the run

  // Coefficient profile from the first repetition.
  std::vector<std::string> feature_names;
  std::optional<Vector> profile_truth;
  std::map<std::string, Vector> profile;

  const MethodSummary& method(Method m) const {
    for (const auto& s : methods) {
      if (s.method == m) return s;
    }
    throw std::out_of_range(std::string("method not in report: ") + to_string(m));
  }

  /// Mean of a metric for a method over successful repetitions.
  double mean(Method m, const std::string& metric) const { return method(m).summary.at(metric).mean; }
};

inline std::vector<std::string> table_metrics_for(Task task, bool has_truth) {
  if (task == Task::Classification) return {"CLA", "DoF", "NNZ"};
  if (has_truth) return {"MAE", "MSE", "DoF", "SER"};
  return {"DoF", "NNZ"};
}

/// Mean and population standard deviation of each available metric over
/// the successful repetitions.
inline std::map<std::string, MetricSummary> aggregate(const std::vector<RepetitionRecord>& reps) {
  std::map<std::string, MetricSummary> out;
  for (const auto& name : MetricsReport::names()) {
    std::vector<double> values;
    for (const auto& r : reps) {
      if (r.failed) continue;
      if (const auto v = r.metrics.get(name)) values.push_back(*v);
    }
    if (values.empty()) continue;
    MetricSummary s;
    s.count = static_cast<int>(values.size());
    for (double v : values) s.mean += v;
    s.mean /= s.count;
    for (double v : values) s.std += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(s.std / s.count);
    out[name] = s;
  }
  return out;
}

struct RunOptions {
  int repetitions = 50;
  std::uint64_t master_seed = 0;
  int threads = 1;
  MetricOptions metrics;
};

/// Runs every method on `repetitions` datasets drawn from `source` with
/// seeds master_seed + r. A solver failure marks that (repetition, method)
/// as failed; the run continues and the failure stays in the report.
/// Repetitions may run on several threads; results do not depend on it.
inline BenchmarkReport run_repetitions(const DataSource& source, const std::vector<Method>& methods,
                                       const GridSpec& grids, const SolverConfig& cfg,
                                       const RunOptions& options) {
  detail::require(options.repetitions >= 1, "repetitions must be at least 1");
  detail::require(!methods.empty(), "no methods requested");
  cfg.validate();

  const auto reps = static_cast<std::size_t>(options.repetitions);
  std::vector<std::vector<RepetitionRecord>> records(methods.size(), std::vector<RepetitionRecord>(reps));
  // Written only by whichever thread runs repetition 0.
  std::optional<PreparedData> first;
  std::map<std::string, Vector> first_fits;

  const auto run_one = [&](std::size_t r) {
    const std::uint64_t seed = options.master_seed + r;
    std::optional<PreparedData> prepared;
    std::string data_error;
    try {
      prepared = source(seed);
    } catch (const std::exception& e) {
      data_error = e.what();
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
      RepetitionRecord& rec = records[m][r];
      rec.repetition = static_cast<int>(r);
      rec.seed = seed;
      if (!prepared) {
        rec.failed = true;
        rec.error = data_error;
        continue;
      }
      try {
        const GridSpec g = grids.restricted_to(prepared->data.features());
        const GridSearchResult fit = grid_search(prepared->data, g.points(methods[m]), cfg, options.metrics);
        rec.selected = fit.best;
        rec.metrics = evaluate(prepared->data, fit.coefficients, options.metrics);
        if (r == 0) first_fits[to_string(methods[m])] = fit.coefficients;
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
      }
    }
    if (r == 0) first = std::move(prepared);
  };

  const int threads = std::max(1, std::min<int>(options.threads, options.repetitions));
  if (threads == 1) {
    for (std::size_t r = 0; r < reps; ++r) run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < reps; r = next++) run_one(r);
      });
    }
    for (auto& th : pool) th.join();
  }

  BenchmarkReport report;
  report.repetitions = options.repetitions;
  report.master_seed = options.master_seed;
  if (first) {
    const Dataset& ds = first->data;
    report.task = ds.task;
    report.feature_names = ds.feature_names;
    report.profile_truth = ds.truth;
  }
  report.table_metrics = table_metrics_for(report.task, report.profile_truth.has_value());
  report.profile = std::move(first_fits);
  for (std::size_t m = 0; m < methods.size(); ++m) {
    MethodSummary s;
    s.method = methods[m];
    s.repetitions = std::move(records[m]);
    s.summary = aggregate(s.repetitions);
    report.methods.push_back(std::move(s));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const BenchmarkReport& report) {
  using nlohmann::json;
  json j;
  j["task"] = to_string(report.task);
  j["repetitions"] = report.repetitions;
  j["master_seed"] = report.master_seed;
  j["table_metrics"] = report.table_metrics;
  j["header"] = report.header;
  j["methods"] = json::array();
  for (const auto& s : report.methods) {
    json mj;
    mj["method"] = to_string(s.method);
    mj["failures"] = s.failures();
    mj["summary"] = json::object();
    for (const auto& [name, sum] : s.summary) {
      mj["summary"][name] = {{"mean", sum.mean}, {"std", sum.std}, {"count", sum.count}};
    }
    mj["repetitions"] = json::array();
    for (const auto& r : s.repetitions) {
      json rj{{"repetition", r.repetition}, {"seed", r.seed}, {"failed", r.failed}};
      if (r.failed) rj["error"] = r.error;
      rj["selected"] = r.selected ? to_json(*r.selected) : json(nullptr);
      rj["metrics"] = to_json(r.metrics);
      mj["repetitions"].push_back(rj);
    }
    j["methods"].push_back(mj);
  }
  json pj;
  pj["features"] = report.feature_names;
  pj["truth"] = report.profile_truth ? json(std::vector<double>(report.profile_truth->begin(),
                                                               report.profile_truth->end()))
                                     : json(nullptr);
  pj["estimates"] = json::object();
  for (const auto& [name, v] : report.profile) pj["estimates"][name] = std::vector<double>(v.begin(), v.end());
  j["profile"] = pj;
  return j;
}

inline BenchmarkReport report_from_json(const nlohmann::json& j) {
  const auto to_vector = [](const nlohmann::json& a) {
    const auto v = a.get<std::vector<double>>();
    return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
  };
  BenchmarkReport report;
  report.task = parse_task(j.at("task").get<std::string>());
  report.repetitions = j.at("repetitions").get<int>();
  report.master_seed = j.at("master_seed").get<std::uint64_t>();
  report.table_metrics = j.at("table_metrics").get<std::vector<std::string>>();
  report.header = j.at("header").get<std::map<std::string, std::string>>();
  for (const auto& mj : j.at("methods")) {
    MethodSummary s;
    s.method = parse_method(mj.at("method").get<std::string>());
    for (const auto& [name, sj] : mj.at("summary").items()) {
      s.summary[name] = {sj.at("mean").get<double>(), sj.at("std").get<double>(), sj.at("count").get<int>()};
    }
    for (const auto& rj : mj.at("repetitions")) {
      RepetitionRecord r;
      r.repetition = rj.at("repetition").get<int>();
      r.seed = rj.at("seed").get<std::uint64_t>();
      r.failed = rj.at("failed").get<bool>();
      if (r.failed) r.error = rj.value("error", std::string());
      if (!rj.at("selected").is_null()) r.selected = regularizer_from_json(rj.at("selected"));
      r.metrics = metrics_from_json(rj.at("metrics"));
      s.repetitions.push_back(std::move(r));
    }
    report.methods.push_back(std::move(s));
  }
  const auto& pj = j.at("profile");
  report.feature_names = pj.at("features").get<std::vector<std::string>>();
  if (!pj.at("truth").is_null()) report.profile_truth = to_vector(pj.at("truth"));
  for (const auto& [name, v] : pj.at("estimates").items()) report.profile[name] = to_vector(v);
  return report;
}

inline BenchmarkReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return report_from_json(nlohmann::json::parse(in));
}

namespace detail {

inline std::string mean_pm_std(const MetricSummary& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f±%.4f", s.mean, s.std);
  return buf;
}

}  // namespace detail

/// Rows are the report's table metrics, columns the methods, cells
/// "mean±std". Metrics with no successful repetition are "NA".
inline std::string table_csv(const BenchmarkReport& report) {
  std::ostringstream os;
  os << "metric";
  for (const auto& s : report.methods) os << ',' << to_string(s.method);
  os << '\n';
  for (const auto& metric : report.table_metrics) {
    os << metric;
    for (const auto& s : report.methods) {
      const auto it = s.summary.find(metric);
      os << ',' << (it == s.summary.end() ? std::string("NA") : detail::mean_pm_std(it->second));
    }
    os << '\n';
  }
  return os.str();
}

/// index, name, true value (blank if unknown), then one estimate column per method.
inline std::string profile_csv(const BenchmarkReport& report) {
  std::ostringstream os;
  os << "index,feature,truth";
  for (const auto& [name, v] : report.profile) os << ',' << name;
  os << '\n';
  for (std::size_t j = 0; j < report.feature_names.size(); ++j) {
    const auto i = static_cast<Index>(j);
    os << j + 1 << ',' << report.feature_names[j] << ',';
    if (report.profile_truth) os << detail::format_number((*report.profile_truth)[i]);
    for (const auto& [name, v] : report.profile) os << ',' << detail::format_number(v[i]);
    os << '\n';
  }
  return os.str();
}

struct ReportPaths {
  std::filesystem::path table;
  std::filesystem::path json;
  std::filesystem::path profile;
};

/// Writes report.csv, report.json and profile.csv into `dir`, creating it
/// if needed.
inline ReportPaths emit_table(const BenchmarkReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  const ReportPaths paths{dir / "report.csv", dir / "report.json", dir / "profile.csv"};
  const auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  };
  write(paths.table, table_csv(report));
  write(paths.json, to_json(report).dump(2) + "\n");
  write(paths.profile, profile_csv(report));
  return paths;
}

}  // namespace sparc
