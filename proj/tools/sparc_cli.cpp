// sparc: command-line front end for the prox operators, single-dataset fits
// and the synthetic benchmark.
//
// Exit codes: 0 success, 1 runtime or data error, 2 argument error.

#include "sparc/sparc.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace sparc;
using nlohmann::json;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Argument problems found after CLI11 parsing but before any computation.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    const std::string t(detail::trim(token));
    if (t.empty()) continue;
    const auto v = detail::parse_number(t);
    if (!v) throw UsageError(flag + ": bad number '" + t + "'");
    out.push_back(*v);
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

std::vector<Index> parse_index_list(const std::string& text, const std::string& flag) {
  std::vector<Index> out;
  for (double v : parse_list(text, flag)) {
    if (v < 1 || v != std::floor(v)) throw UsageError(flag + ": '" + detail::format_number(v) + "' is not a positive integer");
    out.push_back(static_cast<Index>(v));
  }
  return out;
}

std::vector<double> read_vector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<double> out;
  std::string token;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    for (char& c : line) {
      if (c == ',' || c == '\t' || c == '\r') c = ' ';
    }
    std::istringstream fields(line);
    while (fields >> token) {
      const auto v = detail::parse_number(token);
      if (!v) throw DataError(path + ":" + std::to_string(line_no) + ": bad number '" + token + "'");
      out.push_back(*v);
    }
  }
  if (out.empty()) throw DataError(path + ": no numbers");
  return out;
}

// Expands `--config FILE` into `--key=value` tokens placed right after the
// subcommand, so flags given on the command line take precedence. The file
// holds one `key = value` per line with long flag names as keys; `#` starts
// a comment; boolean flags take true or false.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::vector<std::string> rest;
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!path) return args;
  std::ifstream in(*path);
  if (!in) throw DataError("cannot open config '" + *path + "'");
  std::vector<std::string> tokens;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string_view text = detail::trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw UsageError(*path + ":" + std::to_string(line_no) + ": expected key=value");
    const std::string key(detail::trim(text.substr(0, eq)));
    std::string value(detail::trim(text.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (value == "true") tokens.push_back("--" + key);
    else if (value != "false") tokens.push_back("--" + key + "=" + value);
  }
  std::vector<std::string> out{args[0]};
  if (!rest.empty()) out.push_back(rest.front());
  out.insert(out.end(), tokens.begin(), tokens.end());
  if (rest.size() > 1) out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

std::string number(double v) { return detail::format_number(v == 0.0 ? 0.0 : v); }

// ---------------------------------------------------------------------------
// Shared option groups
// ---------------------------------------------------------------------------

struct RegularizerFlags {
  bool lasso = false, elastic_net = false, oscar = false, sparc = false;
  std::optional<double> lambda1, lambda2, lambda;
  std::optional<Index> k;

  void add_selectors(CLI::App* app) {
    auto* g = app->add_option_group("regularizer");
    g->add_flag("--lasso", lasso, "l1 penalty");
    g->add_flag("--elastic-net,--en", elastic_net, "l1 + squared l2 penalty");
    g->add_flag("--oscar", oscar, "octagonal shrinkage penalty");
    g->add_flag("--sparc", sparc, "K-sparse pairwise clustering penalty");
    g->require_option(1);
  }

  void add_parameters(CLI::App* app) {
    app->add_option("--lambda1", lambda1, "lasso / elastic-net / oscar l1 weight");
    app->add_option("--lambda2", lambda2, "elastic-net / oscar second weight");
    app->add_option("--lambda", lambda, "sparc pairwise weight");
    app->add_option("--k", k, "sparc support size");
  }

  bool any_parameter() const { return lambda1 || lambda2 || lambda || k; }

  Method method() const {
    if (lasso) return Method::Lasso;
    if (elastic_net) return Method::ElasticNet;
    if (oscar) return Method::Oscar;
    return Method::Sparc;
  }

  // Exactly the parameters of `m` must be present.
  Regularizer build(Method m) const {
    const auto need = [](const auto& v, const char* flag, const char* name) {
      if (!v) throw UsageError(std::string(name) + " needs " + flag);
      return *v;
    };
    const auto forbid = [](bool present, const char* flag, const char* name) {
      if (present) throw UsageError(std::string(flag) + " does not apply to " + name);
    };
    const char* name = to_string(m);
    Regularizer reg = Lasso{};
    switch (m) {
      case Method::Lasso:
        forbid(lambda2.has_value(), "--lambda2", name);
        forbid(lambda.has_value(), "--lambda", name);
        forbid(k.has_value(), "--k", name);
        reg = Lasso{need(lambda1, "--lambda1", name)};
        break;
      case Method::ElasticNet:
      case Method::Oscar: {
        forbid(lambda.has_value(), "--lambda", name);
        forbid(k.has_value(), "--k", name);
        const double a = need(lambda1, "--lambda1", name), b = need(lambda2, "--lambda2", name);
        reg = m == Method::Oscar ? Regularizer{Oscar{a, b}} : Regularizer{ElasticNet{a, b}};
        break;
      }
      case Method::Sparc:
        forbid(lambda1.has_value(), "--lambda1", name);
        forbid(lambda2.has_value(), "--lambda2", name);
        reg = Sparc{need(lambda, "--lambda", name), need(k, "--k", name)};
        break;
    }
    try {
      validate(reg);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return reg;
  }
};

struct SolverFlags {
  SolverConfig cfg;

  void add(CLI::App* app) {
    app->add_option("--eta", cfg.eta, "step inflation factor")->capture_default_str();
    app->add_option("--alpha-min", cfg.alpha_min, "lower step-scale bound")->capture_default_str();
    app->add_option("--alpha-max", cfg.alpha_max, "upper step-scale bound")->capture_default_str();
    app->add_option("--max-iter", cfg.max_iterations, "outer iteration cap")->capture_default_str();
    app->add_option("--max-inner", cfg.max_inner, "acceptance attempts per iteration")->capture_default_str();
    app->add_option("--tol", cfg.tolerance, "relative objective change tolerance")->capture_default_str();
    app->add_option("--sigma", cfg.sigma, "sufficient-decrease constant")->capture_default_str();
  }

  void check() const {
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
};

struct RunFlags {
  std::uint64_t seed = 2024;
  int reps = 1;
  int threads = 0;
  std::string methods = "lasso,en,oscar,sparc";
  std::string lambda_grid;
  std::string k_grid;
  std::string out;
  std::string normalize = "l2";
  bool per_sample = false;

  void add(CLI::App* app, int default_reps) {
    reps = default_reps;
    app->add_option("--seed", seed, "master seed; repetition r uses seed + r")->capture_default_str();
    app->add_option("--reps", reps, "number of repetitions")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--threads", threads, "worker threads (0: all cores; 1: serial)")->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    app->add_option("--methods,--method", methods, "comma list of lasso, en, oscar, sparc")->capture_default_str();
    app->add_option("--lambda-grid", lambda_grid, "comma list of lambdas (default: 10 log-spaced on [1e-3, 10])");
    app->add_option("--k-grid", k_grid, "comma list of sparc K values (default: 5,10,15,20,25)");
    app->add_option("--out", out, "output directory (default: $SPARC_OUT_DIR or ./sparc-out)");
    app->add_option("--normalize", normalize, "column normalization")->capture_default_str()
        ->check(CLI::IsMember({"l2", "zscore"}));
    app->add_flag("--per-sample", per_sample, "divide MAE and MSE by the test row count");
  }

  std::vector<Method> method_list() const {
    std::vector<Method> out_methods;
    std::string token;
    std::istringstream in(methods);
    while (std::getline(in, token, ',')) {
      const std::string t(detail::trim(token));
      if (t.empty()) continue;
      Method m;
      try {
        m = parse_method(t);
      } catch (const std::invalid_argument&) {
        throw UsageError("--methods: unknown method '" + t + "'");
      }
      if (std::find(out_methods.begin(), out_methods.end(), m) == out_methods.end()) out_methods.push_back(m);
    }
    if (out_methods.empty()) throw UsageError("--methods: empty list");
    return out_methods;
  }

  GridSpec grid() const {
    const auto lambdas = lambda_grid.empty() ? log_grid(1e-3, 1e1, 10) : parse_list(lambda_grid, "--lambda-grid");
    for (double l : lambdas) {
      if (!(l >= 0.0)) throw UsageError("--lambda-grid: lambdas must be nonnegative");
    }
    const auto ks = k_grid.empty() ? GridSpec::default_k_grid() : parse_index_list(k_grid, "--k-grid");
    return GridSpec::from_lists(lambdas, ks);
  }

  std::string out_dir() const {
    if (!out.empty()) return out;
    if (const char* env = std::getenv("SPARC_OUT_DIR"); env && *env) return env;
    return "sparc-out";
  }

  RunOptions run_options() const {
    RunOptions o;
    o.repetitions = reps;
    o.master_seed = seed;
    o.threads = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    o.metrics.per_sample = per_sample;
    return o;
  }
};

void describe_settings(BenchmarkReport& report, const SolverConfig& cfg, const GridSpec& grid,
                       const RunFlags& run) {
  auto& h = report.header;
  h["solver.eta"] = number(cfg.eta);
  h["solver.alpha_min"] = number(cfg.alpha_min);
  h["solver.alpha_max"] = number(cfg.alpha_max);
  h["solver.max_iterations"] = std::to_string(cfg.max_iterations);
  h["solver.max_inner"] = std::to_string(cfg.max_inner);
  h["solver.tolerance"] = number(cfg.tolerance);
  h["solver.sigma"] = number(cfg.sigma);
  const auto join = [](const auto& values) {
    std::string s;
    for (const auto& v : values) s += (s.empty() ? "" : ",") + number(static_cast<double>(v));
    return s;
  };
  h["grid.lambda"] = join(grid.lasso);
  std::vector<Index> ks;
  for (const auto& [l, k] : grid.sparc) {
    if (std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
  }
  h["grid.k"] = join(ks);
  h["grid.pairs"] = "cartesian product of grid.lambda with itself";
  h["selection"] = "validation prediction SSE (regression) or CLA (classification); ties to smaller NNZ, then earlier point";
  h["metrics.dof_tolerance"] = number(kDefaultDofTolerance);
  h["metrics.nnz_tolerance"] = number(kDefaultNnzTolerance);
  h["metrics.per_sample"] = run.per_sample ? "true" : "false";
  h["normalization"] = run.normalize;
  h["seed.rule"] = "repetition r uses master_seed + r";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

json table_json(const BenchmarkReport& report, const ReportPaths& paths) {
  json j;
  j["task"] = to_string(report.task);
  j["repetitions"] = report.repetitions;
  j["master_seed"] = report.master_seed;
  j["files"] = {{"table", paths.table.string()}, {"json", paths.json.string()}, {"profile", paths.profile.string()}};
  j["methods"] = json::object();
  for (const auto& s : report.methods) {
    json mj = json::object();
    for (const auto& metric : report.table_metrics) {
      const auto it = s.summary.find(metric);
      mj[metric] = it == s.summary.end() ? json(nullptr) : json{{"mean", it->second.mean}, {"std", it->second.std}};
    }
    mj["failures"] = s.failures();
    j["methods"][to_string(s.method)] = mj;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct ProxCommand {
  RegularizerFlags reg;
  std::string vec;
  std::string vec_file;
  bool json_out = false;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("prox", "apply a proximity operator to a vector");
    reg.add_selectors(app);
    reg.add_parameters(app);
    auto* v = app->add_option("--vec", vec, "comma-separated input vector");
    auto* f = app->add_option("--vec-file", vec_file, "file of numbers separated by commas, spaces or newlines");
    v->excludes(f);
    app->add_flag("--json", json_out, "print a JSON object");
    app->callback([this] { selected = true; });
  }

  bool selected = false;

  int exec() const {
    if (vec.empty() && vec_file.empty()) throw UsageError("prox needs --vec or --vec-file");
    const Regularizer r = reg.build(reg.method());
    const std::vector<double> values = vec.empty() ? read_vector_file(vec_file) : parse_list(vec, "--vec");
    const Vector v = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
    if (const auto* s = std::get_if<Sparc>(&r); s && s->k > v.size()) {
      throw UsageError("--k " + std::to_string(s->k) + " exceeds vector length " + std::to_string(v.size()));
    }
    const Vector x = prox(r, v);
    const double objective = prox_objective(r, x, v);
    if (json_out) {
      json j;
      j["regularizer"] = to_json(r);
      j["x"] = std::vector<double>(x.begin(), x.end());
      j["objective"] = objective;
      std::cout << j.dump() << '\n';
    } else {
      for (Index i = 0; i < x.size(); ++i) std::cout << (i ? " " : "") << number(x[i]);
      std::cout << '\n' << number(objective) << '\n';
    }
    return 0;
  }
};

struct SynthCommand {
  RunFlags run;
  SolverFlags solver;
  bool json_out = false;
  bool selected = false;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("synth", "run the grouped-feature synthetic regression benchmark");
    run.add(app, 50);
    solver.add(app);
    app->add_flag("--json", json_out, "print a JSON summary instead of the CSV table");
    app->callback([this] { selected = true; });
  }

  int exec() const {
    solver.check();
    const auto methods = run.method_list();
    const GridSpec grid = run.grid();
    SyntheticSpec spec;
    spec.normalization = parse_normalization(run.normalize);

    BenchmarkReport report = run_repetitions(synthetic_source(spec), methods, grid, solver.cfg, run.run_options());
    describe_settings(report, solver.cfg, grid, run);
    report.header["data"] = "synthetic grouped regression, " + std::to_string(spec.features()) + " features, " +
                            std::to_string(spec.train) + "/" + std::to_string(spec.validation) + "/" +
                            std::to_string(spec.test) + " rows";
    const ReportPaths paths = emit_table(report, run.out_dir());
    std::cerr << "wrote " << paths.table.string() << ", " << paths.json.string() << ", " << paths.profile.string()
              << '\n';
    if (json_out) {
      std::cout << table_json(report, paths).dump(2) << '\n';
    } else {
      std::cout << table_csv(report);
    }
    return failures(report) ? kExitRuntime : 0;
  }

  static int failures(const BenchmarkReport& report) {
    int n = 0;
    for (const auto& s : report.methods) n += s.failures();
    if (n) std::cerr << n << " method fits failed; see report.json\n";
    return n;
  }
};

CsvOptions csv_options(const std::string& label, Task task) {
  CsvOptions o;
  o.label_column = label;
  o.task = task;
  return o;
}

// Classification when the label column holds exactly two distinct values.
Task infer_task(const std::string& path, const std::string& label) {
  try {
    const Dataset ds = load_csv(path, csv_options(label, Task::Classification));
    const bool both = (ds.y.array() > 0).any() && (ds.y.array() < 0).any();
    return both ? Task::Classification : Task::Regression;
  } catch (const DataError&) {
    // More than two classes, or a structural problem the regression load reports.
    return Task::Regression;
  }
}

struct FitCommand {
  RunFlags run;
  SolverFlags solver;
  RegularizerFlags fixed;
  std::string csv;
  std::string label;
  std::string task = "auto";
  std::string split = "0.5,0.3,0.2";
  std::optional<Index> screen;
  std::string truth;
  bool json_out = false;
  bool selected = false;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("fit", "fit and evaluate methods on a CSV dataset");
    app->add_option("--csv", csv, "input CSV with a header row")->required();
    app->add_option("--label", label, "label column (default: last column)");
    app->add_option("--task", task, "regression, classification or auto")->capture_default_str()
        ->check(CLI::IsMember({"auto", "regression", "classification"}));
    app->add_option("--split", split, "train,validation,test fractions")->capture_default_str();
    app->add_option("--screen", screen, "keep the m features most correlated with the label on training rows")
        ->check(CLI::PositiveNumber);
    app->add_option("--truth", truth, "known coefficients (feature,value CSV) to enable MAE, MSE and SER");
    run.add(app, 1);
    run.methods = "sparc";
    solver.add(app);
    fixed.add_parameters(app);
    app->add_flag("--json", json_out, "print a JSON summary instead of the CSV table");
    app->callback([this] { selected = true; });
  }

  SplitFractions fractions() const {
    const auto f = parse_list(split, "--split");
    if (f.size() != 3) throw UsageError("--split needs three fractions");
    if (!(f[0] > 0 && f[1] > 0 && f[2] > 0)) throw UsageError("--split fractions must all be positive");
    if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) throw UsageError("--split fractions must sum to 1");
    return {f[0], f[1], f[2]};
  }

  GridSpec grids(const std::vector<Method>& methods) const {
    if (!fixed.any_parameter()) return run.grid();
    if (methods.size() != 1) throw UsageError("fixed parameters need exactly one --method");
    if (!run.lambda_grid.empty() || !run.k_grid.empty()) throw UsageError("fixed parameters exclude grid flags");
    const Regularizer r = fixed.build(methods.front());
    GridSpec g;
    std::visit(
        [&g](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Lasso>) g.lasso = {p.lambda1};
          else if constexpr (std::is_same_v<T, ElasticNet>) g.elastic_net = {{p.lambda1, p.lambda2}};
          else if constexpr (std::is_same_v<T, Oscar>) g.oscar = {{p.lambda1, p.lambda2}};
          else g.sparc = {{p.lambda, p.k}};
        },
        r);
    return g;
  }

  int exec() const {
    solver.check();
    const auto methods = run.method_list();
    const GridSpec grid = grids(methods);
    PipelineOptions pipeline;
    pipeline.fractions = fractions();
    pipeline.normalization = parse_normalization(run.normalize);
    pipeline.screen = screen;

    const Task t = task == "auto" ? infer_task(csv, label) : parse_task(task);
    Dataset data = load_csv(csv, csv_options(label, t));
    if (data.samples() == 0 || data.features() == 0) throw DataError(csv + ": no data rows or no feature columns");
    if (!truth.empty()) data.truth = load_coefficients(truth, data.feature_names);

    const RunOptions options = run.run_options();
    BenchmarkReport report = run_repetitions(dataset_source(data, pipeline), methods, grid, solver.cfg, options);
    describe_settings(report, solver.cfg, grid, run);
    report.header["data"] = csv;
    report.header["task"] = to_string(t);
    report.header["split"] = split;
    report.header["screen"] = screen ? std::to_string(*screen) : "none";
    if (fixed.any_parameter()) report.header["grid.fixed"] = to_json(grid.points(methods.front()).front()).dump();

    const std::filesystem::path dir = run.out_dir();
    const ReportPaths paths = emit_table(report, dir);

    // Coefficients from the first repetition, mapped back to the input columns.
    const PreparedData first = prepare(data, pipeline, options.master_seed);
    for (const auto& [name, e] : report.profile) {
      Vector original = Vector::Zero(data.features());
      for (std::size_t j = 0; j < first.columns.size(); ++j) {
        const auto i = static_cast<Index>(j);
        original[first.columns[j]] = e[i] / first.scale[i];
      }
      std::ostringstream os;
      os << "feature,value\n";
      for (Index j = 0; j < data.features(); ++j) {
        os << data.feature_names[static_cast<std::size_t>(j)] << ',' << number(original[j]) << '\n';
      }
      write_text(dir / ("coefficients_" + name + ".csv"), os.str());
    }
    std::cerr << "wrote " << paths.table.string() << ", " << paths.json.string() << ", " << paths.profile.string()
              << " and coefficients_<method>.csv\n";
    if (json_out) {
      std::cout << table_json(report, paths).dump(2) << '\n';
    } else {
      std::cout << table_csv(report);
    }
    return SynthCommand::failures(report) ? kExitRuntime : 0;
  }
};

struct DescribeCommand {
  std::string csv;
  std::string label;
  bool json_out = false;
  bool selected = false;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("describe", "summarize a CSV dataset");
    app->add_option("--csv,csv", csv, "input CSV with a header row")->required();
    app->add_option("--label", label, "label column (default: last column)");
    app->add_flag("--json", json_out, "print a JSON object");
    app->callback([this] { selected = true; });
  }

  int exec() const {
    const Task t = infer_task(csv, label);
    const Dataset ds = load_csv(csv, csv_options(label, t));
    json j;
    j["n"] = ds.samples();
    j["p"] = ds.features();
    j["label"] = ds.label_name;
    j["task"] = to_string(t);
    if (t == Task::Classification) {
      j["classes"] = {{"-1", (ds.y.array() < 0).count()}, {"+1", (ds.y.array() > 0).count()}};
    }
    if (ds.features() > 0 && ds.samples() > 0) {
      const Vector norms = ds.A.colwise().norm();
      j["column_norm"] = {{"min", norms.minCoeff()}, {"max", norms.maxCoeff()}};
    }
    if (json_out) {
      std::cout << j.dump() << '\n';
      return 0;
    }
    std::cout << "n=" << ds.samples() << " p=" << ds.features() << '\n';
    std::cout << "label=" << ds.label_name << " task=" << to_string(t) << '\n';
    if (t == Task::Classification) {
      std::cout << "class -1: " << (ds.y.array() < 0).count() << '\n';
      std::cout << "class +1: " << (ds.y.array() > 0).count() << '\n';
    } else if (ds.samples() > 0) {
      std::cout << "label range: " << number(ds.y.minCoeff()) << " .. " << number(ds.y.maxCoeff()) << '\n';
    }
    if (j.contains("column_norm")) {
      std::cout << "column norm range: " << number(j["column_norm"]["min"].get<double>()) << " .. "
                << number(j["column_norm"]["max"].get<double>()) << '\n';
    }
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse regression with pairwise clustering penalties"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.footer(
      "Every subcommand accepts --config FILE: one `flag = value` per line using long flag names\n"
      "without dashes (booleans take true/false). Command-line flags override the file.\n"
      "SPARC_OUT_DIR sets the default output directory for synth and fit.");
  ProxCommand prox_cmd;
  SynthCommand synth_cmd;
  FitCommand fit_cmd;
  DescribeCommand describe_cmd;
  prox_cmd.add(app);
  synth_cmd.add(app);
  fit_cmd.add(app);
  describe_cmd.add(app);

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  // CLI11 takes the arguments in reverse order.
  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (prox_cmd.selected) return prox_cmd.exec();
    if (synth_cmd.selected) return synth_cmd.exec();
    if (fit_cmd.selected) return fit_cmd.exec();
    if (describe_cmd.selected) return describe_cmd.exec();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
