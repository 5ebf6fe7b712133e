#include "sparcs/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include "sparcs/error.hpp"
#include "sparcs/experiments.hpp"
#include "sparcs/io.hpp"
#include "sparcs/phase.hpp"
#include "sparcs/screening.hpp"
#include "sparcs/simgen.hpp"
#include "sparcs/two_stage.hpp"
#include "sparcs/version.hpp"

namespace sparcs::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string joined(const std::vector<std::string>& args) {
  std::string s;
  for (const auto& a : args) s += (s.empty() ? "" : " ") + a;
  return s;
}

json base_manifest(const std::vector<std::string>& args) {
  return {{"version", std::string(kVersion)}, {"rng", std::string(kRngAlgorithm)}, {"command", joined(args)}};
}

// Config values become leading flags so anything given on the command line,
// parsed later, wins.
std::vector<std::string> config_tokens(const fs::path& path) {
  const json cfg = io::read_json(path);
  if (!cfg.is_object()) fail(ErrorCode::ConfigError, path.string() + ": config must be a JSON object");
  std::vector<std::string> tokens;
  for (const auto& [key, value] : cfg.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back(flag);
    } else if (value.is_string()) {
      tokens.push_back(flag);
      tokens.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      tokens.push_back(flag);
      tokens.push_back(value.dump());
    } else {
      fail(ErrorCode::ConfigError, path.string() + ": value of \"" + key + "\" must be a scalar");
    }
  }
  return tokens;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.empty() || args.front() == "experiment") return args;
  std::optional<std::string> config;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
  }
  if (!config) return args;
  std::vector<std::string> out{args.front()};
  const auto extra = config_tokens(*config);
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

struct ResponseSpec {
  std::string column;
  std::string file;
};

std::pair<DataMatrix, Eigen::VectorXd> load_xy(const std::string& data_path, const ResponseSpec& response) {
  DataMatrix data = io::read_csv(data_path);
  if (!response.file.empty()) {
    if (!response.column.empty()) fail(ErrorCode::ConfigError, "give --response or --response-file, not both");
    Eigen::VectorXd y = io::read_vector_csv(response.file);
    if (y.size() != data.n()) fail(ErrorCode::DimensionMismatch, "response file length differs from data rows");
    return {std::move(data), std::move(y)};
  }
  if (response.column.empty()) fail(ErrorCode::ConfigError, "one of --response or --response-file is required");
  return io::split_response(data, response.column);
}

void write_sidecar(const fs::path& out, json manifest) {
  fs::path side = out;
  side += ".manifest.json";
  io::write_json_atomic(side, manifest);
}

// ---------------------------------------------------------------- screen

struct ScreenArgs {
  std::string data, out, method = "pcs";
  ResponseSpec response;
  Index top = 0;
  std::optional<double> threshold;
};

void do_screen(const ScreenArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  if ((a.top > 0) == a.threshold.has_value()) fail(ErrorCode::ConfigError, "give exactly one of --top or --threshold");
  const auto [x, y] = load_xy(a.data, a.response);
  const ScreeningMethod method = parse_screening_method(a.method);
  const ScreeningScores scores = screen_scores(x, y, method);
  const SupportSet support = a.threshold ? select_by_threshold(scores, *a.threshold) : select_top_l(scores, a.top);
  json j = io::to_json(support, &x);
  j["manifest"] = base_manifest(args);
  j["manifest"]["data"] = a.data;
  j["manifest"]["n"] = x.n();
  j["manifest"]["p"] = x.p();
  if (method != ScreeningMethod::SIS && support.size() > 0) {
    // the two PCS orderings only agree asymptotically; record the other one
    const ScreeningMethod other = method == ScreeningMethod::PCS_H ? ScreeningMethod::PCS_B : ScreeningMethod::PCS_H;
    const SupportSet alt = select_top_l(screen_scores(x, y, other), support.size());
    const auto mine = support.sorted_indices(), theirs = alt.sorted_indices();
    std::vector<Index> common;
    std::set_intersection(mine.begin(), mine.end(), theirs.begin(), theirs.end(), std::back_inserter(common));
    j["diagnostics"] = {{"other_method", to_string(other)},
                        {"other_indices", alt.indices()},
                        {"overlap", common.size()}};
  }
  io::write_json_atomic(a.out, j);
  out << "selected " << support.size() << " of " << x.p() << " variables (" << to_string(method) << ") -> " << a.out
      << "\n";
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string data, stage2, stage2_response_file, out, method = "pcs";
  ResponseSpec response;
  Index top = 0;
  bool no_reuse = false, ridge = false;
};

void do_fit(const FitArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const auto [x1, y1] = load_xy(a.data, a.response);
  DataMatrix x2;
  Eigen::VectorXd y2;
  if (!a.stage2.empty()) {
    const ResponseSpec r2{a.stage2_response_file.empty() ? a.response.column : "", a.stage2_response_file};
    std::tie(x2, y2) = load_xy(a.stage2, r2);
  } else {
    x2 = DataMatrix(Eigen::MatrixXd(0, x1.p()), x1.column_ids);
    if (a.no_reuse) fail(ErrorCode::ConfigError, "--no-reuse needs --stage2 data");
  }
  FitOptions opts;
  opts.method = parse_screening_method(a.method);
  opts.l = a.top;
  opts.reuse_stage1 = !a.no_reuse;
  opts.ridge = a.ridge;
  const TwoStageModel model = fit(x1, y1, x2, y2, opts);
  json j = io::to_json(model);
  j["manifest"] = base_manifest(args);
  io::write_json_atomic(a.out, j);
  out << "fitted " << model.coefficients.size() << "-variable model on " << (model.reuse_stage1 ? model.t_total : x2.n())
      << " samples -> " << a.out << "\n";
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::string model, data, out;
};

void do_predict(const PredictArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const TwoStageModel model = io::model_from_json(io::read_json(a.model));
  const DataMatrix x = io::read_csv(a.data);
  const auto l = model.coefficients.size();
  Eigen::MatrixXd cols;
  bool by_name = !x.column_ids.empty() && static_cast<Index>(model.variable_names.size()) == l;
  if (by_name) {
    std::vector<Index> idx;
    for (const auto& name : model.variable_names) {
      const auto j = x.find_column(name);
      if (!j) {
        by_name = false;
        break;
      }
      idx.push_back(*j);
    }
    if (by_name) cols = x.values(Eigen::all, idx);
  }
  if (!by_name) {
    if (x.p() != l) {
      fail(ErrorCode::SupportMismatch,
           "data has " + std::to_string(x.p()) + " columns; the model needs " + std::to_string(l));
    }
    cols = x.values;
  }
  const Eigen::VectorXd yhat = predict(model, cols);
  io::write_text_atomic(a.out, io::vector_to_csv("prediction", yhat));
  json m = base_manifest(args);
  m["model"] = a.model;
  m["data"] = a.data;
  write_sidecar(a.out, m);
  out << "wrote " << yhat.size() << " predictions -> " << a.out << "\n";
}

// ---------------------------------------------------------------- phase

struct PhaseArgs {
  std::int64_t p = 0;
  int n = 0;
  std::string grid = "0:0.999:0.001";
  std::string out;
  bool numeric = false;
};

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorCode::ConfigError, "bad --grid '" + spec + "', expected start:stop:step");
    }
  }
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    fail(ErrorCode::ConfigError, "bad --grid '" + spec + "', expected start:stop:step with step > 0");
  }
  std::vector<double> out;
  const auto steps = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (long i = 0; i <= steps; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
  return out;
}

void do_phase(const PhaseArgs& a, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (a.p < 1 || a.n < 3) fail(ErrorCode::DomainError, "phase needs p >= 1 and n >= 3");
  const std::vector<double> grid = parse_grid(a.grid);
  std::string csv = "rho,P0,xi,pvalue\n";
  for (double rho : grid) {
    if (rho < 0.0 || rho > 1.0) fail(ErrorCode::DomainError, "grid values must lie in [0, 1]");
    csv += io::format_double(rho) + ',' + io::format_double(p0(rho, a.n)) + ',' +
           io::format_double(xi(a.p, a.n, rho)) + ',' + io::format_double(pvalue(a.p, a.n, rho)) + '\n';
  }
  json rho_c = nullptr;
  try {
    rho_c = a.numeric ? critical_threshold_numeric(a.p, a.n) : critical_threshold(a.p, a.n);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DomainError) throw;
    err << "sparcs: note: no critical threshold for these parameters (" << e.what() << ")\n";
  }
  if (a.out.empty()) {
    out << csv;
    if (!rho_c.is_null()) err << "rho_c=" << io::format_double(rho_c.get<double>()) << "\n";
    return;
  }
  io::write_text_atomic(a.out, csv);
  json m = base_manifest(args);
  m["p"] = a.p;
  m["n"] = a.n;
  m["rho_c"] = rho_c;
  m["rho_c_method"] = a.numeric ? "numeric" : "closed_form";
  write_sidecar(a.out, m);
  out << "wrote " << grid.size() << " rows -> " << a.out;
  if (!rho_c.is_null()) out << " (rho_c = " << io::format_double(rho_c.get<double>()) << ")";
  out << "\n";
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  Index n = 100, p = 1000, k = 10;
  std::string design = "block_sparse", law = "unit_normal", out_dir = ".";
  double phi = 0.9, dof = 5.0, sigma = 0.1, noise_var = 0.05;
  Index block_size = 0;
  double block_corr = 0.5, decay_base = 0.5, decay_scale = 0.1;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> truth_seed;
};

void do_simulate(const SimulateArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  if (a.n < 1 || a.p < 1) fail(ErrorCode::InvalidParams, "n and p must be positive");
  const CoefficientLaw law = a.law == "bernoulli_gaussian" ? CoefficientLaw::bernoulli_gaussian(a.sigma)
                             : a.law == "unit_normal"      ? CoefficientLaw::unit_normal()
                                                           : throw Error(ErrorCode::ConfigError, "unknown law " + a.law);
  const std::uint64_t truth_seed = a.truth_seed.value_or(a.seed);
  RandomStream coef_rng(truth_seed, stream_id(0, StreamPurpose::Coefficients));
  const GroundTruth truth = gen_coefficients(a.p, a.k, law, coef_rng, a.noise_var);

  RandomStream x_rng(a.seed, stream_id(0, StreamPurpose::Design));
  RandomStream mix_rng(a.seed, stream_id(0, StreamPurpose::Mixing));
  RandomStream noise_rng(a.seed, stream_id(0, StreamPurpose::Noise));
  CovarianceSpec spec = CovarianceSpec::identity(a.p);
  if (a.design == "block_sparse" || a.design == "t") {
    spec = CovarianceSpec{a.p, a.block_size > 0 ? a.block_size : std::max<Index>(1, a.p / 100), a.block_corr,
                          a.decay_base, a.decay_scale};
  }
  Eigen::MatrixXd x;
  if (a.design == "ar") {
    x = sample_ar_design(a.n, a.p, truth.support, a.phi, x_rng);
  } else if (a.design == "t") {
    x = sample_elliptical_t(GaussianDesign(spec), a.n, a.dof, x_rng, mix_rng);
  } else if (a.design == "identity" || a.design == "block_sparse") {
    x = GaussianDesign(spec).sample(a.n, x_rng);
  } else {
    fail(ErrorCode::ConfigError, "unknown design '" + a.design + "'");
  }
  const Eigen::VectorXd y = gen_response(x, truth, noise_rng);

  const fs::path dir(a.out_dir);
  std::vector<std::string> names;
  for (Index j = 0; j < a.p; ++j) names.push_back("x" + std::to_string(j + 1));
  io::write_text_atomic(dir / "X.csv", io::to_csv(DataMatrix(x, names)));
  io::write_text_atomic(dir / "y.csv", io::vector_to_csv("y", y));

  json t = io::to_json(truth);
  t["coefficient_law"] = law.name();
  t["design"] = a.design;
  if (a.design == "ar") t["phi"] = a.phi;
  if (a.design != "ar") t["spec"] = io::to_json(spec);
  if (a.design == "t") t["dof"] = a.dof;
  t["seed"] = a.seed;
  t["truth_seed"] = truth_seed;
  t["n"] = a.n;
  io::write_json_atomic(dir / "truth.json", t);

  json m = base_manifest(args);
  m["outputs"] = {"X.csv", "y.csv", "truth.json"};
  m["seed"] = a.seed;
  m["truth_seed"] = truth_seed;
  io::write_json_atomic(dir / "manifest.json", m);
  out << "simulated " << a.n << " x " << a.p << " (" << a.design << ", k = " << a.k << ") -> " << dir.string() << "\n";
}

// ---------------------------------------------------------------- experiment

struct ExperimentArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<Index> trials;
  int threads = 0;
  bool serial = false;
};

void do_experiment(const ExperimentArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  ExperimentConfig cfg = ExperimentConfig::from_json(io::read_json(a.config));
  if (a.seed) cfg.master_seed = *a.seed;
  if (a.trials) cfg.trials = *a.trials;
  if (!a.out.empty()) cfg.output_path = a.out;
  if (cfg.output_path.empty()) cfg.output_path = "results/" + std::string(to_string(cfg.id));
  const ExperimentResult r = run_experiment(cfg, RunOptions{a.threads, a.serial});
  const fs::path dir(cfg.output_path);
  io::write_text_atomic(dir / "trials.csv", trials_csv(r));
  io::write_text_atomic(dir / "aggregate.csv", aggregate_csv(r));
  json m = manifest(cfg, r);
  m["command"] = joined(args);
  io::write_json_atomic(dir / "manifest.json", m);
  out << to_string(cfg.id) << ": " << r.trials.size() << " trial rows, " << r.aggregate.size() << " aggregate rows in "
      << r.seconds << " s -> " << dir.string() << "\n";
}

int exit_code_for(const Error& e) {
  if (e.code() == ErrorCode::ConfigError) return Usage;
  return is_numerical(e.code()) ? NumericalFailure : DataError;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
  } catch (const Error& e) {
    err << "sparcs: error: " << e.what() << "\n";
    return exit_code_for(e);
  }

  CLI::App app{"Two-stage screening and prediction for budget-limited regression", "sparcs"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1, 1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_unused;

  ScreenArgs sa;
  auto* screen = app.add_subcommand("screen", "Rank variables by SIS or PCS and keep the top l or those above rho");
  screen->add_option("--config", config_unused, "JSON file of flag defaults");
  screen->add_option("--data", sa.data, "CSV of predictors (may hold the response)")->required();
  screen->add_option("--response", sa.response.column, "response column name or 0-based index in --data");
  screen->add_option("--response-file", sa.response.file, "single-column CSV holding the response");
  screen->add_option("--method", sa.method, "sis | pcs | pcs_h | pcs_b");
  screen->add_option("--top", sa.top, "number of variables to keep");
  screen->add_option("--threshold", sa.threshold, "keep scores strictly above this value");
  screen->add_option("--out", sa.out, "support JSON")->required();

  FitArgs fa;
  auto* fitc = app.add_subcommand("fit", "Screen stage-1 data and fit the stage-2 OLS predictor");
  fitc->add_option("--config", config_unused, "JSON file of flag defaults");
  fitc->add_option("--data", fa.data, "stage-1 CSV")->required();
  fitc->add_option("--response", fa.response.column, "response column name or 0-based index");
  fitc->add_option("--response-file", fa.response.file, "single-column CSV holding the stage-1 response");
  fitc->add_option("--stage2", fa.stage2, "stage-2 CSV with p or l columns");
  fitc->add_option("--stage2-response-file", fa.stage2_response_file, "stage-2 response CSV");
  fitc->add_option("--method", fa.method, "sis | pcs | pcs_h | pcs_b");
  fitc->add_option("--top", fa.top, "number of selected variables l")->required();
  fitc->add_flag("--no-reuse", fa.no_reuse, "fit stage 2 on the stage-2 samples only");
  fitc->add_flag("--ridge", fa.ridge, "tiny ridge on a singular restricted covariance");
  fitc->add_option("--out", fa.out, "model JSON")->required();

  PredictArgs pa;
  auto* predictc = app.add_subcommand("predict", "Apply a fitted model to new samples");
  predictc->add_option("--config", config_unused, "JSON file of flag defaults");
  predictc->add_option("--model", pa.model, "model JSON from fit")->required();
  predictc->add_option("--data", pa.data, "CSV with the l model columns (or labeled superset)")->required();
  predictc->add_option("--out", pa.out, "predictions CSV")->required();

  PhaseArgs ph;
  auto* phase = app.add_subcommand("phase", "Null discovery analytics over a threshold grid");
  phase->add_option("--config", config_unused, "JSON file of flag defaults");
  phase->add_option("--p", ph.p, "number of variables")->required();
  phase->add_option("--n", ph.n, "number of samples")->required();
  phase->add_option("--grid", ph.grid, "start:stop:step");
  phase->add_flag("--numeric", ph.numeric, "solve for the critical threshold numerically");
  phase->add_option("--out", ph.out, "CSV output (stdout when absent)");

  SimulateArgs si;
  auto* sim = app.add_subcommand("simulate", "Write a synthetic design, response and ground truth");
  sim->add_option("--config", config_unused, "JSON file of flag defaults");
  sim->add_option("--n", si.n, "samples");
  sim->add_option("--p", si.p, "variables");
  sim->add_option("--k", si.k, "active variables");
  sim->add_option("--design", si.design, "block_sparse | identity | ar | t");
  sim->add_option("--phi", si.phi, "AR coefficient for design ar");
  sim->add_option("--dof", si.dof, "degrees of freedom for design t");
  sim->add_option("--coefficient-law", si.law, "unit_normal | bernoulli_gaussian");
  sim->add_option("--sigma", si.sigma, "Bernoulli-Gaussian spread");
  sim->add_option("--noise-var", si.noise_var, "response noise variance");
  sim->add_option("--block-size", si.block_size, "dependent block size (0: p/100)");
  sim->add_option("--block-corr", si.block_corr, "correlation inside the block");
  sim->add_option("--decay-base", si.decay_base, "Toeplitz decay base");
  sim->add_option("--decay-scale", si.decay_scale, "Toeplitz decay scale");
  sim->add_option("--seed", si.seed, "seed for design and noise");
  sim->add_option("--truth-seed", si.truth_seed, "seed for the coefficients (default: --seed)");
  sim->add_option("--out-dir", si.out_dir, "output directory");

  ExperimentArgs ea;
  auto* exp = app.add_subcommand("experiment", "Run a Monte Carlo experiment from a JSON config");
  exp->add_option("--config", ea.config, "experiment JSON")->required();
  exp->add_option("--seed", ea.seed, "override master_seed");
  exp->add_option("--trials", ea.trials, "override trials");
  exp->add_option("--threads", ea.threads, "parallel-map width (results do not depend on it)");
  exp->add_flag("--serial", ea.serial, "use the serial reference trial map");
  exp->add_option("--out", ea.out, "output directory (overrides output_path)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help or --version
      if (dynamic_cast<const CLI::CallForVersion*>(&e) != nullptr) {
        out << e.what() << "\n";
      } else {
        out << app.help();
      }
      return Ok;
    }
    err << "sparcs: usage error: " << e.what() << "\n";
    return Usage;
  }

  try {
    if (screen->parsed()) do_screen(sa, raw_args, out);
    else if (fitc->parsed()) do_fit(fa, raw_args, out);
    else if (predictc->parsed()) do_predict(pa, raw_args, out);
    else if (phase->parsed()) do_phase(ph, raw_args, out, err);
    else if (sim->parsed()) do_simulate(si, raw_args, out);
    else if (exp->parsed()) do_experiment(ea, raw_args, out);
    return Ok;
  } catch (const Error& e) {
    err << "sparcs: error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "sparcs: error: " << e.what() << "\n";
    return DataError;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace sparcs::cli
