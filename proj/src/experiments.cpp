#include "sparcs/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <stdexcept>
#include <tuple>

#include "sparcs/error.hpp"
#include "sparcs/io.hpp"
#include "sparcs/lasso.hpp"
#include "sparcs/phase.hpp"
#include "sparcs/rng.hpp"
#include "sparcs/screening.hpp"
#include "sparcs/stats.hpp"
#include "sparcs/two_stage.hpp"
#include "sparcs/version.hpp"

namespace sparcs {

using json = nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::ConfigError, msg); }

}  // namespace

std::string_view to_string(ExperimentId id) noexcept {
  switch (id) {
    case ExperimentId::SelectionError: return "selection_error";
    case ExperimentId::TwoStageRmse: return "two_stage_rmse";
    case ExperimentId::ArSweep: return "ar_sweep";
    case ExperimentId::Fwer: return "fwer";
    case ExperimentId::DiscoveryCounts: return "discovery_counts";
  }
  return "unknown";
}

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::SIS: return "SIS";
    case Method::PCS: return "PCS";
    case Method::PCS_B: return "PCS_B";
    case Method::LASSO: return "LASSO";
    case Method::Oracle: return "ORACLE";
  }
  return "unknown";
}

ExperimentId parse_experiment_id(std::string_view name) {
  const std::string s = lower(name);
  for (auto id : {ExperimentId::SelectionError, ExperimentId::TwoStageRmse, ExperimentId::ArSweep, ExperimentId::Fwer,
                  ExperimentId::DiscoveryCounts}) {
    if (s == to_string(id)) return id;
  }
  config_error("unknown experiment '" + std::string(name) + "'");
}

Method parse_method(std::string_view name) {
  const std::string s = lower(name);
  if (s == "sis") return Method::SIS;
  if (s == "pcs" || s == "pcs_h") return Method::PCS;
  if (s == "pcs_b") return Method::PCS_B;
  if (s == "lasso") return Method::LASSO;
  if (s == "oracle") return Method::Oracle;
  config_error("unknown method '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- config

ExperimentConfig ExperimentConfig::defaults_for(ExperimentId id) {
  ExperimentConfig c;
  c.id = id;
  switch (id) {
    case ExperimentId::SelectionError:
      c.methods = {Method::SIS, Method::PCS, Method::LASSO};
      break;
    case ExperimentId::TwoStageRmse:
      c.methods = {Method::SIS, Method::PCS, Method::LASSO, Method::Oracle};
      break;
    case ExperimentId::ArSweep:
      c.design = "ar";
      c.methods = {Method::SIS, Method::PCS};
      c.n_stage1 = 200;
      c.t_total = 800;
      break;
    case ExperimentId::Fwer:
      c.design = "identity";
      c.coefficient_law = "bernoulli_gaussian";
      c.methods = {Method::PCS};
      break;
    case ExperimentId::DiscoveryCounts:
      c.design = "identity";
      c.k = 0;
      c.noise_var = 1.0;
      c.methods = {Method::SIS};
      break;
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) config_error("experiment config must be a JSON object");
  if (!j.contains("experiment")) config_error("config lacks \"experiment\"");
  ExperimentConfig c;
  try {
    c = defaults_for(parse_experiment_id(j.at("experiment").get<std::string>()));
    for (const auto& [key, v] : j.items()) {
      if (key == "experiment") continue;
      else if (key == "p") c.p = v.get<Index>();
      else if (key == "k") c.k = v.get<Index>();
      else if (key == "l") c.l = v.get<Index>();
      else if (key == "n_grid") c.n_grid = v.get<std::vector<Index>>();
      else if (key == "t_grid") c.t_grid = v.get<std::vector<Index>>();
      else if (key == "p_grid") c.p_grid = v.get<std::vector<Index>>();
      else if (key == "phi_grid") c.phi_grid = v.get<std::vector<double>>();
      else if (key == "sigma_grid") c.sigma_grid = v.get<std::vector<double>>();
      else if (key == "rho_grid") c.rho_grid = v.get<std::vector<double>>();
      else if (key == "xi_grid") c.xi_grid = v.get<std::vector<double>>();
      else if (key == "sigma") c.sigma = v.get<double>();
      else if (key == "noise_var") c.noise_var = v.get<double>();
      else if (key == "coefficient_law") c.coefficient_law = v.get<std::string>();
      else if (key == "design") c.design = v.get<std::string>();
      else if (key == "phi") c.phi = v.get<double>();
      else if (key == "block_size") c.block_size = v.get<Index>();
      else if (key == "block_corr") c.block_corr = v.get<double>();
      else if (key == "decay_base") c.decay_base = v.get<double>();
      else if (key == "decay_scale") c.decay_scale = v.get<double>();
      else if (key == "n_stage1") c.n_stage1 = v.get<Index>();
      else if (key == "t_total") c.t_total = v.get<Index>();
      else if (key == "stage1_log_factor") c.stage1_log_factor = v.get<double>();
      else if (key == "test_size") c.test_size = v.get<Index>();
      else if (key == "cv_folds") c.cv_folds = v.get<int>();
      else if (key == "lambda_grid_size") c.lambda_grid_size = v.get<int>();
      else if (key == "lambda_min_ratio") c.lambda_min_ratio = v.get<double>();
      else if (key == "trials") c.trials = v.get<Index>();
      else if (key == "master_seed") c.master_seed = v.get<std::uint64_t>();
      else if (key == "output_path") c.output_path = v.get<std::string>();
      else if (key == "methods") {
        c.methods.clear();
        for (const auto& m : v) c.methods.push_back(parse_method(m.get<std::string>()));
      } else {
        config_error("unknown config key \"" + key + "\"");
      }
    }
  } catch (const json::exception& e) {
    config_error(std::string("bad config value: ") + e.what());
  }
  return c;
}

json ExperimentConfig::to_json() const {
  std::vector<std::string> method_names;
  for (Method m : methods) method_names.emplace_back(to_string(m));
  return {
      {"experiment", std::string(to_string(id))},
      {"p", p},
      {"k", k},
      {"l", l},
      {"n_grid", n_grid},
      {"t_grid", t_grid},
      {"p_grid", p_grid},
      {"phi_grid", phi_grid},
      {"sigma_grid", sigma_grid},
      {"rho_grid", rho_grid},
      {"xi_grid", xi_grid},
      {"sigma", sigma},
      {"noise_var", noise_var},
      {"coefficient_law", coefficient_law},
      {"design", design},
      {"phi", phi},
      {"block_size", block_size},
      {"block_corr", block_corr},
      {"decay_base", decay_base},
      {"decay_scale", decay_scale},
      {"n_stage1", n_stage1},
      {"t_total", t_total},
      {"stage1_log_factor", stage1_log_factor},
      {"test_size", test_size},
      {"cv_folds", cv_folds},
      {"lambda_grid_size", lambda_grid_size},
      {"lambda_min_ratio", lambda_min_ratio},
      {"trials", trials},
      {"master_seed", master_seed},
      {"methods", method_names},
      {"output_path", output_path},
  };
}

void ExperimentConfig::validate() const {
  const bool discovery = id == ExperimentId::DiscoveryCounts;
  if (trials < 1) config_error("trials must be at least 1");
  if (p < 2) config_error("p must be at least 2");
  if (discovery ? (k < 0 || k >= p) : (k < 1 || k >= p)) config_error("k out of range for p");
  if (l < 0 || l > p) config_error("l out of range");
  if (methods.empty()) config_error("methods is empty");
  for (Method m : methods) {
    const bool stage2 = id == ExperimentId::TwoStageRmse || id == ExperimentId::ArSweep;
    if (m == Method::Oracle && !stage2) config_error("ORACLE is only meaningful for RMSE experiments");
    if (m == Method::LASSO && discovery) config_error("discovery counts take SIS or PCS scores only");
  }
  if (design != "block_sparse" && design != "identity" && design != "ar") config_error("unknown design " + design);
  if (design == "ar" && id != ExperimentId::TwoStageRmse && id != ExperimentId::ArSweep) {
    config_error("the AR design applies to RMSE experiments only");
  }
  if (id == ExperimentId::ArSweep && design != "ar") config_error("ar_sweep requires design \"ar\"");
  if (!(std::abs(phi) < 1.0)) config_error("phi must satisfy |phi| < 1");
  if (coefficient_law != "unit_normal" && coefficient_law != "bernoulli_gaussian") {
    config_error("unknown coefficient law " + coefficient_law);
  }
  if (!(sigma >= 0.0) || !(noise_var >= 0.0)) config_error("sigma and noise_var must be nonnegative");
  if (block_size < 0 || !(block_corr >= 0.0 && block_corr < 1.0) || !(decay_base >= 0.0 && decay_base < 1.0) ||
      !(decay_scale >= 0.0)) {
    config_error("covariance parameters out of range");
  }
  if (test_size < 1) config_error("test_size must be positive");
  if (cv_folds < 2 || lambda_grid_size < 1 || !(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0)) {
    config_error("bad cross-validation settings");
  }
  for (double s : sigma_grid)
    if (!(s >= 0.0)) config_error("sigma_grid entries must be nonnegative");

  auto need_n_grid = [&] {
    if (n_grid.empty()) config_error("n_grid is empty");
    for (Index n : n_grid)
      if (n < 3) config_error("every n must be at least 3");
  };
  switch (id) {
    case ExperimentId::SelectionError:
    case ExperimentId::Fwer:
      need_n_grid();
      break;
    case ExperimentId::TwoStageRmse:
      if (t_grid.empty()) config_error("t_grid is empty");
      if (!(stage1_log_factor > 0.0)) config_error("stage1_log_factor must be positive");
      for (Index t : t_grid) {
        const auto n = std::max<Index>(static_cast<Index>(std::ceil(stage1_log_factor * std::log(double(t)))), 3);
        if (t < n) config_error("t = " + std::to_string(t) + " is below its stage-1 size " + std::to_string(n));
      }
      break;
    case ExperimentId::ArSweep:
      if (phi_grid.empty() && p_grid.empty()) config_error("ar_sweep needs phi_grid or p_grid");
      for (double f : phi_grid)
        if (!(std::abs(f) < 1.0)) config_error("phi_grid entries must satisfy |phi| < 1");
      for (Index q : p_grid)
        if (q <= k) config_error("p_grid entries must exceed k");
      if (n_stage1 < 3 || t_total < n_stage1) config_error("need 3 <= n_stage1 <= t_total");
      break;
    case ExperimentId::DiscoveryCounts:
      need_n_grid();
      if (rho_grid.empty() && xi_grid.empty()) config_error("discovery counts need rho_grid or xi_grid");
      for (double r : rho_grid)
        if (!(r >= 0.0 && r <= 1.0)) config_error("rho_grid entries must lie in [0, 1]");
      for (double x : xi_grid)
        if (!(x > 0.0 && x < static_cast<double>(p))) config_error("xi_grid entries must lie in (0, p)");
      break;
  }
}

// ---------------------------------------------------------------- trial map

void map_trials_serial(Index count, const std::function<void(Index)>& body) {
  for (Index i = 0; i < count; ++i) body(i);
}

void map_trials(Index count, int threads, const std::function<void(Index)>& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  const int width = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(width)
  for (Index i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------- designs

Eigen::MatrixXd sample_design_columns(const CovarianceSpec* gaussian, double ar_phi, Index p,
                                      const std::vector<Index>& support, Index n, const std::vector<Index>& columns,
                                      RandomStream& rng) {
  const auto s = static_cast<Index>(columns.size());
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] < 0 || columns[i] >= p || (i > 0 && columns[i] <= columns[i - 1])) {
      fail(ErrorCode::DimensionMismatch, "columns must be ascending and inside [0, p)");
    }
  }
  Eigen::MatrixXd z(n, s);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < s; ++j) z(i, j) = rng.normal();

  if (gaussian != nullptr) {
    if (gaussian->is_identity()) return z;
    Eigen::MatrixXd cov(s, s);
    for (Index a = 0; a < s; ++a)
      for (Index b = 0; b < s; ++b) cov(a, b) = gaussian->entry(columns[std::size_t(a)], columns[std::size_t(b)]);
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) fail(ErrorCode::NotPositiveDefinite, "sub-covariance is not positive definite");
    return z * llt.matrixL().transpose();
  }

  // AR: inactive columns are one AR(1) path in index order; jump between
  // the listed path positions with the exact conditional law.
  if (!(std::abs(ar_phi) < 1.0)) fail(ErrorCode::InvalidPhi, "AR coefficient must satisfy |phi| < 1");
  const double phi2 = ar_phi * ar_phi;
  auto partial_var = [&](Index m) {  // sum_{i=0}^{m} phi^{2i}
    return phi2 == 0.0 ? 1.0 : (1.0 - std::pow(phi2, double(m + 1))) / (1.0 - phi2);
  };
  std::vector<Index> path_pos(columns.size(), -1);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const Index j = columns[c];
    const auto before = std::lower_bound(support.begin(), support.end(), j) - support.begin();
    const bool active = static_cast<std::size_t>(before) < support.size() && support[std::size_t(before)] == j;
    if (!active) path_pos[c] = j - before;
  }
  Eigen::MatrixXd x(n, s);
  for (Index i = 0; i < n; ++i) {
    Index last = -1;
    double prev = 0.0;
    for (Index c = 0; c < s; ++c) {
      const Index m = path_pos[std::size_t(c)];
      if (m < 0) {
        x(i, c) = z(i, c);
        continue;
      }
      if (last < 0) {
        prev = std::sqrt(partial_var(m)) * z(i, c);
      } else {
        const Index gap = m - last;
        prev = std::pow(ar_phi, double(gap)) * prev + std::sqrt(partial_var(gap - 1)) * z(i, c);
      }
      last = m;
      x(i, c) = prev;
    }
  }
  return x;
}

namespace {

struct Record {
  double g1;
  double g2;
  std::string method;
  std::string metric;
  double value;
};

using TrialFn = std::function<std::vector<Record>(Index point, Index global_trial)>;

class Design {
 public:
  Design(const ExperimentConfig& cfg, Index p, double phi) : p_(p), phi_(phi), ar_(cfg.design == "ar") {
    if (ar_) return;
    spec_ = cfg.design == "identity"
                ? CovarianceSpec::identity(p)
                : CovarianceSpec{p, cfg.block_size > 0 ? cfg.block_size : std::max<Index>(1, p / 100), cfg.block_corr,
                                 cfg.decay_base, cfg.decay_scale};
    gaussian_.emplace(spec_);
  }

  Eigen::MatrixXd sample(Index rows, const GroundTruth& truth, RandomStream& rng) const {
    if (ar_) return sample_ar_design(rows, p_, truth.support, phi_, rng);
    return gaussian_->sample(rows, rng);
  }

  Eigen::MatrixXd sample_columns(Index rows, const GroundTruth& truth, const std::vector<Index>& cols,
                                 RandomStream& rng) const {
    return sample_design_columns(ar_ ? nullptr : &spec_, phi_, p_, truth.support, rows, cols, rng);
  }

 private:
  Index p_;
  double phi_;
  bool ar_;
  CovarianceSpec spec_;
  std::optional<GaussianDesign> gaussian_;
};

CoefficientLaw law_of(const ExperimentConfig& cfg, double sigma) {
  return cfg.coefficient_law == "bernoulli_gaussian" ? CoefficientLaw::bernoulli_gaussian(sigma)
                                                      : CoefficientLaw::unit_normal();
}

RandomStream stream(const ExperimentConfig& cfg, Index global_trial, StreamPurpose purpose) {
  return RandomStream(cfg.master_seed, stream_id(static_cast<std::uint64_t>(global_trial), purpose));
}

SupportSet ranked_support(const Eigen::VectorXd& magnitude, Index l, ScreeningMethod tag) {
  std::vector<SupportEntry> nz;
  for (Index j = 0; j < magnitude.size(); ++j)
    if (magnitude(j) != 0.0) nz.push_back({j, magnitude(j)});
  std::sort(nz.begin(), nz.end(), [](const SupportEntry& a, const SupportEntry& b) {
    return a.score != b.score ? a.score > b.score : a.index < b.index;
  });
  if (static_cast<Index>(nz.size()) > l) nz.resize(static_cast<std::size_t>(l));
  SupportSet s;
  s.entries = std::move(nz);
  s.method = tag;
  return s;
}

SupportSet lasso_support(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Index l, const ExperimentConfig& cfg) {
  Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const std::vector<double> grid = lasso_lambda_grid(xc, yc, cfg.lambda_grid_size, cfg.lambda_min_ratio);
  const double lambda = cv_lambda(x, y, cfg.cv_folds, grid);
  const Eigen::VectorXd b = lasso_cd(xc, yc, lambda).coefficients;
  return ranked_support(b.cwiseAbs(), l, ScreeningMethod::SIS);
}

// Stage-1 supports for every requested method, sharing the U-scores. With
// `singular` given, a PCS method whose Gram matrix is singular yields an empty
// support flagged there instead of throwing.
std::vector<SupportSet> stage1_supports(const ExperimentConfig& cfg, const Eigen::MatrixXd& x1,
                                        const Eigen::VectorXd& y1, const GroundTruth& truth,
                                        std::vector<bool>* singular = nullptr) {
  const Index l = cfg.selected_size();
  std::optional<UScoreSet> ux, uy;
  std::optional<MomentSummary> moments;
  const DataMatrix data(x1);
  auto prepare = [&] {
    if (!ux) {
      ux = compute_uscores(data);
      uy = compute_response_uscores(y1);
    }
  };
  std::vector<SupportSet> out;
  for (Method m : cfg.methods) {
    switch (m) {
      case Method::SIS:
        prepare();
        out.push_back(select_top_l(sis_scores(*ux, *uy), l));
        break;
      case Method::PCS:
      case Method::PCS_B:
        prepare();
        if (m == Method::PCS_B && !moments) moments = compute_moments(data, y1);
        try {
          out.push_back(m == Method::PCS ? select_top_l(pcs_scores(*ux, *uy, ScreeningMethod::PCS_H), l)
                                         : select_top_l(pcs_scores(*ux, *uy, ScreeningMethod::PCS_B, &*moments), l));
        } catch (const Error& e) {
          if (singular == nullptr || e.code() != ErrorCode::SingularGram) throw;
          (*singular)[out.size()] = true;
          out.emplace_back();
        }
        break;
      case Method::LASSO:
        out.push_back(lasso_support(x1, y1, l, cfg));
        break;
      case Method::Oracle:
        out.push_back(ranked_support(truth.a.cwiseAbs(), truth.a.size(), ScreeningMethod::SIS));
        break;
    }
  }
  return out;
}

double mis_selected(const SupportSet& s, const GroundTruth& truth) {
  double count = 0.0;
  for (Index j : s.indices())
    if (!std::binary_search(truth.support.begin(), truth.support.end(), j)) count += 1.0;
  return count;
}

// Held-out RMSE of a stage-2 OLS fitted on all t training rows.
std::vector<double> stage2_rmse(const std::vector<SupportSet>& supports, const Eigen::MatrixXd& x_train,
                                const Eigen::VectorXd& y_train, const Design& design, const GroundTruth& truth,
                                const ExperimentConfig& cfg, Index global_trial) {
  std::vector<Index> cols(truth.support);
  for (const auto& s : supports) {
    const auto idx = s.indices();
    cols.insert(cols.end(), idx.begin(), idx.end());
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  auto pos = [&](Index j) { return std::lower_bound(cols.begin(), cols.end(), j) - cols.begin(); };

  RandomStream test_rng = stream(cfg, global_trial, StreamPurpose::TestSet);
  RandomStream test_noise = stream(cfg, global_trial, StreamPurpose::TestNoise);
  const Eigen::MatrixXd x_test = design.sample_columns(cfg.test_size, truth, cols, test_rng);
  Eigen::VectorXd y_test = Eigen::VectorXd::Zero(cfg.test_size);
  for (Index j : truth.support) y_test += truth.a(j) * x_test.col(pos(j));
  const double sd = std::sqrt(truth.noise_var);
  for (Index i = 0; i < y_test.size(); ++i) y_test(i) += sd * test_noise.normal();

  std::vector<double> out;
  for (const auto& s : supports) {
    const auto idx = s.indices();
    if (idx.empty()) {
      out.push_back(rmse(y_test, Eigen::VectorXd::Constant(y_test.size(), y_train.mean())));
      continue;
    }
    std::vector<Index> local;
    for (Index j : idx) local.push_back(pos(j));
    const OlsFit ols = ols_with_intercept(x_train(Eigen::all, idx), y_train);
    const Eigen::VectorXd yhat = (x_test(Eigen::all, local) * ols.coefficients).array() + ols.intercept;
    out.push_back(rmse(y_test, yhat));
  }
  return out;
}

void aggregate(ExperimentResult& r, const std::vector<Method>& methods) {
  using Key = std::tuple<double, double, std::string, std::string>;
  std::map<Key, std::size_t> where;
  std::vector<std::vector<double>> values;
  for (const auto& t : r.trials) {
    const Key key{t.grid1, t.grid2, t.method, t.metric_name};
    auto it = where.find(key);
    if (it == where.end()) {
      it = where.emplace(key, r.aggregate.size()).first;
      r.aggregate.push_back({t.grid1, t.grid2, t.method, t.metric_name, 0.0, 0.0, 0});
      values.emplace_back();
    }
    values[it->second].push_back(t.metric_value);
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Eigen::Map<const Eigen::VectorXd> v(values[i].data(), static_cast<Index>(values[i].size()));
    const MeanSummary s = summarize(v);
    r.aggregate[i].mean = s.mean;
    r.aggregate[i].stderr_ = s.stderr_;
    r.aggregate[i].count = s.count;
  }

  // One-sided paired tests of PCS against every other method.
  if (std::find(methods.begin(), methods.end(), Method::PCS) == methods.end()) return;
  const std::size_t base_rows = r.aggregate.size();
  for (std::size_t i = 0; i < base_rows; ++i) {
    const AggregateRow pcs = r.aggregate[i];
    if (pcs.method != "PCS" || (pcs.metric != "rmse" && pcs.metric != "mis_selected")) continue;
    for (Method m : methods) {
      if (m == Method::PCS) continue;
      const auto other = where.find(Key{pcs.grid1, pcs.grid2, std::string(to_string(m)), pcs.metric});
      if (other == where.end()) continue;
      const auto& a = values[i];
      const auto& b = values[other->second];
      double pv = std::numeric_limits<double>::quiet_NaN();
      // unequal counts mean trials were dropped, so the pairs no longer line up
      if (a.size() == b.size()) {
        try {
          pv = paired_ttest_onesided(Eigen::Map<const Eigen::VectorXd>(a.data(), Index(a.size())),
                                     Eigen::Map<const Eigen::VectorXd>(b.data(), Index(b.size())));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::DegenerateVariance) throw;
        }
      }
      r.aggregate.push_back(
          {pcs.grid1, pcs.grid2, "PCS<" + std::string(to_string(m)), "pvalue_" + pcs.metric, pv, 0.0, Index(a.size())});
    }
  }
}

ExperimentResult execute(const ExperimentConfig& cfg, const RunOptions& opts, std::string g1, std::string g2,
                         Index points, const TrialFn& trial) {
  cfg.validate();
  const Index total = points * cfg.trials;
  std::vector<std::vector<Record>> slots(static_cast<std::size_t>(total));
  auto body = [&](Index i) { slots[std::size_t(i)] = trial(i / cfg.trials, i); };

  const auto start = std::chrono::steady_clock::now();
  if (opts.serial) {
    map_trials_serial(total, body);
  } else {
    map_trials(total, opts.threads, body);
  }
  ExperimentResult r;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.threads = opts.serial ? 1 : (opts.threads > 0 ? opts.threads : omp_get_max_threads());
  r.id = cfg.id;
  r.grid1_name = std::move(g1);
  r.grid2_name = std::move(g2);
  for (Index i = 0; i < total; ++i) {
    for (auto& rec : slots[std::size_t(i)]) {
      if (!std::isfinite(rec.value)) fail(ErrorCode::DomainError, "non-finite metric " + rec.metric);
      r.trials.push_back({i, rec.g1, rec.g2, std::move(rec.method), std::move(rec.metric), rec.value,
                          static_cast<std::uint64_t>(i) << 8});
    }
  }
  aggregate(r, cfg.methods);
  return r;
}

void require(const ExperimentConfig& cfg, ExperimentId id) {
  if (cfg.id != id) config_error("config is for " + std::string(to_string(cfg.id)));
}

}  // namespace

// ---------------------------------------------------------------- experiments

ExperimentResult run_selection_error(const ExperimentConfig& cfg, const RunOptions& opts) {
  require(cfg, ExperimentId::SelectionError);
  cfg.validate();
  const Design design(cfg, cfg.p, cfg.phi);
  const CoefficientLaw law = law_of(cfg, cfg.sigma);
  auto trial = [&](Index point, Index g) {
    const Index n = cfg.n_grid[std::size_t(point)];
    RandomStream coef_rng = stream(cfg, g, StreamPurpose::Coefficients);
    RandomStream x_rng = stream(cfg, g, StreamPurpose::Design);
    RandomStream noise_rng = stream(cfg, g, StreamPurpose::Noise);
    const GroundTruth truth = gen_coefficients(cfg.p, cfg.k, law, coef_rng, cfg.noise_var);
    const Eigen::MatrixXd x = design.sample(n, truth, x_rng);
    const Eigen::VectorXd y = gen_response(x, truth, noise_rng);
    const auto supports = stage1_supports(cfg, x, y, truth);
    std::vector<Record> out;
    for (std::size_t m = 0; m < supports.size(); ++m) {
      out.push_back({double(n), double(cfg.p), std::string(to_string(cfg.methods[m])), "mis_selected",
                     mis_selected(supports[m], truth)});
    }
    return out;
  };
  return execute(cfg, opts, "n", "p", Index(cfg.n_grid.size()), trial);
}

ExperimentResult run_two_stage_rmse(const ExperimentConfig& cfg, const RunOptions& opts) {
  require(cfg, ExperimentId::TwoStageRmse);
  cfg.validate();
  const Design design(cfg, cfg.p, cfg.phi);
  const CoefficientLaw law = law_of(cfg, cfg.sigma);
  auto trial = [&](Index point, Index g) {
    const Index t = cfg.t_grid[std::size_t(point)];
    const Index n =
        std::max<Index>(static_cast<Index>(std::ceil(cfg.stage1_log_factor * std::log(double(t)))), 3);
    RandomStream coef_rng = stream(cfg, g, StreamPurpose::Coefficients);
    RandomStream x_rng = stream(cfg, g, StreamPurpose::Design);
    RandomStream noise_rng = stream(cfg, g, StreamPurpose::Noise);
    const GroundTruth truth = gen_coefficients(cfg.p, cfg.k, law, coef_rng, cfg.noise_var);
    const Eigen::MatrixXd x = design.sample(t, truth, x_rng);
    const Eigen::VectorXd y = gen_response(x, truth, noise_rng);
    const auto supports = stage1_supports(cfg, x.topRows(n), y.head(n), truth);
    const auto errs = stage2_rmse(supports, x, y, design, truth, cfg, g);
    std::vector<Record> out;
    for (std::size_t m = 0; m < supports.size(); ++m) {
      out.push_back({double(t), double(n), std::string(to_string(cfg.methods[m])), "rmse", errs[m]});
    }
    return out;
  };
  return execute(cfg, opts, "t", "n", Index(cfg.t_grid.size()), trial);
}

ExperimentResult run_ar_sweep(const ExperimentConfig& cfg, const RunOptions& opts) {
  require(cfg, ExperimentId::ArSweep);
  cfg.validate();
  const std::vector<Index> ps = cfg.p_grid.empty() ? std::vector<Index>{cfg.p} : cfg.p_grid;
  const std::vector<double> phis = cfg.phi_grid.empty() ? std::vector<double>{cfg.phi} : cfg.phi_grid;
  std::vector<std::pair<Index, double>> points;
  for (Index q : ps)
    for (double f : phis) points.emplace_back(q, f);
  const CoefficientLaw law = law_of(cfg, cfg.sigma);
  auto trial = [&](Index point, Index g) {
    const auto [p, phi] = points[std::size_t(point)];
    const Design design(cfg, p, phi);
    RandomStream coef_rng = stream(cfg, g, StreamPurpose::Coefficients);
    RandomStream x_rng = stream(cfg, g, StreamPurpose::Design);
    RandomStream noise_rng = stream(cfg, g, StreamPurpose::Noise);
    const GroundTruth truth = gen_coefficients(p, cfg.k, law, coef_rng, cfg.noise_var);
    const Eigen::MatrixXd x = design.sample(cfg.t_total, truth, x_rng);
    const Eigen::VectorXd y = gen_response(x, truth, noise_rng);
    const auto supports = stage1_supports(cfg, x.topRows(cfg.n_stage1), y.head(cfg.n_stage1), truth);
    const auto errs = stage2_rmse(supports, x, y, design, truth, cfg, g);
    std::vector<Record> out;
    for (std::size_t m = 0; m < supports.size(); ++m) {
      out.push_back({double(p), phi, std::string(to_string(cfg.methods[m])), "rmse", errs[m]});
    }
    return out;
  };
  return execute(cfg, opts, "p", "phi", Index(points.size()), trial);
}

ExperimentResult run_fwer(const ExperimentConfig& cfg, const RunOptions& opts) {
  require(cfg, ExperimentId::Fwer);
  cfg.validate();
  const std::vector<double> sigmas = cfg.sigma_grid.empty() ? std::vector<double>{cfg.sigma} : cfg.sigma_grid;
  std::vector<std::pair<Index, double>> points;
  for (Index n : cfg.n_grid)
    for (double s : sigmas) points.emplace_back(n, s);
  const Design design(cfg, cfg.p, cfg.phi);
  auto trial = [&](Index point, Index g) {
    const auto [n, sigma] = points[std::size_t(point)];
    RandomStream coef_rng = stream(cfg, g, StreamPurpose::Coefficients);
    RandomStream x_rng = stream(cfg, g, StreamPurpose::Design);
    RandomStream noise_rng = stream(cfg, g, StreamPurpose::Noise);
    const GroundTruth truth = gen_coefficients(cfg.p, cfg.k, law_of(cfg, sigma), coef_rng, cfg.noise_var);
    const Eigen::MatrixXd x = design.sample(n, truth, x_rng);
    const Eigen::VectorXd y = gen_response(x, truth, noise_rng);
    // A singular PCS Gram matrix (n close to p) selects nothing, which counts
    // as a selection error; mis_selected is then left out for that trial.
    std::vector<bool> singular(cfg.methods.size(), false);
    const auto supports = stage1_supports(cfg, x, y, truth, &singular);
    std::vector<Record> out;
    for (std::size_t m = 0; m < supports.size(); ++m) {
      const std::string name(to_string(cfg.methods[m]));
      const bool exact = !singular[m] && supports[m].sorted_indices() == truth.support;
      out.push_back({double(n), sigma, name, "selection_error", exact ? 0.0 : 1.0});
      if (!singular[m]) out.push_back({double(n), sigma, name, "mis_selected", mis_selected(supports[m], truth)});
      out.push_back({double(n), sigma, name, "singular_gram", singular[m] ? 1.0 : 0.0});
    }
    return out;
  };
  return execute(cfg, opts, "n", "sigma", Index(points.size()), trial);
}

ExperimentResult run_discovery_counts(const ExperimentConfig& cfg, const RunOptions& opts) {
  require(cfg, ExperimentId::DiscoveryCounts);
  cfg.validate();
  // Threshold list per n: explicit rho values, then those solving xi = target.
  std::vector<std::vector<double>> rhos;
  for (Index n : cfg.n_grid) {
    std::vector<double> list = cfg.rho_grid;
    for (double target : cfg.xi_grid) list.push_back(threshold_for_xi(cfg.p, int(n), target));
    rhos.push_back(std::move(list));
  }
  const Design design(cfg, cfg.p, cfg.phi);
  const CoefficientLaw law = law_of(cfg, cfg.sigma);
  auto trial = [&](Index point, Index g) {
    const Index n = cfg.n_grid[std::size_t(point)];
    RandomStream coef_rng = stream(cfg, g, StreamPurpose::Coefficients);
    RandomStream x_rng = stream(cfg, g, StreamPurpose::Design);
    RandomStream noise_rng = stream(cfg, g, StreamPurpose::Noise);
    GroundTruth truth;
    if (cfg.k > 0) {
      truth = gen_coefficients(cfg.p, cfg.k, law, coef_rng, cfg.noise_var);
    } else {
      truth.a = Eigen::VectorXd::Zero(cfg.p);
      truth.noise_var = cfg.noise_var;
    }
    const Eigen::MatrixXd x = design.sample(n, truth, x_rng);
    const Eigen::VectorXd y = gen_response(x, truth, noise_rng);
    const UScoreSet ux = compute_uscores(DataMatrix(x));
    const UScoreSet uy = compute_response_uscores(y);
    std::vector<Record> out;
    for (Method m : cfg.methods) {
      const Eigen::VectorXd scores =
          m == Method::SIS ? sis_scores(ux, uy).scores
                           : pcs_scores(ux, uy, m == Method::PCS ? ScreeningMethod::PCS_H : ScreeningMethod::PCS_B,
                                        nullptr)
                                 .scores;
      const std::string name(to_string(m));
      for (double rho : rhos[std::size_t(point)]) {
        const double count = static_cast<double>((scores.array() > rho).count());
        out.push_back({double(n), rho, name, "N", count});
        out.push_back({double(n), rho, name, "N_over_p", count / double(cfg.p)});
        out.push_back({double(n), rho, name, "any", count > 0.0 ? 1.0 : 0.0});
      }
    }
    return out;
  };
  ExperimentResult r = execute(cfg, opts, "n", "rho", Index(cfg.n_grid.size()), trial);
  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
    const int n = int(cfg.n_grid[i]);
    for (double rho : rhos[i]) {
      const double x = xi(cfg.p, n, rho);
      r.aggregate.push_back({double(n), rho, "closed_form", "p0", p0(rho, n), 0.0, 1});
      r.aggregate.push_back({double(n), rho, "closed_form", "xi", x, 0.0, 1});
      r.aggregate.push_back({double(n), rho, "closed_form", "poisson_p_any", -std::expm1(-x), 0.0, 1});
    }
  }
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  switch (cfg.id) {
    case ExperimentId::SelectionError: return run_selection_error(cfg, opts);
    case ExperimentId::TwoStageRmse: return run_two_stage_rmse(cfg, opts);
    case ExperimentId::ArSweep: return run_ar_sweep(cfg, opts);
    case ExperimentId::Fwer: return run_fwer(cfg, opts);
    case ExperimentId::DiscoveryCounts: return run_discovery_counts(cfg, opts);
  }
  config_error("unknown experiment");
}

// ---------------------------------------------------------------- output

std::string trials_csv(const ExperimentResult& r) {
  std::string out = "trial," + r.grid1_name + "," + r.grid2_name + ",method,metric,value,seed_used\n";
  for (const auto& t : r.trials) {
    out += std::to_string(t.trial_index) + ',' + io::format_double(t.grid1) + ',' + io::format_double(t.grid2) + ',' +
           t.method + ',' + t.metric_name + ',' + io::format_double(t.metric_value) + ',' +
           std::to_string(t.seed_used) + '\n';
  }
  return out;
}

std::string aggregate_csv(const ExperimentResult& r) {
  std::string out = r.grid1_name + "," + r.grid2_name + ",method,metric,mean,stderr,count\n";
  for (const auto& a : r.aggregate) {
    out += io::format_double(a.grid1) + ',' + io::format_double(a.grid2) + ',' + a.method + ',' + a.metric + ',' +
           io::format_double(a.mean) + ',' + io::format_double(a.stderr_) + ',' + std::to_string(a.count) + '\n';
  }
  return out;
}

json manifest(const ExperimentConfig& cfg, const ExperimentResult& r) {
  return {
      {"version", std::string(kVersion)},
      {"rng", std::string(kRngAlgorithm)},
      {"experiment", std::string(to_string(cfg.id))},
      {"master_seed", cfg.master_seed},
      {"seed_derivation", "philox key = master_seed; counter stream = (global_trial << 8) | purpose"},
      {"config", cfg.to_json()},
      {"threads", r.threads},
      {"seconds", r.seconds},
      {"trial_rows", r.trials.size()},
      {"aggregate_rows", r.aggregate.size()},
  };
}

const AggregateRow& find_row(const ExperimentResult& r, double grid1, double grid2, const std::string& method,
                             const std::string& metric) {
  for (const auto& a : r.aggregate) {
    if (a.grid1 == grid1 && a.grid2 == grid2 && a.method == method && a.metric == metric) return a;
  }
  throw std::out_of_range("no aggregate row for " + method + "/" + metric);
}

}  // namespace sparcs
