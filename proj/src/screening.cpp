#include "sparcs/screening.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "sparcs/error.hpp"
#include "sparcs/kernels.hpp"

namespace sparcs {

std::string_view to_string(ScreeningMethod m) noexcept {
  switch (m) {
    case ScreeningMethod::SIS: return "SIS";
    case ScreeningMethod::PCS_H: return "PCS_H";
    case ScreeningMethod::PCS_B: return "PCS_B";
  }
  return "?";
}

ScreeningMethod parse_screening_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "sis") return ScreeningMethod::SIS;
  if (lower == "pcs" || lower == "pcs_h") return ScreeningMethod::PCS_H;
  if (lower == "pcs_b") return ScreeningMethod::PCS_B;
  fail(ErrorCode::ConfigError, "unknown screening method '" + std::string(name) + "'");
}

std::vector<Index> SupportSet::indices() const {
  std::vector<Index> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.index);
  return out;
}

std::vector<Index> SupportSet::sorted_indices() const {
  auto out = indices();
  std::sort(out.begin(), out.end());
  return out;
}

ScreeningScores sis_scores(const UScoreSet& ux, const UScoreSet& uy) {
  return {cross_correlation(ux, uy).cwiseAbs(), ScreeningMethod::SIS};
}

ScreeningScores pcs_scores(const UScoreSet& ux, const UScoreSet& uy, ScreeningMethod variant,
                           const MomentSummary* moments) {
  if (uy.p() != 1 || ux.dim() != uy.dim()) fail(ErrorCode::DimensionMismatch, "U-score dimensions differ");
  switch (variant) {
    case ScreeningMethod::PCS_H: {
      const TildeUScores t = tilde_uscores(ux);
      Eigen::VectorXd h;
      kernels::column_dots(t.tilde.scores, uy.scores.col(0), h);
      return {h.cwiseAbs().cwiseMin(1.0), ScreeningMethod::PCS_H};
    }
    case ScreeningMethod::PCS_B: {
      if (moments == nullptr) fail(ErrorCode::InvalidParams, "PCS_B needs the moment summary");
      // Same singularity contract as PCS_H.
      (void)GramFactor(ux);
      return {min_norm_coefficients(ux, uy, *moments).cwiseAbs(), ScreeningMethod::PCS_B};
    }
    case ScreeningMethod::SIS:
      break;
  }
  fail(ErrorCode::InvalidParams, "pcs_scores called with SIS");
}

ScreeningScores screen_scores(const DataMatrix& data, const Eigen::VectorXd& response, ScreeningMethod method) {
  if (response.size() != data.n()) fail(ErrorCode::DimensionMismatch, "response length differs from sample count");
  const UScoreSet ux = compute_uscores(data);
  const UScoreSet uy = compute_response_uscores(response);
  switch (method) {
    case ScreeningMethod::SIS: return sis_scores(ux, uy);
    case ScreeningMethod::PCS_H: return pcs_scores(ux, uy, method);
    case ScreeningMethod::PCS_B: {
      const MomentSummary m = compute_moments(data, response);
      return pcs_scores(ux, uy, method, &m);
    }
  }
  fail(ErrorCode::InvalidParams, "unknown screening method");
}

namespace {

// Descending score, ascending index.
struct RankOrder {
  const Eigen::VectorXd* s;
  bool operator()(Index a, Index b) const {
    const double sa = (*s)(a), sb = (*s)(b);
    if (sa != sb) return sa > sb;
    return a < b;
  }
};

SupportSet make_support(const ScreeningScores& scores, std::vector<Index>& order, std::size_t count) {
  SupportSet out;
  out.method = scores.method;
  out.entries.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.entries.push_back({order[i], scores.scores(order[i])});
  return out;
}

}  // namespace

SupportSet select_top_l(const ScreeningScores& scores, Index l) {
  const Index p = scores.scores.size();
  if (l < 1 || l > p) fail(ErrorCode::InvalidL, "l = " + std::to_string(l) + " outside [1, " + std::to_string(p) + "]");
  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  std::partial_sort(order.begin(), order.begin() + l, order.end(), RankOrder{&scores.scores});
  return make_support(scores, order, static_cast<std::size_t>(l));
}

SupportSet select_by_threshold(const ScreeningScores& scores, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) fail(ErrorCode::DomainError, "threshold must lie in [0, 1]");
  std::vector<Index> order;
  for (Index i = 0; i < scores.scores.size(); ++i) {
    if (scores.scores(i) > rho) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), RankOrder{&scores.scores});
  SupportSet out = make_support(scores, order, order.size());
  out.threshold_used = rho;
  return out;
}

}  // namespace sparcs
