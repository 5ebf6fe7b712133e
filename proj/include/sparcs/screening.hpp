#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sparcs/linalg.hpp"

namespace sparcs {

enum class ScreeningMethod { SIS, PCS_H, PCS_B };

std::string_view to_string(ScreeningMethod m) noexcept;
/// Accepts "sis", "pcs" (= PCS_H), "pcs_h", "pcs_b" in any case.
ScreeningMethod parse_screening_method(std::string_view name);

struct ScreeningScores {
  Eigen::VectorXd scores;  // nonnegative
  ScreeningMethod method = ScreeningMethod::SIS;
};

struct SupportEntry {
  Index index = 0;
  double score = 0.0;
};

/// Selected variables sorted by descending score, then ascending index.
struct SupportSet {
  std::vector<SupportEntry> entries;
  ScreeningMethod method = ScreeningMethod::SIS;
  std::optional<double> threshold_used;

  std::size_t size() const noexcept { return entries.size(); }
  std::vector<Index> indices() const;
  /// Indices in ascending order, for set comparisons.
  std::vector<Index> sorted_indices() const;
};

/// |r^xy_i| = |ux_i . uy|
ScreeningScores sis_scores(const UScoreSet& ux, const UScoreSet& uy);

/// PCS_H: |H^xy_i| with H^xy = tilde(U)^T uy. PCS_B: |B^xy_i| of the
/// min-norm OLS solution; needs the moment summary for the variances.
ScreeningScores pcs_scores(const UScoreSet& ux, const UScoreSet& uy, ScreeningMethod variant,
                           const MomentSummary* moments = nullptr);

/// Convenience: U-scores, moments and the requested scores from raw data.
ScreeningScores screen_scores(const DataMatrix& data, const Eigen::VectorXd& response, ScreeningMethod method);

SupportSet select_top_l(const ScreeningScores& scores, Index l);
SupportSet select_by_threshold(const ScreeningScores& scores, double rho);

}  // namespace sparcs
