#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>

#include "swarmclean/metrics.hpp"

namespace swarmclean {

/// Median with the even-count convention of averaging the two central values.
inline double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

/// Per-second elementwise median across runs sharing one time grid.
inline MetricsSeries median_series(std::span<const MetricsSeries> runs) {
  if (runs.empty()) throw std::invalid_argument("median_series: no runs");
  const std::size_t len = runs.front().size();
  for (const MetricsSeries& r : runs)
    if (r.size() != len) throw std::invalid_argument("median_series: runs have different lengths");
  MetricsSeries out(len);
  std::vector<double> cue(runs.size()), ratio(runs.size()), coh(runs.size());
  for (std::size_t i = 0; i < len; ++i) {
    const long t = runs.front()[i].t;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const MetricsRecord& rec = runs[k][i];
      if (rec.t != t) throw std::invalid_argument("median_series: runs have different time grids");
      cue[k] = rec.mean_cue;
      ratio[k] = rec.ratio_within_rc;
      coh[k] = rec.coherency_m;
    }
    out[i] = {t, median(cue), median(ratio), median(coh)};
  }
  return out;
}

/// Upper tail P(X > f) of the F(d1, d2) distribution.
inline double f_upper_tail(double f, double d1, double d2) {
  if (!(d1 > 0.0 && d2 > 0.0)) throw std::invalid_argument("f_upper_tail: degrees of freedom must be > 0");
  if (!(f > 0.0)) return 1.0;
  const boost::math::fisher_f_distribution<double> dist(d1, d2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

/// Response values with one integer level per declared factor per row.
class ObservationTable {
 public:
  explicit ObservationTable(std::vector<std::string> factor_names) : names_(std::move(factor_names)) {
    if (names_.empty()) throw std::invalid_argument("ObservationTable: at least one factor required");
    levels_.resize(names_.size());
  }

  void add(double response, std::span<const long> levels) {
    if (levels.size() != names_.size()) throw std::invalid_argument("ObservationTable: wrong number of levels");
    response_.push_back(response);
    for (std::size_t f = 0; f < levels.size(); ++f) levels_[f].push_back(levels[f]);
  }

  void add(double response, std::initializer_list<long> levels) {
    add(response, std::span<const long>(levels.begin(), levels.size()));
  }

  std::size_t rows() const { return response_.size(); }
  std::size_t factors() const { return names_.size(); }
  const std::string& name(std::size_t f) const { return names_[f]; }
  std::span<const double> response() const { return response_; }
  std::span<const long> levels(std::size_t f) const { return levels_[f]; }

 private:
  std::vector<std::string> names_;
  std::vector<double> response_;
  std::vector<std::vector<long>> levels_;
};

struct FactorEffect {
  std::string name;
  double sum_sq = 0.0;
  double F = 0.0;
  double p = 1.0;
  int df_between = 0;
  int df_within = 0;
};

struct AnovaResult {
  std::vector<FactorEffect> effects;
  double residual_sum_sq = 0.0;
  int residual_df = 0;
  /// Set when the residual mean square is zero; every F is then reported as 0.
  bool degenerate_residual = false;

  const FactorEffect& effect(const std::string& name) const {
    for (const FactorEffect& e : effects)
      if (e.name == name) return e;
    throw std::out_of_range("no factor named " + name);
  }
};

/// Main-effects ANOVA with sequential (Type I) sums of squares, factors
/// entered in declaration order. Each factor is dummy-coded against its lowest
/// level; a factor that adds fewer columns of rank than it has levels - 1 is
/// confounded and rejected.
inline AnovaResult anova_main_effects(const ObservationTable& table) {
  const auto n = static_cast<Eigen::Index>(table.rows());
  if (n == 0) throw std::invalid_argument("anova: empty table");

  std::vector<std::map<long, Eigen::Index>> codes(table.factors());
  Eigen::Index cols = 1;
  for (std::size_t f = 0; f < table.factors(); ++f) {
    for (long lv : table.levels(f)) codes[f].emplace(lv, 0);
    if (codes[f].size() < 2) throw std::invalid_argument("anova: factor '" + table.name(f) + "' has < 2 levels");
    Eigen::Index k = -1;
    for (auto& [lv, idx] : codes[f]) idx = k++;
    cols += static_cast<Eigen::Index>(codes[f].size()) - 1;
  }

  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n, cols);
  design.col(0).setOnes();
  Eigen::Index offset = 1;
  std::vector<Eigen::Index> block_end;
  for (std::size_t f = 0; f < table.factors(); ++f) {
    const auto lv = table.levels(f);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index idx = codes[f].at(lv[static_cast<std::size_t>(i)]);
      if (idx >= 0) design(i, offset + idx) = 1.0;
    }
    offset += static_cast<Eigen::Index>(codes[f].size()) - 1;
    block_end.push_back(offset);
  }
  const Eigen::Map<const Eigen::VectorXd> y(table.response().data(), n);

  auto fit = [&](Eigen::Index ncols, Eigen::Index& rank) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.leftCols(ncols));
    rank = qr.rank();
    const Eigen::VectorXd beta = qr.solve(y);
    return (y - design.leftCols(ncols) * beta).squaredNorm();
  };

  AnovaResult result;
  Eigen::Index prev_rank = 0;
  double prev_rss = fit(1, prev_rank);
  for (std::size_t f = 0; f < table.factors(); ++f) {
    Eigen::Index rank = 0;
    const double rss = fit(block_end[f], rank);
    const auto expected = static_cast<Eigen::Index>(codes[f].size()) - 1;
    if (rank - prev_rank != expected)
      throw std::invalid_argument("anova: factor '" + table.name(f) + "' is confounded with earlier factors");
    FactorEffect e;
    e.name = table.name(f);
    e.sum_sq = std::max(0.0, prev_rss - rss);
    e.df_between = static_cast<int>(expected);
    result.effects.push_back(e);
    prev_rss = rss;
    prev_rank = rank;
  }

  const Eigen::Index df_res = n - prev_rank;
  if (df_res < 1) throw std::invalid_argument("anova: no residual degrees of freedom");
  result.residual_sum_sq = prev_rss;
  result.residual_df = static_cast<int>(df_res);
  const double scale = y.squaredNorm();
  result.degenerate_residual = prev_rss <= 1e-20 * std::max(1.0, scale);

  const double ms_res = prev_rss / static_cast<double>(df_res);
  for (FactorEffect& e : result.effects) {
    e.df_within = result.residual_df;
    if (result.degenerate_residual) {
      e.F = 0.0;
      e.p = 1.0;
      continue;
    }
    e.F = (e.sum_sq / e.df_between) / ms_res;
    e.p = f_upper_tail(e.F, e.df_between, e.df_within);
  }
  return result;
}

}  // namespace swarmclean
