#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "depthlift/skeleton.hpp"

namespace depthlift {

// Correlation above this value counts as "moderate" in summaries.
inline constexpr double kModerateCorrelation = 0.3;

// Composite-normality Anderson-Darling critical value at alpha = 0.05 for
// the small-sample corrected statistic.
inline constexpr double kAndersonCritical05 = 0.787;

// ---- special functions ----------------------------------------------------

double normal_cdf(double x);

// Inverse standard normal CDF; rational approximation polished with one
// Halley step, accurate to ~1e-15. p must lie in (0, 1).
double normal_quantile(double p);

// Regularized incomplete beta I_x(a, b) via Lentz continued fraction.
double regularized_incomplete_beta(double x, double a, double b);

// Two-sided p-value of a Student-t statistic with dof degrees of freedom.
double student_t_two_sided_p(double t, double dof);

// ---- descriptive statistics -----------------------------------------------

struct SampleSummary {
  long n = 0;
  double mean = 0.0;
  double stddev = 0.0;            // sample (n-1) standard deviation
  double skewness = 0.0;          // moment-based g1
  double excess_kurtosis = 0.0;   // moment-based g2
  std::vector<double> bin_edges;  // Freedman-Diaconis bins
  std::vector<long> bin_counts;
};

SampleSummary summarize(std::span<const double> xs);

// ---- normality tests --------------------------------------------------------

struct TestResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

// Shapiro-Wilk W with Royston's AS R94 approximation; valid for 3 <= n <= 5000.
TestResult shapiro_wilk(std::span<const double> xs);

// Shapiro-Wilk with the validity cap applied: samples larger than 5000 are
// uniformly subsampled with a seeded RNG (capped set to true when that
// happens).
TestResult shapiro_wilk_capped(std::span<const double> xs, std::uint64_t seed,
                               bool* capped = nullptr);

struct AndersonResult {
  double a2_star = 0.0;         // small-sample corrected A^2 statistic
  double critical_value = 0.0;  // alpha = 0.05 critical value (0.787)
};

// Composite-case Anderson-Darling (mean and variance estimated from the
// sample), with correction A2* = A2 * (1 + 0.75/n + 2.25/n^2); n >= 8.
AndersonResult anderson_darling(std::span<const double> xs);

// D'Agostino K^2 omnibus test (skewness + kurtosis transforms); n >= 20.
TestResult dagostino_k2(std::span<const double> xs);

// The three tests bundled; entries whose sample-size or degeneracy
// preconditions fail stay empty instead of aborting the battery.
struct NormalityReport {
  std::optional<TestResult> shapiro;       // capped at n = 5000 via subsampling
  std::optional<AndersonResult> anderson;  // needs n >= 8
  std::optional<TestResult> dagostino;     // needs n >= 20
};

NormalityReport normality_battery(std::span<const double> xs, std::uint64_t seed);

// ---- rank correlation -------------------------------------------------------

struct CorrResult {
  double coefficient = 0.0;
  double p_value = 0.0;
};

// Spearman's rho with average ranks; p from the t approximation with n-2 dof.
CorrResult spearman(std::span<const double> xs, std::span<const double> ys);

// Kendall's tau-b with tie corrections; p from the tie-adjusted normal
// approximation to the concordance statistic.
CorrResult kendall_tau(std::span<const double> xs, std::span<const double> ys);

// ---- per-cell analysis ------------------------------------------------------

struct CorrelationReport {
  CorrResult spearman;
  CorrResult kendall;
  long n = 0;
};

// All (depth, z) pairs of one joint over frames matching (camera, action).
// `zs` holds the camera-frame z of every joint per frame, aligned with
// d.frames. Throws DataError when the selection is empty or depth is missing.
std::pair<std::vector<double>, std::vector<double>> subsample(
    const Dataset& d, const std::vector<std::array<double, kNumJoints>>& zs, int camera,
    int action, JointId joint);

struct SignificanceSummary {
  long n_cells = 0;
  double frac_significant_001 = 0.0;
  double frac_significant_01 = 0.0;
  double frac_significant_05 = 0.0;
  double frac_negative = 0.0;
  double frac_moderate = 0.0;  // coefficient > kModerateCorrelation
};

// Fractions are based on the Spearman p-value and coefficient of each cell.
SignificanceSummary significance_summary(std::span<const CorrelationReport> reports);

struct TrendFit {
  double slope = 0.0;
  double intercept = 0.0;
  double pearson_r = 0.0;
};

// Ordinary least squares y = slope * x + intercept; needs >= 3 points and
// non-constant x.
TrendFit trend_fit(std::span<const double> xs, std::span<const double> ys);

// Average ranks (ties share the mean rank), used by both rank correlations.
std::vector<double> average_ranks(std::span<const double> xs);

}  // namespace depthlift
