#include "depthlift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace depthlift {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

namespace {

// Acklam's rational approximation to the inverse normal CDF.
double normal_quantile_estimate(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw NumericError("normal_quantile requires p in (0, 1)");
  double x = normal_quantile_estimate(p);
  // One Halley refinement against the exact CDF.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

namespace {

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Continued fraction for the incomplete beta (modified Lentz).
double betacf(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  constexpr int max_iter = 300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw NumericError("incomplete beta requires a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(x, a, b) / a;
  }
  return 1.0 - front * betacf(1.0 - x, b, a) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) throw NumericError("t distribution requires dof > 0");
  if (!std::isfinite(t)) return 0.0;
  // 2 * sf(|t|) = I_{dof/(dof+t^2)}(dof/2, 1/2)
  const double x = dof / (dof + t * t);
  return std::clamp(regularized_incomplete_beta(x, 0.5 * dof, 0.5), 0.0, 1.0);
}

// ---- descriptive statistics -------------------------------------------------

namespace {

struct Moments {
  double mean, m2, m3, m4;  // central moments with 1/n normalization
};

Moments central_moments(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  return {mean, m2 / n, m3 / n, m4 / n};
}

double quantile_type7(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

SampleSummary summarize(std::span<const double> xs) {
  if (xs.size() < 3) throw DataError("summarize requires n >= 3");
  const auto mom = central_moments(xs);
  if (!(mom.m2 > 0.0)) throw NumericError("summarize: sample variance is zero");

  SampleSummary s;
  s.n = static_cast<long>(xs.size());
  s.mean = mom.mean;
  s.stddev = std::sqrt(mom.m2 * static_cast<double>(xs.size()) / (static_cast<double>(xs.size()) - 1.0));
  s.skewness = mom.m3 / std::pow(mom.m2, 1.5);
  s.excess_kurtosis = mom.m4 / (mom.m2 * mom.m2) - 3.0;

  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_type7(sorted, 0.75) - quantile_type7(sorted, 0.25);
  const double range = sorted.back() - sorted.front();
  const double fd_width = 2.0 * iqr / std::cbrt(static_cast<double>(xs.size()));
  std::size_t n_bins;
  if (fd_width > 0.0 && range > 0.0) {
    n_bins = static_cast<std::size_t>(std::ceil(range / fd_width));
  } else {
    n_bins = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(xs.size()))));
  }
  n_bins = std::clamp<std::size_t>(n_bins, 1, 4096);

  s.bin_edges.resize(n_bins + 1);
  for (std::size_t i = 0; i <= n_bins; ++i) {
    s.bin_edges[i] = sorted.front() + range * static_cast<double>(i) / static_cast<double>(n_bins);
  }
  s.bin_counts.assign(n_bins, 0);
  for (double x : xs) {
    auto idx = range > 0.0
                   ? static_cast<std::size_t>((x - sorted.front()) / range * static_cast<double>(n_bins))
                   : std::size_t{0};
    if (idx >= n_bins) idx = n_bins - 1;  // right edge belongs to the last bin
    ++s.bin_counts[idx];
  }
  return s;
}

// ---- Shapiro-Wilk (Royston, AS R94) ------------------------------------------

TestResult shapiro_wilk(std::span<const double> xs) {
  const auto n = static_cast<long>(xs.size());
  if (n < 3 || n > 5000) {
    throw DataError("shapiro_wilk is valid for 3 <= n <= 5000, got n = " + std::to_string(n));
  }
  std::vector<double> x(xs.begin(), xs.end());
  std::sort(x.begin(), x.end());
  if (!(x.back() - x.front() > 0.0)) throw NumericError("shapiro_wilk: sample has zero range");

  const double nd = static_cast<double>(n);

  // Expected normal order statistics and normalized weights.
  std::vector<double> m(n);
  for (long i = 0; i < n; ++i) {
    m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (nd + 0.25));
  }
  double ssq_m = 0.0;
  for (double v : m) ssq_m += v * v;

  std::vector<double> a(n, 0.0);
  if (n == 3) {
    a[0] = -M_SQRT1_2;
    a[2] = M_SQRT1_2;
  } else {
    const double u = 1.0 / std::sqrt(nd);
    const double rm = 1.0 / std::sqrt(ssq_m);
    const double an =
        -2.706056 * std::pow(u, 5) + 4.434685 * std::pow(u, 4) - 2.071190 * std::pow(u, 3) -
        0.147981 * u * u + 0.221157 * u + m[n - 1] * rm;
    double phi;
    if (n > 5) {
      const double an1 =
          -3.582633 * std::pow(u, 5) + 5.682633 * std::pow(u, 4) - 1.752461 * std::pow(u, 3) -
          0.293762 * u * u + 0.042981 * u + m[n - 2] * rm;
      phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
            (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
      a[n - 1] = an;
      a[n - 2] = an1;
      a[0] = -an;
      a[1] = -an1;
      for (long i = 2; i < n - 2; ++i) a[i] = m[i] / std::sqrt(phi);
    } else {
      phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * an * an);
      a[n - 1] = an;
      a[0] = -an;
      for (long i = 1; i < n - 1; ++i) a[i] = m[i] / std::sqrt(phi);
    }
  }

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= nd;
  double numer = 0.0, denom = 0.0;
  for (long i = 0; i < n; ++i) {
    numer += a[i] * x[i];
    denom += (x[i] - mean) * (x[i] - mean);
  }
  const double w = std::min(numer * numer / denom, 1.0);

  double p;
  if (n == 3) {
    constexpr double stqr = 1.047197551196598;  // asin(sqrt(3/4))
    p = 6.0 / M_PI * (std::asin(std::sqrt(w)) - stqr);
    p = std::clamp(p, 0.0, 1.0);
  } else if (n <= 11) {
    const double g = -2.273 + 0.459 * nd;
    const double mu = 0.5440 - 0.39978 * nd + 0.025054 * nd * nd - 0.0006714 * nd * nd * nd;
    const double sigma = std::exp(1.3822 - 0.77857 * nd + 0.062767 * nd * nd - 0.0020322 * nd * nd * nd);
    const double arg = g - std::log1p(-w);
    if (arg <= 0.0) {
      p = 0.0;  // W far in the rejection tail
    } else {
      const double z = (-std::log(arg) - mu) / sigma;
      p = 1.0 - normal_cdf(z);
    }
  } else {
    const double ln_n = std::log(nd);
    const double mu = -1.5861 - 0.31082 * ln_n - 0.083751 * ln_n * ln_n + 0.0038915 * ln_n * ln_n * ln_n;
    const double sigma = std::exp(-0.4803 - 0.082676 * ln_n + 0.0030302 * ln_n * ln_n);
    const double z = (std::log1p(-w) - mu) / sigma;
    p = 1.0 - normal_cdf(z);
  }
  return {w, p};
}

TestResult shapiro_wilk_capped(std::span<const double> xs, std::uint64_t seed, bool* capped) {
  constexpr std::size_t kMax = 5000;
  if (capped) *capped = xs.size() > kMax;
  if (xs.size() <= kMax) return shapiro_wilk(xs);

  // Partial Fisher-Yates: the first kMax entries form a uniform subsample.
  std::vector<double> pool(xs.begin(), xs.end());
  Rng rng(seed, /*stream=*/31);
  for (std::size_t i = 0; i < kMax; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(pool.size() - i));
    std::swap(pool[i], pool[std::min(j, pool.size() - 1)]);
  }
  pool.resize(kMax);
  return shapiro_wilk(pool);
}

// ---- Anderson-Darling (composite normality) -----------------------------------

AndersonResult anderson_darling(std::span<const double> xs) {
  const auto n = static_cast<long>(xs.size());
  if (n < 8) throw DataError("anderson_darling requires n >= 8");
  std::vector<double> x(xs.begin(), xs.end());
  std::sort(x.begin(), x.end());

  const double nd = static_cast<double>(n);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= nd;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= (nd - 1.0);
  if (!(var > 0.0)) throw NumericError("anderson_darling: sample variance is zero");
  const double sd = std::sqrt(var);

  double sum = 0.0;
  for (long i = 0; i < n; ++i) {
    const double zi = (x[i] - mean) / sd;
    const double zri = (x[n - 1 - i] - mean) / sd;
    // log(Phi) and log(1 - Phi) via erfc for tail accuracy.
    const double log_cdf = std::log(0.5 * std::erfc(-zi * M_SQRT1_2));
    const double log_sf = std::log(0.5 * std::erfc(zri * M_SQRT1_2));
    sum += (2.0 * static_cast<double>(i) + 1.0) * (log_cdf + log_sf);
  }
  const double a2 = -nd - sum / nd;
  const double a2_star = a2 * (1.0 + 0.75 / nd + 2.25 / (nd * nd));
  return {a2_star, kAndersonCritical05};
}

NormalityReport normality_battery(std::span<const double> xs, std::uint64_t seed) {
  NormalityReport rep;
  try {
    if (xs.size() >= 3) rep.shapiro = shapiro_wilk_capped(xs, seed);
  } catch (const Error&) {
  }
  try {
    rep.anderson = anderson_darling(xs);
  } catch (const Error&) {
  }
  try {
    rep.dagostino = dagostino_k2(xs);
  } catch (const Error&) {
  }
  return rep;
}

// ---- D'Agostino K^2 ------------------------------------------------------------

namespace {

double skewness_z(double g1, double nd) {
  const double y = g1 * std::sqrt((nd + 1.0) * (nd + 3.0) / (6.0 * (nd - 2.0)));
  const double beta2 = 3.0 * (nd * nd + 27.0 * nd - 70.0) * (nd + 1.0) * (nd + 3.0) /
                       ((nd - 2.0) * (nd + 5.0) * (nd + 7.0) * (nd + 9.0));
  const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
  const double delta = 1.0 / std::sqrt(0.5 * std::log(w2));
  const double alpha = std::sqrt(2.0 / (w2 - 1.0));
  const double ya = (y == 0.0 ? 1.0 : y) / alpha;
  return delta * std::log(ya + std::sqrt(ya * ya + 1.0));
}

double kurtosis_z(double b2, double nd) {
  const double eb2 = 3.0 * (nd - 1.0) / (nd + 1.0);
  const double vb2 = 24.0 * nd * (nd - 2.0) * (nd - 3.0) /
                     ((nd + 1.0) * (nd + 1.0) * (nd + 3.0) * (nd + 5.0));
  const double x = (b2 - eb2) / std::sqrt(vb2);
  const double sqrt_b1 = 6.0 * (nd * nd - 5.0 * nd + 2.0) / ((nd + 7.0) * (nd + 9.0)) *
                         std::sqrt(6.0 * (nd + 3.0) * (nd + 5.0) / (nd * (nd - 2.0) * (nd - 3.0)));
  const double a = 6.0 + 8.0 / sqrt_b1 * (2.0 / sqrt_b1 + std::sqrt(1.0 + 4.0 / (sqrt_b1 * sqrt_b1)));
  const double t1 = 1.0 - 2.0 / (9.0 * a);
  const double denom = 1.0 + x * std::sqrt(2.0 / (a - 4.0));
  const double t2 = std::copysign(std::cbrt((1.0 - 2.0 / a) / std::abs(denom)), denom);
  return (t1 - t2) / std::sqrt(2.0 / (9.0 * a));
}

}  // namespace

TestResult dagostino_k2(std::span<const double> xs) {
  const auto n = static_cast<long>(xs.size());
  if (n < 20) throw DataError("dagostino_k2 requires n >= 20, got n = " + std::to_string(n));
  const auto mom = central_moments(xs);
  if (!(mom.m2 > 0.0)) throw NumericError("dagostino_k2: sample variance is zero");
  const double nd = static_cast<double>(n);

  const double g1 = mom.m3 / std::pow(mom.m2, 1.5);
  const double b2 = mom.m4 / (mom.m2 * mom.m2);
  const double z1 = skewness_z(g1, nd);
  const double z2 = kurtosis_z(b2, nd);
  const double k2 = z1 * z1 + z2 * z2;
  // Chi-square survival with 2 degrees of freedom.
  return {k2, std::exp(-0.5 * k2)};
}

// ---- rank correlation -----------------------------------------------------------

std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return xs[i] < xs[j]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double shared = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

CorrResult spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DataError("spearman: length mismatch");
  const auto n = static_cast<long>(xs.size());
  if (n < 3) throw DataError("spearman requires n >= 3");

  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);

  const double nd = static_cast<double>(n);
  const double mean = (nd + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (long i = 0; i < n; ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw NumericError("spearman: correlation undefined for a constant input");
  }
  double rho = sxy / std::sqrt(sxx * syy);
  rho = std::clamp(rho, -1.0, 1.0);

  double p;
  if (std::abs(rho) >= 1.0) {
    p = 0.0;
  } else {
    const double t = rho * std::sqrt((nd - 2.0) / (1.0 - rho * rho));
    p = student_t_two_sided_p(t, nd - 2.0);
  }
  return {rho, p};
}

namespace {

// Counts inversions by y within the x-sorted order (merge sort).
std::uint64_t count_inversions(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                               std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = (lo + hi) / 2;
  std::uint64_t inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += mid - i;
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<long>(lo), buf.begin() + static_cast<long>(hi),
            v.begin() + static_cast<long>(lo));
  return inv;
}

// Sum over tie groups of f(t) for a sorted vector.
template <typename F>
double tie_sum(const std::vector<double>& sorted, F f) {
  double total = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    if (t > 1.0) total += f(t);
    i = j + 1;
  }
  return total;
}

}  // namespace

CorrResult kendall_tau(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DataError("kendall_tau: length mismatch");
  const auto n = static_cast<long>(xs.size());
  if (n < 3) throw DataError("kendall_tau requires n >= 3");

  // Knight's O(n log n) scheme: sort by (x, y), count discordant pairs as
  // inversions of y, correct for ties in x, y and joint ties.
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (xs[i] != xs[j]) return xs[i] < xs[j];
    return ys[i] < ys[j];
  });

  std::vector<double> y_sorted(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) y_sorted[i] = ys[order[i]];

  // Joint-tie and x-tie counts from the sorted order.
  double n1 = 0.0, n3 = 0.0;  // sum t(t-1)/2 over x ties and joint ties
  double vt = 0.0, vt1 = 0.0, vt2 = 0.0;
  {
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
      const double t = static_cast<double>(j - i + 1);
      if (t > 1.0) {
        n1 += t * (t - 1.0) / 2.0;
        vt += t * (t - 1.0) * (2.0 * t + 5.0);
        vt1 += t * (t - 1.0);
        vt2 += t * (t - 1.0) * (t - 2.0);
        // joint ties within the x-tie group
        std::size_t a = i;
        while (a <= j) {
          std::size_t b = a;
          while (b + 1 <= j && ys[order[b + 1]] == ys[order[a]]) ++b;
          const double u = static_cast<double>(b - a + 1);
          if (u > 1.0) n3 += u * (u - 1.0) / 2.0;
          a = b + 1;
        }
      }
      i = j + 1;
    }
  }

  std::vector<double> work = y_sorted;
  std::vector<double> buf(work.size());
  const double swaps = static_cast<double>(count_inversions(work, buf, 0, work.size()));

  std::vector<double> ys_only(ys.begin(), ys.end());
  std::sort(ys_only.begin(), ys_only.end());
  double n2 = 0.0, vu = 0.0, vu1 = 0.0, vu2 = 0.0;
  n2 = tie_sum(ys_only, [](double t) { return t * (t - 1.0) / 2.0; });
  vu = tie_sum(ys_only, [](double t) { return t * (t - 1.0) * (2.0 * t + 5.0); });
  vu1 = tie_sum(ys_only, [](double t) { return t * (t - 1.0); });
  vu2 = tie_sum(ys_only, [](double t) { return t * (t - 1.0) * (t - 2.0); });

  const double nd = static_cast<double>(n);
  const double n0 = nd * (nd - 1.0) / 2.0;
  // concordant minus discordant from the inversion count
  const double cmd = n0 - n1 - n2 + n3 - 2.0 * swaps;

  const double denom_x = n0 - n1;
  const double denom_y = n0 - n2;
  if (!(denom_x > 0.0) || !(denom_y > 0.0)) {
    throw NumericError("kendall_tau: correlation undefined for an all-tied input");
  }
  double tau = cmd / std::sqrt(denom_x * denom_y);
  tau = std::clamp(tau, -1.0, 1.0);

  // Tie-adjusted variance of (C - D); normal approximation.
  const double v0 = nd * (nd - 1.0) * (2.0 * nd + 5.0);
  double var = (v0 - vt - vu) / 18.0;
  var += vt1 * vu1 / (2.0 * nd * (nd - 1.0));
  var += vt2 * vu2 / (9.0 * nd * (nd - 1.0) * (nd - 2.0));
  double p = 1.0;
  if (var > 0.0) {
    const double z = cmd / std::sqrt(var);
    p = std::erfc(std::abs(z) * M_SQRT1_2);
  }
  return {tau, std::clamp(p, 0.0, 1.0)};
}

// ---- per-cell analysis ------------------------------------------------------

std::pair<std::vector<double>, std::vector<double>> subsample(
    const Dataset& d, const std::vector<std::array<double, kNumJoints>>& zs, int camera,
    int action, JointId joint) {
  if (zs.size() != d.frames.size()) {
    throw DataError("subsample: z table does not match the dataset frame count");
  }
  const int j = static_cast<int>(joint);
  std::vector<double> depths, z_vals;
  for (std::size_t i = 0; i < d.frames.size(); ++i) {
    const auto& f = d.frames[i];
    if (f.camera_id != camera || f.action_id != action) continue;
    if (!f.depths) throw DataError("subsample: frame record has no depth field");
    depths.push_back((*f.depths)[j]);
    z_vals.push_back(zs[i][j]);
  }
  if (depths.empty()) {
    throw DataError("subsample: no frames for camera " + std::to_string(camera) + ", action " +
                    std::to_string(action));
  }
  return {std::move(depths), std::move(z_vals)};
}

SignificanceSummary significance_summary(std::span<const CorrelationReport> reports) {
  if (reports.empty()) throw DataError("significance_summary requires at least one report");
  SignificanceSummary s;
  s.n_cells = static_cast<long>(reports.size());
  long sig001 = 0, sig01 = 0, sig05 = 0, negative = 0, moderate = 0;
  for (const auto& r : reports) {
    if (r.spearman.p_value < 0.001) ++sig001;
    if (r.spearman.p_value < 0.01) ++sig01;
    if (r.spearman.p_value < 0.05) ++sig05;
    if (r.spearman.coefficient < 0.0) ++negative;
    if (r.spearman.coefficient > kModerateCorrelation) ++moderate;
  }
  const double nd = static_cast<double>(s.n_cells);
  s.frac_significant_001 = static_cast<double>(sig001) / nd;
  s.frac_significant_01 = static_cast<double>(sig01) / nd;
  s.frac_significant_05 = static_cast<double>(sig05) / nd;
  s.frac_negative = static_cast<double>(negative) / nd;
  s.frac_moderate = static_cast<double>(moderate) / nd;
  return s;
}

TrendFit trend_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DataError("trend_fit: length mismatch");
  if (xs.size() < 3) throw DataError("trend_fit requires at least 3 points");
  const double nd = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= nd;
  my /= nd;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw NumericError("trend_fit: x values are constant");

  TrendFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.pearson_r = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
  return f;
}

}  // namespace depthlift
