#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "depthlift/stats.hpp"
#include "helpers.hpp"

using namespace depthlift;

namespace {

std::vector<double> normal_sample(Rng& rng, std::size_t n, double mean = 0.0, double sd = 1.0) {
  std::vector<double> xs(n);
  for (auto& x : xs) x = rng.normal(mean, sd);
  return xs;
}

std::vector<double> bimodal_sample(Rng& rng, std::size_t n) {
  std::vector<double> xs(n);
  for (auto& x : xs) x = rng.bernoulli(0.5) ? rng.normal(-3.0, 1.0) : rng.normal(3.0, 1.0);
  return xs;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("special functions") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  for (double p : {1e-8, 0.001, 0.024, 0.3, 0.5, 0.9, 0.975, 1 - 1e-8}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), NumericError);
  CHECK_THROWS_AS(normal_quantile(1.0), NumericError);

  // I_x(a,b) endpoints and symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
  CHECK(regularized_incomplete_beta(0.0, 2.0, 3.0) == 0.0);
  CHECK(regularized_incomplete_beta(1.0, 2.0, 3.0) == 1.0);
  CHECK(regularized_incomplete_beta(0.3, 2.5, 1.5) ==
        doctest::Approx(1.0 - regularized_incomplete_beta(0.7, 1.5, 2.5)).epsilon(1e-12));

  // matches the closed form sf(t) = (1 - t/sqrt(2+t^2))/2 for dof = 2
  for (double t : {0.5, 1.0, 1.8856180831641267, 4.0}) {
    const double exact = 1.0 - t / std::sqrt(2.0 + t * t);
    CHECK(student_t_two_sided_p(t, 2.0) == doctest::Approx(exact).epsilon(1e-12));
    CHECK(student_t_two_sided_p(-t, 2.0) == student_t_two_sided_p(t, 2.0));
  }
}

TEST_CASE("summarize: moments and histogram") {
  const std::vector<double> sym = {-1.0, 0.0, 1.0};
  const auto s = summarize(sym);
  CHECK(s.skewness == doctest::Approx(0.0));
  CHECK(s.mean == doctest::Approx(0.0));
  CHECK(std::accumulate(s.bin_counts.begin(), s.bin_counts.end(), 0L) == 3);

  CHECK_THROWS_AS(summarize(std::vector<double>{1.0, 2.0}), DataError);
  CHECK_THROWS_AS(summarize(std::vector<double>{5.0, 5.0, 5.0}), NumericError);

  Rng rng(1);
  const auto big = normal_sample(rng, 1000000);
  const auto sb = summarize(big);
  CHECK(std::abs(sb.skewness) < 0.01);
  CHECK(std::abs(sb.excess_kurtosis) < 0.02);
  CHECK(std::accumulate(sb.bin_counts.begin(), sb.bin_counts.end(), 0L) ==
        static_cast<long>(big.size()));
  CHECK(sb.bin_edges.size() == sb.bin_counts.size() + 1);
}

TEST_CASE("spearman examples and contracts") {
  const std::vector<double> x = {1, 2, 3, 4};
  CHECK(spearman(x, x).coefficient == 1.0);
  CHECK(spearman(x, x).p_value == 0.0);

  const std::vector<double> rev = {4, 3, 2, 1};
  CHECK(spearman(x, rev).coefficient == -1.0);
  CHECK(spearman(x, rev).p_value == 0.0);

  // hand rank computation: sum d^2 = 2, rho = 1 - 12/(4*15) = 0.8, p = 0.2
  const std::vector<double> y = {1, 3, 2, 4};
  const auto r = spearman(x, y);
  CHECK(r.coefficient == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(0.2).epsilon(1e-12));

  CHECK_THROWS_AS(spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
                  NumericError);
  CHECK_THROWS_AS(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), DataError);
  CHECK_THROWS_AS(spearman(x, std::vector<double>{1, 2, 3}), DataError);
}

TEST_CASE("kendall examples and brute-force equivalence") {
  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<double> y = {1, 3, 2, 4};
  // 5 concordant, 1 discordant
  CHECK(kendall_tau(x, y).coefficient == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
  CHECK(kendall_tau(x, x).coefficient == 1.0);
  CHECK_THROWS_AS(kendall_tau(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}),
                  NumericError);

  Rng rng(404);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.uniform_int(3, 50);
    std::vector<double> a(n), b(n);
    // small alphabets force ties
    for (auto& v : a) v = rng.uniform_int(0, 9);
    for (auto& v : b) v = rng.uniform_int(0, 9);
    bool ok = true;
    double tau = 0.0, ref = 0.0;
    try {
      tau = kendall_tau(a, b).coefficient;
      ref = test::kendall_oracle(a, b);
    } catch (const NumericError&) {
      ok = false;  // all-tied input; both sides undefined
    }
    if (ok) CHECK(tau == ref);
  }
}

TEST_CASE("rank correlations are symmetric and monotone-invariant") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = rng.uniform_int(5, 60);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = rng.uniform_int(0, 20);
      y[i] = 0.3 * x[i] + rng.normal();
    }
    const auto sp = spearman(x, y);
    const auto kt = kendall_tau(x, y);
    CHECK(spearman(y, x).coefficient == doctest::Approx(sp.coefficient).epsilon(1e-12));
    CHECK(kendall_tau(y, x).coefficient == doctest::Approx(kt.coefficient).epsilon(1e-12));

    // strictly increasing transforms leave ranks unchanged
    std::vector<double> xt(n), yt(n);
    for (int i = 0; i < n; ++i) {
      xt[i] = x[i] * x[i] * x[i];
      yt[i] = std::atan(y[i]);
    }
    CHECK(spearman(xt, yt).coefficient == doctest::Approx(sp.coefficient).epsilon(1e-12));
    CHECK(kendall_tau(xt, yt).coefficient == doctest::Approx(kt.coefficient).epsilon(1e-12));
    CHECK(spearman(xt, yt).p_value == doctest::Approx(sp.p_value).epsilon(1e-9));
  }
}

TEST_CASE("shapiro-wilk statistic and contracts") {
  // three points sit exactly on the normal order statistics
  const auto r = shapiro_wilk(std::vector<double>{1.0, 2.0, 3.0});
  CHECK(r.statistic == doctest::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{1.0, 2.0}), DataError);
  CHECK_THROWS_AS(shapiro_wilk(std::vector<double>(5001, 0.0)), DataError);
  CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{2.0, 2.0, 2.0}), NumericError);

  Rng rng(5);
  const auto good = normal_sample(rng, 500);
  const auto rg = shapiro_wilk(good);
  CHECK(rg.statistic > 0.99);
  CHECK(rg.p_value > 0.01);
  CHECK(rg.statistic <= 1.0);

  const auto bad = bimodal_sample(rng, 5000);
  CHECK(shapiro_wilk(bad).p_value < 1e-4);

  bool capped = false;
  const auto rc = shapiro_wilk_capped(normal_sample(rng, 9000), 3, &capped);
  CHECK(capped);
  CHECK(rc.statistic > 0.99);
}

TEST_CASE("anderson-darling statistic and critical value") {
  Rng rng(6);
  const auto good = normal_sample(rng, 5000);
  const auto rg = anderson_darling(good);
  CHECK(rg.critical_value == 0.787);
  CHECK(rg.a2_star < 0.787);

  std::vector<double> uniform(5000);
  for (auto& v : uniform) v = rng.uniform();
  CHECK(anderson_darling(uniform).a2_star > 0.787);

  CHECK_THROWS_AS(anderson_darling(std::vector<double>(7, 1.5)), DataError);
  CHECK_THROWS_AS(anderson_darling(std::vector<double>(20, 1.5)), NumericError);
}

TEST_CASE("dagostino k2 statistic and contracts") {
  Rng rng(7);
  const auto good = normal_sample(rng, 5000);
  const auto rg = dagostino_k2(good);
  CHECK(rg.statistic >= 0.0);
  CHECK(rg.p_value > 0.01);

  // heavy-tailed t(3) sample: kurtosis drives rejection
  std::vector<double> heavy(5000);
  for (auto& v : heavy) {
    double chi2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double u = rng.normal();
      chi2 += u * u;
    }
    v = rng.normal() / std::sqrt(chi2 / 3.0);
  }
  CHECK(dagostino_k2(heavy).p_value < 1e-4);

  CHECK(dagostino_k2(bimodal_sample(rng, 5000)).p_value < 1e-4);
  CHECK_THROWS_AS(dagostino_k2(std::vector<double>(19, 0.0)), DataError);
}

TEST_CASE("null behavior at n = 5000, the largest supported shapiro-wilk size") {
  Rng rng(31415);
  int sw_reject = 0, ad_pass = 0;
  const int trials = 1000;
  std::vector<double> xs(5000);
  for (int t = 0; t < trials; ++t) {
    for (auto& v : xs) v = rng.normal();
    if (shapiro_wilk(xs).p_value < 0.05) ++sw_reject;
    if (anderson_darling(xs).a2_star < kAndersonCritical05) ++ad_pass;
  }
  CHECK(sw_reject >= 30);
  CHECK(sw_reject <= 70);
  CHECK(ad_pass >= 930);  // A2* stays below the critical value >= 93% of the time
}

TEST_CASE("normality battery type-I quick calibration") {
  // 300 seeded trials at n = 200; the acceptance suite runs the full-size
  // calibration from the contract (1000 trials, n = 500).
  Rng rng(2718);
  int rej_sw = 0, rej_ad = 0, rej_k2 = 0;
  const int trials = 300;
  for (int t = 0; t < trials; ++t) {
    const auto xs = normal_sample(rng, 200);
    if (shapiro_wilk(xs).p_value < 0.05) ++rej_sw;
    if (anderson_darling(xs).a2_star > kAndersonCritical05) ++rej_ad;
    if (dagostino_k2(xs).p_value < 0.05) ++rej_k2;
  }
  for (int rej : {rej_sw, rej_ad, rej_k2}) {
    CHECK(rej >= static_cast<int>(0.02 * trials));
    CHECK(rej <= static_cast<int>(0.09 * trials));
  }
}

TEST_CASE("normality battery fills only what the sample size supports") {
  Rng rng(9);
  const auto full = normal_sample(rng, 100);
  const NormalityReport all = normality_battery(full, 1);
  CHECK(all.shapiro.has_value());
  CHECK(all.anderson.has_value());
  CHECK(all.dagostino.has_value());

  const auto tiny = normal_sample(rng, 5);
  const NormalityReport partial = normality_battery(tiny, 1);
  CHECK(partial.shapiro.has_value());
  CHECK(!partial.anderson.has_value());   // needs n >= 8
  CHECK(!partial.dagostino.has_value());  // needs n >= 20

  const NormalityReport none = normality_battery(std::vector<double>(30, 4.25), 1);
  CHECK(!none.shapiro.has_value());  // zero variance
  CHECK(!none.anderson.has_value());
  CHECK(!none.dagostino.has_value());
}

TEST_CASE("subsample partitions (camera, action) cells") {
  auto [d, rig] = test::observed_dataset(2, 3, 11, 0.8, 2);
  std::vector<std::array<double, kNumJoints>> zs(d.frames.size());
  for (std::size_t i = 0; i < d.frames.size(); ++i) {
    const auto& cam = rig_camera(rig, d.frames[i].camera_id);
    const Pose3D pc = world_to_camera_pose(d.frames[i].pose_world, cam.extrinsics);
    for (int j = 0; j < kNumJoints; ++j) zs[i][j] = pc.joints[j].z();
  }

  long per_camera_frames = 0;
  for (const auto& f : d.frames) {
    if (f.camera_id == 1) ++per_camera_frames;
  }

  long covered = 0;
  for (int action = 1; action <= kNumActions; ++action) {
    for (int j = 0; j < kNumJoints; ++j) {
      const auto [depths, z] = subsample(d, zs, 1, action, static_cast<JointId>(j));
      CHECK(depths.size() == z.size());
      CHECK(depths.size() == 2 * 3);  // subjects x frames for this camera/action
      covered += static_cast<long>(depths.size());
    }
  }
  CHECK(covered == per_camera_frames * kNumJoints);

  CHECK_THROWS_AS(subsample(d, zs, 3, 1, JointId::Root), DataError);  // no such camera
  zs.pop_back();
  CHECK_THROWS_AS(subsample(d, zs, 1, 1, JointId::Root), DataError);
}

TEST_CASE("significance summary fractions") {
  std::vector<CorrelationReport> reports;
  for (int i = 0; i < 10; ++i) {
    CorrelationReport r;
    r.spearman.coefficient = i < 2 ? -0.4 : 0.5;
    r.spearman.p_value = 0.0;
    r.n = 100;
    reports.push_back(r);
  }
  auto s = significance_summary(reports);
  CHECK(s.frac_significant_001 == 1.0);
  CHECK(s.frac_significant_01 == 1.0);
  CHECK(s.frac_significant_05 == 1.0);
  CHECK(s.frac_negative == doctest::Approx(0.2));

  Rng rng(3);
  reports.clear();
  for (int i = 0; i < 200; ++i) {
    CorrelationReport r;
    r.spearman.coefficient = rng.uniform(-1, 1);
    r.spearman.p_value = rng.uniform();
    reports.push_back(r);
  }
  s = significance_summary(reports);
  CHECK(s.frac_significant_001 <= s.frac_significant_01);
  CHECK(s.frac_significant_01 <= s.frac_significant_05);
  CHECK_THROWS_AS(significance_summary(std::vector<CorrelationReport>{}), DataError);
}

TEST_CASE("trend fit") {
  SUBCASE("exact line") {
    const std::vector<double> x = {0, 1, 2, 3};
    std::vector<double> y(4);
    for (int i = 0; i < 4; ++i) y[i] = -3.0 * x[i] + 10.0;
    const auto f = trend_fit(x, y);
    CHECK(f.slope == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(f.pearson_r == doctest::Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("closed-form three points") {
    const std::vector<double> x = {0, 1, 2};
    const std::vector<double> y = {2, 1, 0};
    const auto f = trend_fit(x, y);
    CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("swapping axes flips to the reciprocal slope's sign") {
    const std::vector<double> x = {0, 1, 2, 4};
    const std::vector<double> y = {9, 6, 5, 1};
    const auto f = trend_fit(x, y);
    const auto g = trend_fit(y, x);
    CHECK(f.slope < 0.0);
    CHECK(g.slope < 0.0);
    CHECK(f.slope * g.slope > 0.0);
  }
  SUBCASE("degenerate x") {
    CHECK_THROWS_AS(trend_fit(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
                    NumericError);
    CHECK_THROWS_AS(trend_fit(std::vector<double>{1, 2}, std::vector<double>{1, 2}), DataError);
  }
}

}  // TEST_SUITE
