#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "fairfuse/metrics.hpp"
#include "fairfuse/rng.hpp"

using namespace fairfuse;

namespace {

// O(n^2) dominance oracle, kept deliberately independent of pareto_filter.
std::vector<bool> pareto_brute_force(const std::vector<std::pair<double, double>>& pts) {
  std::vector<bool> dominated(pts.size(), false);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      const bool leq = pts[j].first <= pts[i].first && pts[j].second <= pts[i].second;
      const bool strict = pts[j].first < pts[i].first || pts[j].second < pts[i].second;
      if (leq && strict) {
        dominated[i] = true;
        break;
      }
    }
  }
  return dominated;
}

}  // namespace

TEST_CASE("rmse basics") {
  const std::vector<double> a{0.2, -0.4, 0.9};
  CHECK(rmse(a, a) == 0.0);
  CHECK(rmse(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, -1.0}) == Approx(1.0));
  CHECK(rmse(std::vector<double>{-0.8}, std::vector<double>{-0.7}) == Approx(0.1));
  CHECK_THROWS_AS(rmse(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
                  LengthMismatch);
  CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), LengthMismatch);
}

TEST_CASE("bias_mae basics") {
  const std::vector<double> same{0.1, 0.5, -0.3};
  CHECK(bias_mae(same, same) == 0.0);
  CHECK(bias_mae(std::vector<double>{0.6}, std::vector<double>{-0.9}) == Approx(1.5));
  CHECK(bias_mae(std::vector<double>{0.2, 0.4}, std::vector<double>{0.1, 0.1}) == Approx(0.2));
  CHECK_THROWS_AS(bias_mae(std::vector<double>{1.0}, std::vector<double>{}), LengthMismatch);
}

TEST_CASE("mean_difference is signed and group sizes may differ") {
  CHECK(mean_difference(std::vector<double>{0.3, 0.5}, std::vector<double>{0.4, 0.4}) ==
        Approx(0.0).margin(1e-15));
  CHECK(mean_difference(std::vector<double>{1.0, 1.0}, std::vector<double>{0.0}) == Approx(1.0));
  CHECK(mean_difference(std::vector<double>{0.2, 0.4}, std::vector<double>{0.5, 0.1}) ==
        Approx(0.0).margin(1e-15));
  CHECK_THROWS_AS(mean_difference(std::vector<double>{}, std::vector<double>{1.0}), EmptyGroup);

  // antisymmetry
  rng::SplitMix prng(11);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> a, b;
    for (std::size_t i = 0; i < 3 + prng.below(10); ++i) a.push_back(prng.unit() * 2 - 1);
    for (std::size_t i = 0; i < 3 + prng.below(10); ++i) b.push_back(prng.unit() * 2 - 1);
    CHECK(mean_difference(a, b) == Approx(-mean_difference(b, a)).margin(1e-15));
  }
}

TEST_CASE("paired t-test matches frozen reference") {
  // d = (0.1, 0.2, 0.3, 0.2); t and p frozen from scipy.stats.ttest_rel.
  const std::vector<double> male{0.1, 0.2, 0.3, 0.2};
  const std::vector<double> female{0.0, 0.0, 0.0, 0.0};
  const TTestResult r = paired_t_test(male, female);
  CHECK(r.t_statistic == Approx(4.898979485566357).epsilon(1e-12));
  CHECK(r.degrees_of_freedom == 3);
  CHECK(r.p_value == Approx(0.016276603459429).epsilon(1e-9));
  CHECK_FALSE(r.zero_variance);

  // d = (0.05, -0.02, 0.11, 0.3, -0.07)
  const std::vector<double> m2{0.05, -0.02, 0.11, 0.3, -0.07};
  const std::vector<double> f2(5, 0.0);
  const TTestResult r2 = paired_t_test(m2, f2);
  CHECK(r2.t_statistic == Approx(1.152038804753881).epsilon(1e-12));
  CHECK(r2.p_value == Approx(0.313473878129163).epsilon(1e-9));
}

TEST_CASE("paired t-test degenerate cases") {
  const std::vector<double> v{0.3, -0.2, 0.6};
  const TTestResult equal = paired_t_test(v, v);
  CHECK(equal.t_statistic == 0.0);
  CHECK(equal.p_value == 1.0);

  // constant non-zero difference: zero variance, certain difference
  // (values chosen so every difference is exactly 0.25 in binary)
  const std::vector<double> base{0.25, 0.0, 0.5};
  const std::vector<double> shifted{0.5, 0.25, 0.75};
  const TTestResult degen = paired_t_test(shifted, base);
  CHECK(degen.zero_variance);
  CHECK(degen.p_value == 0.0);
  CHECK(std::isinf(degen.t_statistic));

  CHECK_THROWS_AS(paired_t_test(std::vector<double>{1.0}, std::vector<double>{0.0}),
                  LengthMismatch);
}

TEST_CASE("paired t-test p-value is invariant under swapping groups") {
  rng::SplitMix prng(21);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> a, b;
    const std::size_t n = 2 + prng.below(40);
    for (std::size_t i = 0; i < n; ++i) {
      a.push_back(prng.unit() * 2 - 1);
      b.push_back(prng.unit() * 2 - 1);
    }
    const TTestResult ab = paired_t_test(a, b);
    const TTestResult ba = paired_t_test(b, a);
    CHECK(ab.p_value == Approx(ba.p_value).epsilon(1e-12));
    CHECK(ab.t_statistic == Approx(-ba.t_statistic).epsilon(1e-12));
  }
}

TEST_CASE("paired t-test detects a strong injected shift") {
  // Monte-Carlo-style sanity: d_i = 0.5 + 0.1 * z_i over 100 pairs.
  std::vector<double> male, female;
  for (std::size_t i = 0; i < 100; ++i) {
    const double z = rng::normal_from_key(rng::mix(777, i));
    male.push_back(0.5 + 0.1 * z);
    female.push_back(0.0);
  }
  CHECK(paired_t_test(male, female).p_value < 0.01);
}

TEST_CASE("pareto_filter on small hand cases") {
  using P = std::pair<double, double>;
  const std::vector<P> antichain{{1.0, 0.0}, {0.0, 1.0}};
  const auto f1 = pareto_filter(antichain);
  CHECK_FALSE(f1[0]);
  CHECK_FALSE(f1[1]);

  const std::vector<P> chain{{1.0, 1.0}, {0.5, 0.5}};
  const auto f2 = pareto_filter(chain);
  CHECK(f2[0]);
  CHECK_FALSE(f2[1]);

  // equal points do not dominate each other
  const std::vector<P> dup{{0.3, 0.3}, {0.3, 0.3}};
  const auto f3 = pareto_filter(dup);
  CHECK_FALSE(f3[0]);
  CHECK_FALSE(f3[1]);

  CHECK_THROWS_AS(pareto_filter(std::vector<P>{}), ValidationError);
}

TEST_CASE("pareto_filter agrees with the brute-force oracle") {
  rng::SplitMix prng(31);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 1 + prng.below(200);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < n; ++i) {
      // coarse grid so ties and duplicates actually occur
      pts.emplace_back(static_cast<double>(prng.below(20)) / 10.0,
                       static_cast<double>(prng.below(20)) / 10.0);
    }
    CHECK(pareto_filter(pts) == pareto_brute_force(pts));
  }
}

TEST_CASE("pareto_filter is order-independent") {
  rng::SplitMix prng(41);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < 50; ++i) pts.emplace_back(prng.unit(), prng.unit());
  const auto base = pareto_filter(pts);

  std::vector<std::size_t> perm(pts.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[prng.below(i + 1)]);
  std::vector<std::pair<double, double>> shuffled;
  for (std::size_t i : perm) shuffled.push_back(pts[i]);
  const auto reordered = pareto_filter(shuffled);
  for (std::size_t i = 0; i < perm.size(); ++i) CHECK(reordered[i] == base[perm[i]]);
}
