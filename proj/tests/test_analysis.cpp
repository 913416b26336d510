#include <doctest.h>

#include <random>

#include "mixeq/analysis.hpp"
#include "mixeq/error.hpp"
#include "mixeq/experiments.hpp"
#include "support/instances.hpp"

using namespace mixeq;

namespace {

Network two_parallel(double b2, double n = 1) {
  return Network({"S", "T"},
                 {{"1", "S", "T", CostParams::polynomial(1, 0, n)},
                  {"2", "S", "T", CostParams::polynomial(1, b2, n)}},
                 "S", "T");
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

IncidenceMatrix incidence(const Network& net) { return incidence_matrix(net, enumerate_paths(net)); }

SolverConfig tight(double alpha) {
  SolverConfig cfg;
  cfg.alpha = alpha;
  cfg.outer_tol = 1e-13;
  return cfg;
}

IncidenceMatrix braess_declared(const Network& net) {
  return incidence_matrix(net, declare_paths(net, braess_declared_paths()));
}

}  // namespace

TEST_CASE("improvement check") {
  CHECK(check_improvement(vec({1, 0}), vec({0.8, 0})));
  CHECK(check_improvement(vec({0.5, 0.5}), vec({0.5, 0.5 + 5e-11})));
  CHECK_FALSE(check_improvement(vec({1, 0}), vec({0.7, 0.1})));
}

TEST_CASE("baseline reconstruction on parallel links") {
  const Network net = two_parallel(1.5);
  const auto d = incidence(net);
  const auto mixed = solve_mixed(net, d, tight(0.2));
  const Vector x = construct_baseline_from_mixed(net, d, mixed);
  CHECK(x.isApprox(vec({1, 0}), 1e-9));
  CHECK(check_improvement(x, mixed.flow.x_h));

  const auto human_only = solve_mixed(net, d, tight(0.0));
  CHECK((construct_baseline_from_mixed(net, d, human_only) - human_only.flow.x_h)
            .lpNorm<Eigen::Infinity>() <= 1e-12);

  const Network sym = two_parallel(0);
  const auto ds = incidence(sym);
  const auto all_auto = solve_mixed(sym, ds, tight(1.0));
  CHECK(construct_baseline_from_mixed(sym, ds, all_auto).isApprox(vec({0.5, 0.5}), 1e-9));
}

TEST_CASE("baseline reconstruction needs a path multigraph") {
  const Network braess = braess_network();
  const auto d = braess_declared(braess);
  const auto mixed = solve_mixed(braess, d, tight(0.3));
  try {
    construct_baseline_from_mixed(braess, d, mixed);
    FAIL("expected NotPathMultigraph");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_path_multigraph);
  }
}

TEST_CASE("property: reconstruction matches the oracle baseline") {
  std::mt19937_64 rng(83);
  testing::CostRange range;
  for (int i = 0; i < 40; ++i) {
    const auto inst = i % 2 ? testing::random_series(rng, 2, 8, range)
                            : testing::random_parallel(rng, 2 + i % 5, range);
    const auto base = exact_baseline(inst.network, inst.delta);
    for (double alpha : {0.05, 0.4, 0.9}) {
      const auto mixed = solve_mixed(inst.network, inst.delta, tight(alpha));
      const Vector x = construct_baseline_from_mixed(inst.network, inst.delta, mixed);
      CHECK(x.minCoeff() >= -1e-12);
      CHECK(x.sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(check_improvement(x, mixed.flow.x_h));
      const Vector f = inst.delta.delta * x;
      const Vector f0 = inst.delta.delta * base.x_agg;
      CHECK((f - f0).lpNorm<Eigen::Infinity>() <= 1e-6);
      // Improvement: humans never do worse than in the baseline.
      CHECK(mixed.social <= base.social + 1e-9);
    }
  }
}

TEST_CASE("deterioration report on two parallel links") {
  const Network net = two_parallel(1.5);
  const auto d = incidence(net);
  const auto r = deterioration_report(net, d, exact_baseline(net, d));
  CHECK(r.hypotheses.all());
  CHECK(r.v == std::vector<std::size_t>{0});
  CHECK(r.q == std::optional<std::size_t>{1});
  CHECK(*r.gamma == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(*r.condition_value == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(*r.alpha_validity_hint == doctest::Approx(0.125).epsilon(1e-9));
  CHECK(r.verdict == DeteriorationVerdict::predicts_improvement_direction);

  const Network cubic = two_parallel(1.5, 3);
  CHECK_THROWS_AS(deterioration_report(cubic, incidence(cubic),
                                       exact_baseline(net, d)),
                  Error);
}

TEST_CASE("deterioration report on the Braess variant") {
  const Network net = braess_network(kDeteriorationK6, kDeteriorationB6);
  const auto d = braess_declared(net);
  const auto base = exact_baseline(net, d);
  const auto r = deterioration_report(net, d, base);
  REQUIRE(r.hypotheses.all());
  CHECK(r.verdict == DeteriorationVerdict::deteriorates_for_small_alpha);
  REQUIRE(r.condition_value);
  CHECK(*r.condition_value > 0);

  // Slope of S at 0+ from the exact oracle (central difference on the
  // quadratic branch).
  const double h = 1e-4;
  const double s1 = exact_mixed(net, d, h).social;
  const double s2 = exact_mixed(net, d, 2 * h).social;
  const double slope = (4 * s1 - s2 - 3 * base.social) / (2 * h);
  CHECK(slope == doctest::Approx(*r.condition_value).epsilon(1e-5));

  // Inside the hint the oracle flow is the perturbed one.
  const double a = 0.5 * *r.alpha_validity_hint;
  const auto e = exact_mixed(net, d, a);
  CHECK(e.x_a(static_cast<Eigen::Index>(*r.q)) == doctest::Approx(a).epsilon(1e-9));
}

TEST_CASE("deterioration report when the baseline uses every path") {
  const Network sym = two_parallel(0);
  const auto d = incidence(sym);
  const auto r = deterioration_report(sym, d, exact_baseline(sym, d));
  CHECK_FALSE(r.hypotheses.q_off_support);
  CHECK(r.verdict == DeteriorationVerdict::hypotheses_not_met);
}

TEST_CASE("no-effect condition") {
  CHECK(check_no_effect(two_parallel(0), incidence(two_parallel(0))).holds);
  CHECK(*check_no_effect(two_parallel(0), incidence(two_parallel(0))).b0 == 0.0);
  CHECK_FALSE(check_no_effect(two_parallel(1.5), incidence(two_parallel(1.5))).holds);

  // Series bundles with equal b inside each bundle.
  const Network series({"O", "M", "D"},
                       {{"a", "O", "M", CostParams::polynomial(1, 2, 1)},
                        {"b", "O", "M", CostParams::polynomial(3, 2, 1)},
                        {"c", "M", "D", CostParams::polynomial(2, 0.5, 1)},
                        {"d", "M", "D", CostParams::polynomial(5, 0.5, 1)}},
                       "O", "D");
  const auto r = check_no_effect(series, incidence(series));
  CHECK(r.holds);
  CHECK(*r.b0 == doctest::Approx(2.5));
}

TEST_CASE("property: equal free-flow costs leave the equilibrium unchanged") {
  std::mt19937_64 rng(97);
  testing::CostRange range;
  for (int i = 0; i < 40; ++i) {
    const auto inst = testing::random_equal_free_flow(rng, 2, 8, range, i % 2 == 0);
    REQUIRE(check_no_effect(inst.network, inst.delta).holds);
    const auto base = exact_baseline(inst.network, inst.delta);
    const Vector f0 = inst.delta.delta * base.x_agg;
    for (double alpha : {0.2, 0.6, 1.0}) {
      const auto e = exact_mixed(inst.network, inst.delta, alpha);
      CHECK((inst.delta.delta * e.x_agg - f0).lpNorm<Eigen::Infinity>() <= 1e-9);
      CHECK(e.social == doctest::Approx(base.social).epsilon(1e-10));
    }
  }
}

TEST_CASE("centralized comparison") {
  const Network braess = braess_network();
  const auto d = braess_declared(braess);
  for (double alpha : {0.0, 0.35, 1.0}) {
    const auto c = compare_centralized(braess, d, alpha, tight(alpha));
    CHECK(c.converged);
    CHECK(c.deviation <= 1e-6);
    CHECK(c.social_centralized == doctest::Approx(c.social_decentralized).epsilon(1e-6));
  }
}

TEST_CASE("property: centralized matches decentralized on random instances") {
  std::mt19937_64 rng(101);
  testing::CostRange range;
  range.exponents = {1.0, 2.0, 4.0};
  range.shared_exponent = false;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const auto inst = testing::random_instance(rng, 2, 6, range);
    const double alpha = unit(rng);
    const auto c = compare_centralized(inst.network, inst.delta, alpha, tight(alpha));
    CHECK(c.converged);
    CHECK(c.deviation <= 1e-6 * std::max(1.0, c.social_decentralized));
  }
}

TEST_CASE("analyze runs what applies") {
  const Network net = two_parallel(1.5);
  const auto v = analyze(net, incidence(net), 0.2, tight(0.2));
  REQUIRE(v.improvement);
  CHECK(v.improvement->holds);
  CHECK(v.improvement->social_mixed == doctest::Approx(0.96875).epsilon(1e-9));
  CHECK(v.improvement->social_baseline == doctest::Approx(1.0).epsilon(1e-9));
  REQUIRE(v.deterioration);
  CHECK(v.deterioration->verdict == DeteriorationVerdict::predicts_improvement_direction);
  CHECK(v.centralized);

  const Network braess = braess_network();
  const auto b = analyze(braess, braess_declared(braess), 0.2, tight(0.2));
  CHECK_FALSE(b.improvement);
  CHECK_FALSE(b.skipped.empty());

  const Network cubic = two_parallel(1.5, 3);
  const auto c = analyze(cubic, incidence(cubic), 0.2, tight(0.2));
  CHECK(c.improvement);
  CHECK_FALSE(c.deterioration);
}
