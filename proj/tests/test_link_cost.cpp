#include <doctest.h>

#include <cmath>
#include <random>

#include "mixeq/error.hpp"
#include "mixeq/link_cost.hpp"

using namespace mixeq;

TEST_CASE("travel time of a linear link") {
  const auto c = CostParams::polynomial(10, 1, 1);
  CHECK(travel_time(c, 0.3) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(travel_time(c, 0.0) == 1.0);
  CHECK(marginal_cost(c, 0.3) == doctest::Approx(7.0).epsilon(1e-15));
  CHECK(marginal_cost(c, 0.0) == 1.0);
}

TEST_CASE("bpr conversion") {
  const auto c = CostParams::bpr(1, 1, 0.15, 4);
  CHECK(c.k == doctest::Approx(0.15));
  CHECK(c.b == 1.0);
  CHECK(c.n == 4.0);
  CHECK(travel_time(c, 1.0) == doctest::Approx(1.15).epsilon(1e-15));
  CHECK(marginal_cost(c, 1.0) == doctest::Approx(1.75).epsilon(1e-15));

  // Direct BPR evaluation against the converted form.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double t0 = u(rng), m = u(rng), theta = u(rng) / 5, beta = 1 + u(rng), f = u(rng);
    const double direct = t0 * (1 + theta * std::pow(f / m, beta));
    CHECK(std::abs(travel_time(CostParams::bpr(t0, m, theta, beta), f) - direct) <=
          1e-12 * direct);
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(CostParams::polynomial(0, 1, 1), Error);
  CHECK_THROWS_AS(CostParams::polynomial(1, -1, 1), Error);
  CHECK_THROWS_AS(CostParams::polynomial(1, 1, 0.5), Error);
  CHECK_THROWS_AS(CostParams::polynomial(NAN, 1, 1), Error);
  CHECK_THROWS_AS(CostParams::bpr(1, 1, 0, 4), Error);
  CHECK_THROWS_AS(CostParams::bpr(1, 0, 0.15, 4), Error);
}

TEST_CASE("non-integer exponents are finite at zero flow") {
  const auto c = CostParams::polynomial(2, 3, 2.5);
  CHECK(travel_time(c, 0.0) == 3.0);
  CHECK(travel_time_slope(c, 0.0) == 0.0);
  CHECK(marginal_cost(c, 0.0) == 3.0);
  CHECK(travel_time(c, 1.0) == doctest::Approx(5.0));
  CHECK(flow_pow(-1e-18, 2.5) == 0.0);
}

TEST_CASE("property: marginal cost is the derivative of f t(f) and dominates t") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uk(0.1, 10), ub(0, 10), un(1, 4), uf(0.01, 1);
  for (int i = 0; i < 500; ++i) {
    const auto c = CostParams::polynomial(uk(rng), ub(rng), un(rng));
    const double f = uf(rng);
    const double h = 1e-5;
    const double fd =
        ((f + h) * travel_time(c, f + h) - (f - h) * travel_time(c, f - h)) / (2 * h);
    CHECK(std::abs(marginal_cost(c, f) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    CHECK(marginal_cost(c, f) - travel_time(c, f) > 0.0);
    const double slope_fd = (travel_time(c, f + h) - travel_time(c, f - h)) / (2 * h);
    CHECK(std::abs(travel_time_slope(c, f) - slope_fd) <= 1e-6 * std::max(1.0, slope_fd));
    const double mslope_fd = (marginal_cost(c, f + h) - marginal_cost(c, f - h)) / (2 * h);
    CHECK(std::abs(marginal_cost_slope(c, f) - mslope_fd) <= 1e-6 * std::max(1.0, mslope_fd));
  }
}

TEST_CASE("integral and inverse") {
  const auto c = CostParams::polynomial(1, 0, 1);
  CHECK(travel_time_integral(c, 0, 1) == doctest::Approx(0.5));
  CHECK(travel_time_integral(c, 1, 2) == doctest::Approx(1.5));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uk(0.1, 10), ub(0, 10), un(1, 4), uf(0.0, 2);
  for (int i = 0; i < 200; ++i) {
    const auto d = CostParams::polynomial(uk(rng), ub(rng), un(rng));
    const double f = uf(rng);
    CHECK(inverse_travel_time(d, travel_time(d, f)) == doctest::Approx(f).epsilon(1e-9));
  }
  CHECK(inverse_travel_time(CostParams::polynomial(1, 2, 1), 1.0) == 0.0);
}
