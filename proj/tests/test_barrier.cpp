#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "bfrl/barrier.hpp"

using namespace bfrl;

namespace {

BarrierSpec unit_spec(BarrierKind kind, double delta_a = 1.0, double delta_b = 1.0,
                      double gain = 1.0) {
  BarrierSpec spec;
  spec.kind = kind;
  spec.bounds = {BoundSpec{0, -1.0, 1.0}};
  spec.params = {delta_a, delta_b};
  spec.barrier_gain = gain;
  return spec;
}

// Independent central-difference gradient of eval_h along one coordinate.
double fd_grad(const BarrierSpec& spec, std::vector<double> state,
               std::size_t index, double step = 1e-5) {
  state[index] += step;
  const double hi = eval_h(spec, state);
  state[index] -= 2.0 * step;
  const double lo = eval_h(spec, state);
  return (hi - lo) / (2.0 * step);
}

}  // namespace

TEST_CASE("eval_h quadratic values") {
  const BarrierSpec spec = unit_spec(BarrierKind::Quadratic);
  CHECK(eval_h(spec, std::vector{0.0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval_h(spec, std::vector{1.0}) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(eval_h(spec, std::vector{-1.0}) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("eval_h exponential values") {
  const BarrierSpec spec = unit_spec(BarrierKind::Exponential);
  // 1 - 2 e^-1 and -e^-2, frozen from a high-precision evaluation.
  CHECK(eval_h(spec, std::vector{0.0}) ==
        doctest::Approx(0.26424111765711535681).epsilon(1e-14));
  CHECK(eval_h(spec, std::vector{1.0}) ==
        doctest::Approx(-0.13533528323661269189).epsilon(1e-14));
}

TEST_CASE("grad_h examples") {
  const BarrierSpec quad = unit_spec(BarrierKind::Quadratic);
  CHECK(grad_h(quad, std::vector{0.0})[0] == 0.0);
  CHECK(grad_h(quad, std::vector{0.6})[0] == doctest::Approx(-1.2).epsilon(1e-14));
  const BarrierSpec exp = unit_spec(BarrierKind::Exponential);
  CHECK(grad_h(exp, std::vector{0.0})[0] == 0.0);
}

TEST_CASE("grad_h is dense with zeros at unconstrained indices") {
  BarrierSpec spec = unit_spec(BarrierKind::Quadratic);
  spec.bounds = {BoundSpec{1, -2.0, 2.0}};
  const std::vector<double> g = grad_h(spec, std::vector{0.3, 0.4, 0.5});
  REQUIRE(g.size() == 3);
  CHECK(g[0] == 0.0);
  CHECK(g[2] == 0.0);
  CHECK(g[1] != 0.0);
}

TEST_CASE("hdot examples") {
  const BarrierSpec spec = unit_spec(BarrierKind::Quadratic);
  CHECK(hdot_analytic(spec, std::vector{0.37}, std::vector{0.0}) == 0.0);
  CHECK(hdot_analytic(spec, std::vector{0.6}, std::vector{1.0}) ==
        doctest::Approx(-1.2).epsilon(1e-14));

  // Two bounds: contributions add.
  BarrierSpec multi = spec;
  multi.bounds = {BoundSpec{0, -1.0, 1.0}, BoundSpec{2, -0.5, 0.5}};
  const std::vector<double> s{0.2, 9.0, 0.1};
  const std::vector<double> ds{0.3, -2.0, 0.4};
  BarrierSpec only0 = spec;
  BarrierSpec only2 = spec;
  only2.bounds = {BoundSpec{2, -0.5, 0.5}};
  CHECK(hdot_analytic(multi, s, ds) ==
        doctest::Approx(hdot_analytic(only0, s, ds) + hdot_analytic(only2, s, ds))
            .epsilon(1e-15));
}

TEST_CASE("hdot_finite_difference examples") {
  const BarrierSpec spec = unit_spec(BarrierKind::Quadratic);
  CHECK(hdot_finite_difference(spec, std::vector{0.4}, std::vector{0.4}, 0.1) == 0.0);
  // grad(0.6) = -1.2, rate = (0.6 - 0.5)/0.1 = 1.0
  CHECK(hdot_finite_difference(spec, std::vector{0.5}, std::vector{0.6}, 0.1) ==
        doctest::Approx(-1.2).epsilon(1e-12));
}

TEST_CASE("hdot_finite_difference converges to analytic on s(t) = sin t") {
  const BarrierSpec spec = unit_spec(BarrierKind::Exponential, 1.0, 2.0);
  const double t = 0.4;
  double dt = 0.05;
  double prev_err = -1.0;
  for (int k = 0; k < 4; ++k) {
    const std::vector<double> curr{std::sin(t)};
    const std::vector<double> prev{std::sin(t - dt)};
    const std::vector<double> rate{std::cos(t)};
    const double fd = hdot_finite_difference(spec, prev, curr, dt);
    const double exact = hdot_analytic(spec, curr, rate);
    const double err = std::abs(fd - exact);
    if (prev_err >= 0.0) {
      CHECK(prev_err / err >= 1.8);  // first-order in dt
    }
    prev_err = err;
    dt /= 2.0;
  }
}

TEST_CASE("reward_bf examples") {
  const BarrierSpec spec = unit_spec(BarrierKind::Quadratic);
  CHECK(reward_bf(spec, std::vector{0.0}, std::vector{0.0}, 0.1) ==
        doctest::Approx(1.0).epsilon(1e-15));
  // hdot = -1.2, h(0.6) = 0.64 -> -0.56
  CHECK(reward_bf(spec, std::vector{0.5}, std::vector{0.6}, 0.1) ==
        doctest::Approx(-0.56).epsilon(1e-12));
  const BarrierSpec exp = unit_spec(BarrierKind::Exponential);
  CHECK(reward_bf(exp, std::vector{1.0}, std::vector{1.0}, 0.1) ==
        doctest::Approx(-0.13533528323661269189).epsilon(1e-14));
}

TEST_CASE("shape_reward examples") {
  CHECK(shape_reward(1.0, 0.0) == 1.0);
  CHECK(shape_reward(1.0, -0.56) == doctest::Approx(0.44).epsilon(1e-15));
  CHECK(shape_reward(0.0, 1.0) == 1.0);
}

TEST_CASE("cartpole closed form examples") {
  CHECK(cartpole_quad_reward_closed_form(0.0, 0.0, 0.2094, 1.0) ==
        doctest::Approx(1.04384836).epsilon(1e-14));
  CHECK(cartpole_quad_reward_closed_form(0.2094, 0.0, 0.2094, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("closed form equals generic pipeline with analytic hdot") {
  const double phi = 0.2094;
  const double delta_a = 0.7;
  BarrierSpec spec = unit_spec(BarrierKind::Quadratic, delta_a);
  spec.bounds = {BoundSpec{0, -phi, phi}};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(-0.5, 0.5);
  std::uniform_real_distribution<double> rate(-3.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double theta = angle(rng);
    const double omega = rate(rng);
    const std::vector<double> s{theta, omega, 0.0, 0.0};
    const std::vector<double> ds{omega, 0.0, 0.0, 0.0};
    const double generic =
        shape_reward(1.0, hdot_analytic(spec, s, ds) + spec.barrier_gain * eval_h(spec, s));
    const double closed = cartpole_quad_reward_closed_form(theta, omega, phi, delta_a);
    CHECK(generic == doctest::Approx(closed).epsilon(1e-12));
  }
}

TEST_CASE("quadratic sign property") {
  const BarrierSpec spec = unit_spec(BarrierKind::Quadratic, 0.8);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int i = 0; i < 10000; ++i) {
    const double s = dist(rng);
    const double h = eval_h(spec, std::vector{s});
    if (s > -1.0 && s < 1.0) {
      CHECK(h > 0.0);
    } else if (s == -1.0 || s == 1.0) {
      CHECK(h == 0.0);
    } else {
      CHECK(h < 0.0);
    }
  }
  // Dense grid across the boundary region.
  for (int i = -300; i <= 300; ++i) {
    const double s = i / 100.0;
    const double h = eval_h(spec, std::vector{s});
    if (std::abs(s) < 1.0) CHECK(h > 0.0);
    if (std::abs(s) > 1.0) CHECK(h < 0.0);
  }
  CHECK(eval_h(spec, std::vector{1.0}) == 0.0);
  CHECK(eval_h(spec, std::vector{-1.0}) == 0.0);
}

TEST_CASE("exponential boundary value and interior zero crossings") {
  const double da = 0.9, db = 4.0, lo = -1.0, hi = 1.0;
  BarrierSpec spec = unit_spec(BarrierKind::Exponential, da, db);
  spec.bounds = {BoundSpec{0, lo, hi}};
  // At a nominal bound: h = -da * e^{-db (hi - lo)} < 0.
  const double expected = -da * std::exp(-db * (hi - lo));
  CHECK(eval_h(spec, std::vector{hi}) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(eval_h(spec, std::vector{lo}) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(eval_h(spec, std::vector{hi}) < 0.0);

  // Positive at the midpoint, negative at the bounds, concave in between:
  // exactly one crossing on each side, strictly inside the interval.
  const auto h_at = [&](double s) { return eval_h(spec, std::vector{s}); };
  REQUIRE(h_at(0.0) > 0.0);
  const auto bisect = [&](double a, double b) {
    for (int i = 0; i < 100; ++i) {
      const double m = 0.5 * (a + b);
      if ((h_at(a) < 0.0) == (h_at(m) < 0.0)) {
        a = m;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  };
  const double z_left = bisect(lo, 0.0);
  const double z_right = bisect(0.0, hi);
  CHECK(z_left > lo);
  CHECK(z_left < 0.0);
  CHECK(z_right > 0.0);
  CHECK(z_right < hi);
}

TEST_CASE("concavity and argmax at the midpoint") {
  for (const BarrierKind kind : {BarrierKind::Quadratic, BarrierKind::Exponential}) {
    BarrierSpec spec = unit_spec(kind, 1.3, 3.0);
    spec.bounds = {BoundSpec{0, -0.4, 1.0}};
    const double mid = (spec.bounds[0].s_min + spec.bounds[0].s_max) / 2.0;
    const double h_mid = eval_h(spec, std::vector{mid});
    const double step = 1e-3;
    for (int i = -200; i <= 200; ++i) {
      const double s = mid + i / 100.0;
      const double h0 = eval_h(spec, std::vector{s});
      const double hp = eval_h(spec, std::vector{s + step});
      const double hm = eval_h(spec, std::vector{s - step});
      CHECK(hp + hm - 2.0 * h0 <= 1e-12);  // second difference <= 0
      if (i != 0) CHECK(h0 < h_mid);
    }
    CHECK(grad_h(spec, std::vector{mid})[0] == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("grad_h matches central finite differences") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (const BarrierKind kind : {BarrierKind::Quadratic, BarrierKind::Exponential}) {
    BarrierSpec spec = unit_spec(kind, 1.7, 2.5);
    spec.bounds = {BoundSpec{0, -1.0, 1.0}, BoundSpec{2, -1.5, 0.5}};
    for (int i = 0; i < 1000; ++i) {
      const std::vector<double> s{dist(rng), dist(rng), dist(rng)};
      const std::vector<double> g = grad_h(spec, s);
      for (const std::size_t idx : {std::size_t{0}, std::size_t{2}}) {
        const double fd = fd_grad(spec, s, idx);
        const double scale = std::max(1.0, std::abs(fd));
        CHECK(std::abs(g[idx] - fd) / scale <= 1e-6);
      }
    }
  }
}

TEST_CASE("reward_bf with analytic hdot is affine in state_dot with slope grad_h") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dist(-1.5, 1.5);
  for (const BarrierKind kind : {BarrierKind::Quadratic, BarrierKind::Exponential}) {
    BarrierSpec spec = unit_spec(kind, 0.6, 3.0, 1.4);
    for (int i = 0; i < 1000; ++i) {
      const std::vector<double> s{dist(rng)};
      const std::vector<double> d1{dist(rng)};
      const std::vector<double> d2{d1[0] + 1.0};
      const auto r_bf = [&](const std::vector<double>& ds) {
        return hdot_analytic(spec, s, ds) + spec.barrier_gain * eval_h(spec, s);
      };
      const double slope = (r_bf(d2) - r_bf(d1)) / (d2[0] - d1[0]);
      CHECK(slope == doctest::Approx(grad_h(spec, s)[0]).epsilon(1e-12));
    }
  }
}

TEST_CASE("reward_bf is exactly the finite-difference hdot plus gain times h") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  const BarrierSpec spec = unit_spec(BarrierKind::Quadratic, 1.1, 1.0, 0.7);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> prev{dist(rng)};
    const std::vector<double> curr{dist(rng)};
    const double expected = hdot_finite_difference(spec, prev, curr, 0.02) +
                            spec.barrier_gain * eval_h(spec, curr);
    CHECK(reward_bf(spec, prev, curr, 0.02) == expected);
  }
}

TEST_CASE("additivity over multiple bounds") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (const BarrierKind kind : {BarrierKind::Quadratic, BarrierKind::Exponential}) {
    BarrierSpec multi = unit_spec(kind, 0.9, 2.0);
    multi.bounds = {BoundSpec{0, -1.0, 1.0}, BoundSpec{1, -0.3, 0.9},
                    BoundSpec{2, -2.0, 0.0}};
    std::vector<BarrierSpec> singles;
    for (const BoundSpec& b : multi.bounds) {
      BarrierSpec s = multi;
      s.bounds = {b};
      singles.push_back(s);
    }
    for (int i = 0; i < 200; ++i) {
      const std::vector<double> s{dist(rng), dist(rng), dist(rng)};
      double h_sum = 0.0;
      for (const BarrierSpec& single : singles) h_sum += eval_h(single, s);
      CHECK(eval_h(multi, s) == doctest::Approx(h_sum).epsilon(1e-14));
      const std::vector<double> g = grad_h(multi, s);
      for (std::size_t idx = 0; idx < 3; ++idx) {
        CHECK(g[idx] == grad_h(singles[idx], s)[idx]);
      }
    }
  }
}

TEST_CASE("far out-of-bounds states stay finite") {
  const BarrierSpec spec = unit_spec(BarrierKind::Exponential, 1.0, 50.0);
  CHECK(std::isfinite(eval_h(spec, std::vector{1e6})));
  CHECK(std::isfinite(grad_h(spec, std::vector{-1e6})[0]));
}

TEST_CASE("error paths") {
  BarrierSpec spec = unit_spec(BarrierKind::Quadratic);
  CHECK_THROWS_AS(eval_h(spec, std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(eval_h(spec, std::vector{std::nan("")}), std::domain_error);
  CHECK_THROWS_AS(
      hdot_analytic(spec, std::vector{0.0}, std::vector{0.0, 1.0}),
      std::domain_error);
  CHECK_THROWS_AS(
      hdot_finite_difference(spec, std::vector{0.0}, std::vector{0.0}, 0.0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      hdot_finite_difference(spec, std::vector{0.0}, std::vector{0.0}, -1.0),
      std::invalid_argument);
  CHECK_THROWS_AS(shape_reward(std::nan(""), 0.0), std::domain_error);

  BarrierSpec bad = spec;
  bad.params.delta_a = 0.0;
  CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);
  bad = spec;
  bad.bounds.clear();
  CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);
  bad = spec;
  bad.bounds = {BoundSpec{0, 1.0, 1.0}};
  CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);
  bad = spec;
  bad.bounds = {BoundSpec{0, -1.0, 1.0}, BoundSpec{0, -2.0, 2.0}};
  CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);
  bad = spec;
  bad.barrier_gain = -1.0;
  CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);

  CHECK(default_delta_b(-1.0, 1.0) == doctest::Approx(5.0));
  CHECK_THROWS_AS(default_delta_b(1.0, 1.0), std::invalid_argument);
}
