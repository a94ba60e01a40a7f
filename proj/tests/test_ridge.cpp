#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "filament/ridge.hpp"
#include "filament/rng.hpp"
#include "filament/synth.hpp"
#include "test_support.hpp"

using namespace filament;

namespace {

ScalarField ridge_line_field() {
  // -(x2 - 0.5)^2 + 3: ridge on the horizontal midline, lambda = -2.
  return test::project_field(test::uniform_spec(4, 6), [](double, double x2) {
    return -(x2 - 0.5) * (x2 - 0.5) + 3.0;
  });
}

}  // namespace

TEST_CASE("scms_step hand case") {
  // f = -x2^2: V = (0,1), grad = (0, -2 x2); one step from (0.5, 0.3) with
  // a = 0.02 lands at (0.5, 0.288).
  ScalarField field =
      test::project_field(test::uniform_spec(4, 6), [](double, double x2) { return -x2 * x2; });
  bool clamped = true;
  Eigen::Vector2d next = scms_step(field, {0.5, 0.3}, 0.02, &clamped);
  CHECK_FALSE(clamped);
  CHECK(next[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(next[1] == doctest::Approx(0.288).epsilon(1e-8));
}

TEST_CASE("scms_step fixes gradient zeros") {
  ScalarField bump = test::project_field(test::uniform_spec(4, 6), [](double x1, double x2) {
    return -((x1 - 0.5) * (x1 - 0.5) + 2.0 * (x2 - 0.5) * (x2 - 0.5));
  });
  Eigen::Vector2d center(0.5, 0.5);
  Eigen::Vector2d next = scms_step(bump, center, 0.05);
  CHECK((next - center).norm() < 1e-9);
}

TEST_CASE("projected step is eigenvector-sign invariant") {
  Rng rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::Vector2d v = Eigen::Vector2d(rng.normal(), rng.normal()).normalized();
    Eigen::Vector2d g(rng.normal(), rng.normal());
    Eigen::Vector2d plus = v.dot(g) * v;
    Eigen::Vector2d minus = (-v).dot(g) * (-v);
    CHECK(plus == minus);  // bitwise: double negation is exact
  }
}

TEST_CASE("scms on a quadratic ridge line") {
  ScalarField field = ridge_line_field();
  ScmsConfig cfg;
  cfg.step_a = 0.02;
  cfg.tol_eps = 1e-6;
  cfg.threshold_tau = 2.0;
  cfg.max_iter = 5000;
  cfg.seeds = {{0.2, 0.3}, {0.5, 0.7}, {0.8, 0.45}, {0.3, 0.62}, {0.6, 0.5}};
  Filament fil = scms(field, cfg);

  const double contraction = 1.0 - 2.0 * cfg.step_a;
  for (std::size_t i = 0; i < fil.size(); ++i) {
    REQUIRE(fil.status[i] == PointStatus::converged);
    CHECK(std::abs(fil.points[i][1] - 0.5) < cfg.tol_eps / cfg.step_a);  // 5e-5 band
    CHECK(fil.lambda[i] == doctest::Approx(-2.0).epsilon(1e-6));
    CHECK(fil.points[i][0] == doctest::Approx(cfg.seeds[i][0]).epsilon(1e-9));
    double d0 = std::abs(cfg.seeds[i][1] - 0.5);
    if (d0 > 1e-3) {
      CHECK(fil.clause[i] == StopClause::step_size);
      // First iteration whose unclamped step 2 a d0 c^(it-1) drops below eps.
      double predicted =
          1.0 + std::log(cfg.tol_eps / (2.0 * cfg.step_a * d0)) / std::log(contraction);
      CHECK(std::abs(fil.iterations[i] - predicted) <= 2.0);
    }
  }

  SUBCASE("converged points satisfy the projected-gradient bound") {
    // The step clause admits |V.grad| up to eps/a at the pre-step iterate,
    // decayed once by (1 - 2a) at the recorded point.
    double bound = cfg.tol_eps / cfg.step_a * (1.0 - 2.0 * cfg.step_a) + 1e-12;
    for (std::size_t i = 0; i < fil.size(); ++i) {
      double vg = std::abs(eigen_frame(field, fil.points[i]).v.dot(grad(field, fil.points[i])));
      CHECK(vg < bound);
    }
  }

  SUBCASE("monotone ascent for small steps") {
    Eigen::Vector2d x(0.4, 0.9);
    double f_prev = field.value(x);
    for (int it = 0; it < 200; ++it) {
      x = scms_step(field, x, 0.02);
      double f_now = field.value(x);
      CHECK(f_now >= f_prev - 1e-12);
      f_prev = f_now;
    }
  }
}

TEST_CASE("scms discards low seeds by tau") {
  ScalarField field = ridge_line_field();  // max value 3
  ScmsConfig cfg;
  cfg.threshold_tau = 10.0;
  cfg.seeds = ScmsConfig::grid_seeds(4);
  Filament fil = scms(field, cfg);
  for (std::size_t i = 0; i < fil.size(); ++i) {
    CHECK(fil.status[i] == PointStatus::discarded_tau);
  }
  CHECK(fil.converged_points().empty());
}

TEST_CASE("scms marks wall-pinned runs diverged") {
  // f = 3 x1^2 + x2^2 pushes iterates up in x2 toward the boundary.
  ScalarField field = test::project_field(
      test::uniform_spec(4, 6), [](double x1, double x2) { return 3.0 * x1 * x1 + x2 * x2; });
  ScmsConfig cfg;
  cfg.step_a = 0.02;
  cfg.threshold_tau = 0.0;
  cfg.seeds = {{0.5, 0.9}};
  Filament fil = scms(field, cfg);
  CHECK(fil.status[0] == PointStatus::diverged);
  CHECK(fil.points[0][1] == doctest::Approx(1.0));
}

TEST_CASE("scms seed grid covers the square") {
  auto seeds = ScmsConfig::grid_seeds(50);
  CHECK(seeds.size() == 2500);
  CHECK(seeds.front() == Eigen::Vector2d(0.01, 0.01));
  CHECK(seeds.back() == Eigen::Vector2d(0.99, 0.99));
  for (const auto& s : seeds) {
    CHECK(s[0] > 0.0);
    CHECK(s[0] < 1.0);
  }
  CHECK_THROWS_AS(ScmsConfig::grid_seeds(1), std::invalid_argument);
}

TEST_CASE("integral curve on a vertical field") {
  ScalarField field =
      test::project_field(test::uniform_spec(4, 6), [](double, double x2) { return -x2 * x2; });

  SUBCASE("hit at the ridge with |t| = 0.3") {
    auto hit = nearest_hit(field, {0.5, 0.3}, 1.0, 1e-3);
    REQUIRE(hit.has_value());
    CHECK(std::abs(hit->t) == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(hit->point[0] == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(std::abs(hit->point[1]) < 1e-6);
  }

  SUBCASE("states stay vertical and inside the square") {
    IntegralCurve curve = trace_integral_curve(field, {0.5, 0.3}, 1.0, 1e-3, -1);
    REQUIRE(curve.hit.has_value());
    CHECK(curve.hit->t == doctest::Approx(0.3).epsilon(1e-6));
    for (const auto& s : curve.states) {
      CHECK(s[0] == doctest::Approx(0.5).epsilon(1e-12));
      CHECK(s[1] >= 0.0);
      CHECK(s[1] <= 1.0);
    }
    CHECK(hitting_time(curve).has_value());
  }
}

TEST_CASE("integral curve on an anisotropic quadratic") {
  // f = -x1^2 - 2 x2^2: eigenvalues (-2, -4), V = e2; ridge is the x1 axis.
  ScalarField field = test::project_field(test::uniform_spec(4, 6), [](double x1, double x2) {
    return -x1 * x1 - 2.0 * x2 * x2;
  });
  auto hit = nearest_hit(field, {0.3, 0.2}, 1.0, 1e-3);
  REQUIRE(hit.has_value());
  CHECK(std::abs(hit->t) == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(hit->point[0] == doctest::Approx(0.3).epsilon(1e-8));
  CHECK(std::abs(hit->point[1]) < 1e-6);
}

TEST_CASE("curve starting on the filament hits at t = 0") {
  AnalyticField field([](double, double x2) { return -(x2 - 0.4) * (x2 - 0.4) + 3.0; });
  IntegralCurve curve = trace_integral_curve(field, {0.5, 0.4}, 0.5, 1e-3);
  REQUIRE(curve.hit.has_value());
  CHECK(curve.hit->t == 0.0);
  CHECK(curve.hit->point == Eigen::Vector2d(0.5, 0.4));
}

TEST_CASE("nearest hit takes the smaller |t| and skips positive-lambda crossings") {
  // Two parallel ridges at x2 = 0.4 and 0.9 with a valley at 0.65; the x1
  // bowl keeps V = e2 along the path.
  ScalarField field = test::project_field(
      test::uniform_spec(5, 5),
      [](double x1, double x2) {
        double a = x2 - 0.4, b = x2 - 0.9;
        return -a * a * b * b + 0.2 * (x1 - 0.5) * (x1 - 0.5);
      },
      30);
  auto hit = nearest_hit(field, {0.5, 0.5}, 1.0, 1e-3);
  REQUIRE(hit.has_value());
  CHECK(std::abs(hit->t) == doctest::Approx(0.1).epsilon(1e-5));
  CHECK(hit->point[1] == doctest::Approx(0.4).epsilon(1e-6));

  // the two single-direction traces find 0.1 and 0.4, skipping the valley
  IntegralCurve up = trace_integral_curve(field, {0.5, 0.5}, 1.0, 1e-3, +1);
  IntegralCurve down = trace_integral_curve(field, {0.5, 0.5}, 1.0, 1e-3, -1);
  REQUIRE(up.hit.has_value());
  REQUIRE(down.hit.has_value());
  double t_far = std::max(up.hit->t, down.hit->t);
  double x2_far = up.hit->t > down.hit->t ? up.hit->point[1] : down.hit->point[1];
  CHECK(t_far == doctest::Approx(0.4).epsilon(1e-5));
  CHECK(x2_far == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("hit points satisfy the ridge conditions") {
  Rng rng(17);
  BasisSpec spec = test::uniform_spec(5, 7);
  ScalarField base = test::project_field(spec, [](double x1, double x2) {
    double r2 = (x1 - 0.45) * (x1 - 0.45) + (x2 - 0.55) * (x2 - 0.55);
    return 3.0 * std::exp(-6.0 * r2);
  });
  int found = 0;
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::Vector2d x0(0.15 + 0.7 * rng.uniform(), 0.15 + 0.7 * rng.uniform());
    auto hit = nearest_hit(base, x0, 0.6, 1e-3);
    if (!hit) continue;
    ++found;
    CHECK(std::abs(ridge_residual(base, hit->point)) < 1e-8);
    CHECK(eigen_frame(base, hit->point).lambda_min < 0.0);
  }
  CHECK(found > 5);
}

TEST_CASE("rk4 step-halving convergence order") {
  // Single-span polynomial surface: the mixed second derivative varies along
  // the trace, so the eigenvector rotates and the curve genuinely bends.
  ScalarField field = test::project_field(
      test::uniform_spec(5, 5),
      [](double x1, double x2) {
        return -2.0 * (x2 - 0.5) * (x2 - 0.5) + (x1 - 0.5) * (x2 - 0.8) * (x2 - 0.8) -
               0.2 * (x1 - 0.5) * (x1 - 0.5);
      },
      30);
  const double t_max = 0.12;
  Eigen::Vector2d x0(0.4, 0.8);
  auto endpoint = [&](double dt) {
    IntegralCurve c = trace_integral_curve(field, x0, t_max, dt);
    REQUIRE(c.times.back() == doctest::Approx(t_max).epsilon(1e-12));
    return c.states.back();
  };
  Eigen::Vector2d a = endpoint(0.004);
  Eigen::Vector2d b = endpoint(0.002);
  Eigen::Vector2d c = endpoint(0.001);
  double order = std::log2((a - b).norm() / (b - c).norm());
  CHECK(order >= 3.5);

  SUBCASE("tracing is sign-aligned: consecutive displacements never reverse") {
    IntegralCurve curve = trace_integral_curve(field, x0, t_max, 0.002);
    for (std::size_t i = 2; i < curve.states.size(); ++i) {
      Eigen::Vector2d d1 = curve.states[i - 1] - curve.states[i - 2];
      Eigen::Vector2d d2 = curve.states[i] - curve.states[i - 1];
      CHECK(d1.dot(d2) >= 0.0);
    }
  }
}

TEST_CASE("config validation") {
  ScmsConfig cfg;
  cfg.seeds = {{0.5, 0.5}};
  CHECK_NOTHROW(cfg.validate());
  ScmsConfig bad = cfg;
  bad.step_a = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.seeds.clear();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.max_iter = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
