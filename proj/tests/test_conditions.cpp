#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "mtsa/conditions.hpp"
#include "mtsa/envs.hpp"
#include "mtsa/errors.hpp"
#include "mtsa/gtd.hpp"
#include "oracles.hpp"

using namespace mtsa;

namespace {

AffineCascade scalar_cascade(std::initializer_list<std::initializer_list<double>> m, Vector c) {
  const std::size_t n = c.size();
  AffineCascade cas(std::vector<std::size_t>(n, 1));
  std::size_t i = 0;
  for (const auto& row : m) {
    std::size_t j = 0;
    for (double v : row) cas.set_block(i, j++, Matrix{{v}});
    cas.set_offset(i, {c[i]});
    ++i;
  }
  return cas;
}

// h1 = -x + y, h2 = x - 2y + 1
AffineCascade two_level() { return scalar_cascade({{-1, 1}, {1, -2}}, {0, 1}); }

}  // namespace

TEST_CASE("scaled drift of a single affine level") {
  const AffineCascade cas = scalar_cascade({{-1}}, {5});
  const AffineMap h1 = scaled_drift(cas, 0, 1.0);
  CHECK(h1.linear(0, 0) == -1.0);
  CHECK(h1.offset[0] == 5.0);
  const AffineMap h100 = scaled_drift(cas, 0, 100.0);
  CHECK(h100.linear(0, 0) == -1.0);
  CHECK(h100.offset[0] == doctest::Approx(0.05));
  CHECK(scaled_drift_limit(cas, 0).offset[0] == 0.0);
  CHECK_THROWS(scaled_drift(cas, 0, 0.5));
}

TEST_CASE("gap between h_c and h_inf over the unit ball is |c_i| / c") {
  const AffineCascade cas = oracle::random_reduced_cascade({2, 3, 2}, 99);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  for (std::size_t level = 0; level < 3; ++level) {
    const LevelVerdict v = check_level(cas, level);
    const AffineMap lim = scaled_drift_limit(cas, level);
    for (double c : {1.0, 10.0, 1e3}) {
      const AffineMap hc = scaled_drift(cas, level, c);
      double sup = 0.0;
      for (int k = 0; k < 200; ++k) {
        Vector x(lim.linear.cols());
        for (auto& e : x) e = nd(gen);
        const double r = norm2(x);
        for (auto& e : x) e /= std::max(r, 1.0);
        sup = std::max(sup, norm2(sub(hc.apply(x), lim.apply(x))));
      }
      CHECK(sup == doctest::Approx(norm2(cas.offset(level)) / c).epsilon(1e-12));
      CHECK(v.scaled_gap_coefficient / c == doctest::Approx(sup).epsilon(1e-12));
    }
  }
}

TEST_CASE("check_level examples") {
  const AffineCascade one = scalar_cascade({{-1}}, {3});
  const LevelVerdict v = check_level(one, 0);
  CHECK(v.pass());
  CHECK_FALSE(v.lambda.has_value());
  CHECK(cascade_fixed_point(one).fixed_point[0][0] == doctest::Approx(3.0));

  const AffineCascade two = two_level();
  const LevelVerdict v1 = check_level(two, 0);
  REQUIRE(v1.lambda.has_value());
  CHECK(v1.lambda->linear(0, 0) == doctest::Approx(1.0));
  CHECK(v1.lambda->offset[0] == doctest::Approx(0.0));
  const LevelVerdict v2 = check_level(two, 1);
  CHECK(v2.reduced_matrix(0, 0) == doctest::Approx(-1.0));
  const CascadeReport rep = cascade_fixed_point(two);
  CHECK(rep.fixed_point[0][0] == doctest::Approx(1.0));
  CHECK(rep.fixed_point[1][0] == doctest::Approx(1.0));
  CHECK(rep.residual <= 1e-12);
}

TEST_CASE("check_level errors") {
  const AffineCascade bad = scalar_cascade({{1, 0}, {0, -1}}, {0, 0});
  CHECK_THROWS_AS(check_level(bad, 0), NotHurwitz);
  CHECK_THROWS_AS(check_level(bad, 1), ReductionError);
  CHECK_THROWS_AS(scaled_drift(bad, 1, 2.0), ReductionError);
  CHECK_THROWS_AS(cascade_fixed_point(bad), NotHurwitz);
  try {
    cascade_fixed_point(bad);
  } catch (const NotHurwitz& e) {
    CHECK(e.level() == 0);
    CHECK(e.diagnosis().max_sym_eig == doctest::Approx(1.0));
  }
  const CascadeReport rep = analyze_cascade(bad);
  CHECK_FALSE(rep.passed);
  CHECK(rep.failing_level == std::optional<std::size_t>(0));
}

TEST_CASE("decoupled diagonal cascade") {
  const AffineCascade cas = scalar_cascade({{-1, 0, 0}, {0, -1, 0}, {0, 0, -1}}, {2, -3, 7});
  const CascadeReport rep = cascade_fixed_point(cas);
  CHECK(rep.fixed_point[0][0] == doctest::Approx(2.0));
  CHECK(rep.fixed_point[1][0] == doctest::Approx(-3.0));
  CHECK(rep.fixed_point[2][0] == doctest::Approx(7.0));
}

TEST_CASE("random passing cascades match the stacked solve and have zero residual") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const std::vector<std::size_t> dims{1 + seed % 3, 2, 1 + (seed / 3) % 3};
    const AffineCascade cas = oracle::random_reduced_cascade(dims, seed);
    const CascadeReport rep = cascade_fixed_point(cas);
    REQUIRE(rep.passed);
    const Vector direct = oracle::stacked_fixed_point(cas);
    Vector mine;
    for (const auto& b : rep.fixed_point) mine.insert(mine.end(), b.begin(), b.end());
    CHECK(norm_inf(sub(mine, direct)) <= 1e-10);
    CHECK(rep.residual <= 1e-9);
    for (const auto& lv : rep.levels) {
      CHECK(lv.diagnosis.max_sym_eig <= -0.1);
      if (lv.lambda) {
        // lambda_inf is the linear part of lambda
        REQUIRE(lv.lambda_inf.has_value());
        double diff = 0.0;
        for (std::size_t k = 0; k < lv.lambda->linear.entries().size(); ++k)
          diff = std::max(diff, std::abs(lv.lambda->linear.entries()[k] - lv.lambda_inf->linear.entries()[k]));
        CHECK(diff <= 1e-12);
        CHECK(lv.lambda_inf_vanishes);
        CHECK(norm_inf(lv.lambda_inf->offset) == 0.0);
      }
    }
  }
}

TEST_CASE("the checker never reorders timescales") {
  // h1 = -x + 3y, h2 = -x + y: passes with x fast; with y fast its level
  // matrix is +1. The stacked matrix itself has eigenvalues +-i sqrt(2).
  const AffineCascade fast_x = scalar_cascade({{-1, 3}, {-1, 1}}, {0, 0});
  const AffineCascade fast_y = scalar_cascade({{1, -1}, {3, -1}}, {0, 0});
  CHECK(analyze_cascade(fast_x).passed);
  CHECK_FALSE(analyze_cascade(fast_y).passed);
  CHECK_FALSE(is_hurwitz(fast_x.stacked_matrix()));
}

TEST_CASE("gtd2-m3 cascade on rw5") {
  const Mrp m = make_rw5();
  const GtdModel g = gtd_model(m);
  const AffineCascade cas = algorithm_cascade(Algo::gtd2_m3, g, m.gamma(), 0.1);
  const CascadeReport rep = cascade_fixed_point(cas);
  REQUIRE(rep.passed);
  CHECK(norm_inf(rep.fixed_point[0]) <= 1e-12);
  CHECK(norm_inf(rep.fixed_point[1]) <= 1e-12);
  CHECK(norm_inf(sub(rep.fixed_point[2], g.theta_star)) <= 1e-10);
  CHECK(rep.residual <= 1e-9);
  // The fast-level equilibrium is -A^T u / w.
  const LevelVerdict& v1 = rep.levels[0];
  REQUIRE(v1.lambda.has_value());
  const Matrix expect = (-1.0 / 0.1) * g.abar.transpose();
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(v1.lambda->linear(r, c) == doctest::Approx(expect(r, c)));
  // The u level's equilibrium is C^-1 (A theta + b).
  const LevelVerdict& v2 = rep.levels[1];
  REQUIRE(v2.lambda.has_value());
  const Matrix cinv = inverse(g.cbar);
  const Matrix lin = cinv * g.abar;
  const Vector off = cinv * g.bbar;
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) CHECK(v2.lambda->linear(r, c) == doctest::Approx(lin(r, c)));
    CHECK(v2.lambda->offset[r] == doctest::Approx(off[r]));
  }
}

TEST_CASE("cascade json round trip and errors") {
  const AffineCascade cas = oracle::random_reduced_cascade({2, 1}, 4);
  const AffineCascade back = AffineCascade::from_json(cas.to_json());
  CHECK(back.stacked_matrix() == cas.stacked_matrix());
  CHECK(back.stacked_offset() == cas.stacked_offset());

  const auto doc = nlohmann::json::parse(R"({"dims":[1,1],"blocks":{"1,1":[[-1]],"2,2":[[-2]]}})");
  const AffineCascade sparse = AffineCascade::from_json(doc);
  CHECK(sparse.block(0, 1)(0, 0) == 0.0);
  CHECK(sparse.offset(1)[0] == 0.0);

  CHECK_THROWS_AS(AffineCascade::from_json(nlohmann::json::parse(R"({"blocks":{}})")), ConfigError);
  CHECK_THROWS_AS(AffineCascade::from_json(nlohmann::json::parse(R"({"dims":[1],"blocks":{"0,1":[[1]]}})")),
                  ConfigError);
  CHECK_THROWS_AS(AffineCascade::from_json(nlohmann::json::parse(R"({"dims":[2],"blocks":{"1,1":[[1]]}})")),
                  ConfigError);
  CHECK_THROWS_AS(AffineCascade::from_json(nlohmann::json::parse(R"({"dims":[1],"offsets":[[1],[2]]})")),
                  ConfigError);
}

TEST_CASE("report serialization") {
  const CascadeReport rep = cascade_fixed_point(two_level());
  const auto j = rep.to_json();
  CHECK(j["passed"] == true);
  CHECK(j["levels"].size() == 2);
  CHECK(j["levels"][0]["lambda"]["matrix"][0][0].get<double>() == doctest::Approx(1.0));
  CHECK(rep.to_text().find("all levels pass") != std::string::npos);
}

TEST_CASE("lipschitz bound is the row-block norm") {
  const AffineCascade cas = two_level();
  CHECK(cas.lipschitz_bound(0) == doctest::Approx(2.0));
  CHECK(cas.lipschitz_bound(1) == doctest::Approx(3.0));
}

TEST_CASE("noisy simulation of a short cascade lands near its fixed point") {
  const AffineCascade cas = oracle::random_reduced_cascade({1, 2}, 8);
  const CascadeReport rep = cascade_fixed_point(cas);
  const SaSystem sys = cascade_system(cas, {StepSize::of(Schedule{1.0, 0.6}), StepSize::of(Schedule{1.0, 0.8})}, 0.1);
  const SaState end = run(sys, SaState::zeros(sys, 3), 200000);
  for (std::size_t i = 0; i < 2; ++i) CHECK(norm_inf(sub(end.x[i], rep.fixed_point[i])) <= 2e-2);
}
