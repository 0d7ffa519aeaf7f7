#include <doctest.h>

#include <cmath>

#include "aml/simulator.hpp"

namespace {

Eigen::RowVectorXd row(std::initializer_list<double> xs) {
  Eigen::RowVectorXd r(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index j = 0;
  for (double v : xs) r[j++] = v;
  return r;
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("setup signals at hand-computed points") {
  SUBCASE("setup 1 at the origin") {
    const auto s = aml::setup_signal(1, row({0.0, 0.0, 0.0}), 3, 2);
    CHECK(s.e == 0.5);
    CHECK(s.v == 0.125);
    CHECK(s.tau == -0.2);
    CHECK(s.mu == 0.0);
  }

  SUBCASE("setup 1 saturates its overlap clip") {
    const auto s = aml::setup_signal(1, row({10.0, 10.0}), 2, 2);
    CHECK(s.e == 0.95);
    CHECK(s.v == doctest::Approx(0.95 * 0.05 / 2.0).epsilon(1e-15));
    const auto lo = aml::setup_signal(1, row({-10.0, -10.0}), 2, 2);
    CHECK(lo.e == 0.05);
  }

  SUBCASE("setup 2 at all-ones") {
    const auto s = aml::setup_signal(2, row({1.0, 1.0}), 2, 2);
    CHECK(s.mu == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(s.e == doctest::Approx(0.1 + std::sqrt(2.0)).epsilon(1e-15));
    CHECK(s.v == doctest::Approx(s.e * s.e).epsilon(1e-15));
    CHECK(s.tau == 1.0);
  }

  SUBCASE("setup 2 with a sign flip and a dormant effect") {
    const auto s = aml::setup_signal(2, row({-1.0, 1.0, 0.5}), 3, 2);
    CHECK(s.mu == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-15));
    CHECK(s.e == doctest::Approx(-0.1 - std::sqrt(2.0)).epsilon(1e-15));
    CHECK(s.tau == 0.0);
  }

  SUBCASE("setup 3 at all-ones") {
    const auto s = aml::setup_signal(3, row({1.0, 1.0, 1.0, 1.0}), 4, 2);
    CHECK(s.tau == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.e == doctest::Approx(0.45).epsilon(1e-12));
    CHECK(s.v == s.e);
    CHECK(s.mu == doctest::Approx(4.0 + 0.9).epsilon(1e-12));
  }

  SUBCASE("setup 4 at the origin") {
    const auto s = aml::setup_signal(4, row({0.0, 0.0}), 2, 1);
    CHECK(s.mu == 0.0);
    CHECK(s.tau == 0.0);
    CHECK(s.e == doctest::Approx(std::exp(0.5 + 1.0 / 18.0)).epsilon(1e-15));
    CHECK(s.v == doctest::Approx((std::exp(1.0 / 9.0) - 1.0) *
                                 std::exp(1.0 + 1.0 / 9.0)).epsilon(1e-15));
  }

  SUBCASE("inputs are validated") {
    CHECK_THROWS_AS(aml::setup_signal(5, row({0.0}), 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(aml::setup_signal(1, row({0.0}), 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(aml::setup_signal(1, row({0.0, 0.0}), 2, 3), std::invalid_argument);
    CHECK_THROWS_AS(aml::setup_signal(2, row({0.0}), 1, 1), std::invalid_argument);
  }
}

TEST_CASE("oracle_moments mirrors the signal functions") {
  const auto s = aml::setup_signal(3, row({0.3, -1.2}), 2, 2);
  const auto [e, v] = aml::oracle_moments(3, row({0.3, -1.2}), 2, 2);
  CHECK(e == s.e);
  CHECK(v == s.v);
}

TEST_CASE("population estimands have their closed forms") {
  CHECK(aml::true_psi(1, 6, 3) == -0.2);
  CHECK(aml::true_psi(2, 6, 2) == 1.0 / (2.0 * std::sqrt(M_PI)));
  CHECK(aml::true_psi(3, 6, 3) == std::exp(-M_PI * M_PI / 18.0));
  CHECK(aml::true_psi(4, 6, 3) == 0.0);
  CHECK_THROWS_AS(aml::true_psi(0, 6, 3), std::invalid_argument);
  CHECK_THROWS_AS(aml::true_psi(1, 2, 3), std::invalid_argument);
}

TEST_CASE("draw_dataset is a pure function of (config, rep)") {
  aml::SetupConfig cfg;
  cfg.setup_id = 1;
  cfg.n = 40;
  cfg.d = 3;
  cfg.k = 2;
  cfg.seed = 9;

  const auto [a, ora_a] = aml::draw_dataset(cfg, 5);
  const auto [b, ora_b] = aml::draw_dataset(cfg, 5);
  CHECK(a.X == b.X);
  CHECK(a.W == b.W);
  CHECK(a.Y == b.Y);
  CHECK(ora_a.mu == ora_b.mu);

  const auto [c, ora_c] = aml::draw_dataset(cfg, 6);
  CHECK(a.X != c.X);
  cfg.seed = 10;
  const auto [d2, ora_d] = aml::draw_dataset(cfg, 5);
  CHECK(a.X != d2.X);
}

TEST_CASE("annotations restate the signal functions row by row") {
  aml::SetupConfig cfg;
  cfg.setup_id = 4;
  cfg.n = 50;
  cfg.d = 3;
  cfg.k = 2;
  const auto [ds, ora] = aml::draw_dataset(cfg, 0);
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    const auto s = aml::setup_signal(4, ds.X.row(i), 3, 2);
    CHECK(ora.e[i] == s.e);
    CHECK(ora.v[i] == s.v);
    CHECK(ora.mu[i] == s.mu);
    CHECK(ora.tau[i] == s.tau);
    CHECK(ora.tau[i] ==
          doctest::Approx(std::sin(2.0 * M_PI * ds.X(i, 0))).epsilon(1e-14));
  }
}

TEST_CASE("treatment draws respect their family supports and means") {
  aml::SetupConfig cfg;
  cfg.n = 20000;
  cfg.d = 2;
  cfg.k = 1;
  cfg.seed = 4;

  SUBCASE("setup 1: Beta draws live in (0, 1)") {
    cfg.setup_id = 1;
    const auto [ds, ora] = aml::draw_dataset(cfg, 0);
    CHECK(ds.W.minCoeff() > 0.0);
    // The ratio x / (x + y) rounds to exactly 1.0 when y is negligible.
    CHECK(ds.W.maxCoeff() <= 1.0);
    CHECK(std::abs(ds.W.mean() - ora.e.mean()) <= 0.01);
  }

  SUBCASE("setup 2: Gaussian intensity centered on lambda") {
    cfg.setup_id = 2;
    cfg.d = 2;
    cfg.k = 2;
    const auto [ds, ora] = aml::draw_dataset(cfg, 0);
    CHECK(std::abs(ds.W.mean() - ora.e.mean()) <= 0.05);
  }

  SUBCASE("setup 3: Poisson counts") {
    cfg.setup_id = 3;
    const auto [ds, ora] = aml::draw_dataset(cfg, 0);
    for (Eigen::Index i = 0; i < 200; ++i) {
      CHECK(ds.W[i] >= 0.0);
      CHECK(ds.W[i] == std::floor(ds.W[i]));
    }
    CHECK(std::abs(ds.W.mean() - ora.e.mean()) <= 0.05);
  }

  SUBCASE("setup 4: log-normal draws are positive") {
    cfg.setup_id = 4;
    const auto [ds, ora] = aml::draw_dataset(cfg, 0);
    CHECK(ds.W.minCoeff() > 0.0);
    CHECK(std::abs(ds.W.mean() - ora.e.mean()) <= 0.05);
  }
}

TEST_CASE("outcome noise is standard normal around the signal") {
  aml::SetupConfig cfg;
  cfg.setup_id = 3;
  cfg.n = 20000;
  cfg.d = 2;
  cfg.k = 1;
  const auto [ds, ora] = aml::draw_dataset(cfg, 1);
  const Eigen::VectorXd eps = ds.Y - ora.mu - ds.W.cwiseProduct(ora.tau);
  CHECK(std::abs(eps.mean()) <= 0.03);
  const double var = (eps.array() - eps.mean()).square().mean();
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("method names round-trip") {
  using aml::Method;
  for (Method m : {Method::Mlin, Method::Aml, Method::AmlPlus, Method::DrPlugin,
                   Method::DrOracle, Method::PluginRiesz}) {
    const auto back = aml::parse_method(aml::method_name(m));
    REQUIRE(back.has_value());
    CHECK(*back == m);
  }
  CHECK(!aml::parse_method("bogus").has_value());
  CHECK(!aml::parse_method("AML").has_value());
}

TEST_CASE("run_replications aggregates per method in request order") {
  aml::SetupConfig cfg;
  cfg.setup_id = 1;
  cfg.n = 60;
  cfg.d = 2;
  cfg.k = 1;
  cfg.seed = 12;
  aml::SimOptions opt;
  opt.folds = 5;

  const std::vector<aml::Method> methods{aml::Method::DrPlugin, aml::Method::Mlin};
  const auto rows = aml::run_replications(cfg, methods, 3, 1, opt);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method == "dr");
  CHECK(rows[1].method == "mlin");
  for (const auto& r : rows) {
    CHECK(r.setup == 1);
    CHECK(r.n == 60);
    CHECK(r.reps == 3);
    CHECK(r.failures == 0);
    CHECK(r.rmse >= std::abs(r.bias) - 1e-12);
  }
  CHECK(rows[0].coverage == doctest::Approx(rows[0].coverage));  // not NaN
  CHECK(std::isnan(rows[1].coverage));
  CHECK(std::isnan(rows[1].mean_se));
}

TEST_CASE("a single replication's rmse is its absolute bias") {
  aml::SetupConfig cfg;
  cfg.setup_id = 1;
  cfg.n = 60;
  cfg.d = 2;
  cfg.k = 1;
  aml::SimOptions opt;
  opt.folds = 5;
  const auto rows =
      aml::run_replications(cfg, {aml::Method::DrPlugin}, 1, 1, opt);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].rmse == doctest::Approx(std::abs(rows[0].bias)).epsilon(1e-12));
  CHECK((rows[0].coverage == 0.0 || rows[0].coverage == 1.0));
}

TEST_CASE("summaries are identical for any thread count") {
  aml::SetupConfig cfg;
  cfg.setup_id = 1;
  cfg.n = 60;
  cfg.d = 2;
  cfg.k = 1;
  cfg.seed = 3;
  aml::SimOptions opt;
  opt.folds = 5;
  const std::vector<aml::Method> methods{aml::Method::Aml, aml::Method::DrPlugin};

  const auto serial = aml::run_replications(cfg, methods, 6, 1, opt);
  const auto threaded = aml::run_replications(cfg, methods, 6, 3, opt);
  REQUIRE(serial.size() == threaded.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].rmse == threaded[i].rmse);
    CHECK(serial[i].bias == threaded[i].bias);
    CHECK(serial[i].coverage == threaded[i].coverage);
    CHECK(serial[i].mean_se == threaded[i].mean_se);
    CHECK(serial[i].failures == threaded[i].failures);
  }
}

TEST_CASE("failed replications are counted, not silently dropped") {
  aml::SetupConfig cfg;
  cfg.setup_id = 1;
  cfg.n = 60;
  cfg.d = 2;
  cfg.k = 1;
  aml::SimOptions opt;
  opt.folds = 200;  // more folds than rows: every replication fails
  const auto rows = aml::run_replications(cfg, {aml::Method::DrPlugin}, 2, 1, opt);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].failures == 2);
  CHECK(std::isnan(rows[0].rmse));
  CHECK(std::isnan(rows[0].bias));
}

TEST_CASE("run_replications validates its configuration") {
  aml::SetupConfig cfg;
  cfg.setup_id = 1;
  cfg.n = 60;
  cfg.d = 2;
  cfg.k = 1;
  const std::vector<aml::Method> methods{aml::Method::DrPlugin};
  aml::SimOptions opt;

  CHECK_THROWS_AS(aml::run_replications(cfg, methods, 0, 1, opt),
                  std::invalid_argument);
  CHECK_THROWS_AS(aml::run_replications(cfg, {}, 1, 1, opt), std::invalid_argument);

  opt.folds = 1;
  CHECK_THROWS_AS(aml::run_replications(cfg, methods, 1, 1, opt),
                  std::invalid_argument);
  opt.folds = 10;
  opt.alpha = 0.0;
  CHECK_THROWS_AS(aml::run_replications(cfg, methods, 1, 1, opt),
                  std::invalid_argument);
  opt.alpha = 0.05;

  cfg.setup_id = 5;
  CHECK_THROWS_AS(aml::run_replications(cfg, methods, 1, 1, opt),
                  std::invalid_argument);
  cfg.setup_id = 2;
  cfg.d = 1;
  CHECK_THROWS_AS(aml::run_replications(cfg, methods, 1, 1, opt),
                  std::invalid_argument);
  cfg.d = 2;
  cfg.k = 3;
  CHECK_THROWS_AS(aml::run_replications(cfg, methods, 1, 1, opt),
                  std::invalid_argument);
  cfg.k = 1;
  cfg.n = 5;
  CHECK_THROWS_AS(aml::run_replications(cfg, methods, 1, 1, opt),
                  std::invalid_argument);
}

}  // TEST_SUITE
