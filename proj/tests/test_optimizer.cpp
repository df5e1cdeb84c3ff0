#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "ucn/optimizer.hpp"

using namespace ucn;

namespace {

std::vector<CopPoint> random_cops(int n, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<CopPoint> X(n);
  for (auto& c : X) {
    c.lambda_dbs = rng.uniform(0.0005, 0.0125);
    c.r_sz = rng.uniform(10.0, 50.0);
    c.p_tx_dbm = rng.uniform(15.0, 30.0);
  }
  return X;
}

GbtModel quick_model(const std::string& role, const std::string& target,
                     double (*fn)(const CopPoint&), std::uint64_t seed) {
  const auto X = random_cops(120, seed);
  std::vector<double> y;
  for (const auto& c : X) y.push_back(fn(c));
  GbtModel m = fit_gbt(X, y, {60, 0.1, 3, 3});
  m.role = role;
  m.target_name = target;
  return m;
}

double norm_l(double v) { return (v - 0.0005) / 0.012; }
double norm_r(double v) { return (v - 10.0) / 40.0; }
double norm_p(double v) { return (v - 15.0) / 15.0; }

// Concave quadratic peaked at the box center, scaled so SA temperatures in
// the unit range are selective.
double centered_quadratic(const CopPoint& c) {
  const double dx = norm_l(c.lambda_dbs) - 0.5;
  const double dy = norm_r(c.r_sz) - 0.5;
  const double dz = norm_p(c.p_tx_dbm) - 0.5;
  return -100.0 * (dx * dx + dy * dy + dz * dz);
}

bool within_box(const CopPoint& c, const Bounds& b) {
  return c.lambda_dbs >= b.lambda_min && c.lambda_dbs <= b.lambda_max &&
         c.r_sz >= b.r_sz_min && c.r_sz <= b.r_sz_max &&
         c.p_tx_dbm >= b.p_tx_min && c.p_tx_dbm <= b.p_tx_max;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("objective: weighted normalized sum") {
  // both KPIs at their normalizers give 1 for any weight
  for (double a : {0.0, 0.25, 0.5, 1.0})
    CHECK(objective_value(3.0, 7.0, {a, 3.0, 7.0}) == doctest::Approx(1.0));

  // equal weights, both components at 0.98 of their maxima
  CHECK(objective_value(0.98, 0.98, {0.5, 1.0, 1.0}) ==
        doctest::Approx(0.98).epsilon(1e-12));

  // alpha = 0.75 with normalized KPIs (0.96, 0.80): 0.72 + 0.20 = 0.92
  CHECK(objective_value(0.96, 0.80, {0.75, 1.0, 1.0}) ==
        doctest::Approx(0.92).epsilon(1e-12));

  // negative surrogate outputs clamp to zero before normalization
  CHECK(objective_value(-1.0, 0.5, {0.5, 1.0, 1.0}) ==
        doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS(objective_value(1.0, 1.0, {0.5, 0.0, 1.0}));
}

TEST_CASE("sa_temp_update: reference values and limits") {
  SaParams p;  // t0 250, delta 1e-4, sigma 0.01
  p.schedule = SaSchedule::literal;
  // 250 / (1 + ln(1.0001)*0.03*250)
  CHECK(sa_temp_update(250.0, p) ==
        doctest::Approx(249.81264987993993).epsilon(1e-12));
  p.schedule = SaSchedule::aarts;
  // 250 / (1 + 250*ln(1.0001)/0.03)
  CHECK(sa_temp_update(250.0, p) ==
        doctest::Approx(136.36673540102198).epsilon(1e-12));

  // delta -> 0 leaves the temperature unchanged in the limit
  p.schedule = SaSchedule::literal;
  p.delta = 1e-15;
  CHECK(sa_temp_update(250.0, p) == doctest::Approx(250.0).epsilon(1e-9));

  CHECK_THROWS(sa_temp_update(0.0, p));
}

TEST_CASE("sa temperature sequence strictly decreasing for both variants") {
  for (auto sched : {SaSchedule::literal, SaSchedule::aarts}) {
    SaParams p;
    p.schedule = sched;
    double t = p.t0;
    for (int i = 0; i < 3000; ++i) {
      const double next = sa_temp_update(t, p);
      CHECK(next < t);
      CHECK(next > 0.0);
      t = next;
    }
  }
}

TEST_CASE("make_fitness: ddoec adds the residual prediction") {
  const GbtModel ase_e = quick_model("model_e", "ase", [](const CopPoint& c) {
    return 2.0 * norm_r(c.r_sz);
  }, 1);
  const GbtModel ee_e = quick_model("model_e", "ee", [](const CopPoint& c) {
    return 1.0 - norm_l(c.lambda_dbs);
  }, 2);
  const GbtModel ase_r = quick_model("model_r", "ase", [](const CopPoint& c) {
    return 0.3 * norm_p(c.p_tx_dbm);
  }, 3);
  const GbtModel ee_r = quick_model("model_r", "ee", [](const CopPoint&) {
    return 0.1;
  }, 4);

  ModelBundle mb;
  mb.ase_e = &ase_e;
  mb.ee_e = &ee_e;
  mb.ase_r = &ase_r;
  mb.ee_r = &ee_r;
  const ObjectiveSpec spec{0.6, 2.0, 1.5};
  const Fitness base = make_fitness(FitnessKind::baseline, mb, spec);
  const Fitness ddoec = make_fitness(FitnessKind::ddoec, mb, spec);

  for (const auto& c : random_cops(50, 5)) {
    CHECK(base(c) == objective_value(ase_e.predict(c), ee_e.predict(c), spec));
    CHECK(ddoec(c) ==
          objective_value(ase_e.predict(c) + ase_r.predict(c),
                          ee_e.predict(c) + ee_r.predict(c), spec));
  }
}

TEST_CASE("make_fitness: zero residual models collapse to baseline") {
  const GbtModel ase_e = quick_model("model_e", "ase", [](const CopPoint& c) {
    return norm_r(c.r_sz);
  }, 6);
  const GbtModel ee_e = quick_model("model_e", "ee", [](const CopPoint& c) {
    return norm_p(c.p_tx_dbm);
  }, 7);
  const GbtModel ase_r =
      quick_model("model_r", "ase", [](const CopPoint&) { return 0.0; }, 8);
  const GbtModel ee_r =
      quick_model("model_r", "ee", [](const CopPoint&) { return 0.0; }, 9);

  ModelBundle mb;
  mb.ase_e = &ase_e;
  mb.ee_e = &ee_e;
  mb.ase_r = &ase_r;
  mb.ee_r = &ee_r;
  const ObjectiveSpec spec{0.5, 1.0, 1.0};
  const Fitness base = make_fitness(FitnessKind::baseline, mb, spec);
  const Fitness ddoec = make_fitness(FitnessKind::ddoec, mb, spec);
  for (const auto& c : random_cops(50, 10)) CHECK(base(c) == ddoec(c));
}

TEST_CASE("make_fitness: role/target mismatches rejected") {
  const GbtModel ase_e =
      quick_model("model_e", "ase", [](const CopPoint&) { return 1.0; }, 11);
  const GbtModel ee_e =
      quick_model("model_e", "ee", [](const CopPoint&) { return 1.0; }, 12);
  const ObjectiveSpec spec{0.5, 1.0, 1.0};

  ModelBundle missing;
  missing.ase_e = &ase_e;
  CHECK_THROWS(make_fitness(FitnessKind::baseline, missing, spec));

  ModelBundle swapped;
  swapped.ase_e = &ee_e;  // wrong target in the ase slot
  swapped.ee_e = &ase_e;
  CHECK_THROWS(make_fitness(FitnessKind::baseline, swapped, spec));

  ModelBundle wrong_role;
  wrong_role.ase_e = &ase_e;
  wrong_role.ee_e = &ee_e;
  wrong_role.ase_r = &ase_e;  // model_e where model_r expected
  wrong_role.ee_r = &ee_e;
  CHECK_THROWS(make_fitness(FitnessKind::ddoec, wrong_role, spec));

  ModelBundle ok;
  ok.ase_oracle = &ase_e;
  ok.ee_oracle = &ee_e;
  CHECK_NOTHROW(make_fitness(FitnessKind::oracle, ok, spec));
}

TEST_CASE("sa: recovers the box-center argmax of a concave quadratic") {
  const Bounds b;
  SaParams p;
  p.t0 = 1.0;
  p.schedule = SaSchedule::aarts;
  p.step_frac = 0.02;
  p.patience = 200;
  p.max_iters = 5000;

  std::vector<double> dev_l, dev_r, dev_p;
  for (int s = 0; s < 20; ++s) {
    std::vector<CopPoint> evaluated;
    Fitness instrumented = [&](const CopPoint& c) {
      evaluated.push_back(c);
      return centered_quadratic(c);
    };
    const OptResult r = sa_optimize(instrumented, b, p, RngStream(100 + s));

    for (const auto& c : evaluated) CHECK(within_box(c, b));
    for (std::size_t i = 1; i < r.trace.size(); ++i)
      CHECK(r.trace[i] >= r.trace[i - 1]);
    CHECK(r.best_value == r.trace.back());
    CHECK(within_box(r.best_cop, b));

    dev_l.push_back(std::abs(norm_l(r.best_cop.lambda_dbs) - 0.5));
    dev_r.push_back(std::abs(norm_r(r.best_cop.r_sz) - 0.5));
    dev_p.push_back(std::abs(norm_p(r.best_cop.p_tx_dbm) - 0.5));
  }
  CHECK(median(dev_l) < 0.02);
  CHECK(median(dev_r) < 0.02);
  CHECK(median(dev_p) < 0.02);
}

TEST_CASE("ga: converges to a known point of a sphere fitness") {
  const Bounds b;
  const CopPoint peak{0.0035, 18.0, 27.0};
  Fitness sphere = [&](const CopPoint& c) {
    const double dx = norm_l(c.lambda_dbs) - norm_l(peak.lambda_dbs);
    const double dy = norm_r(c.r_sz) - norm_r(peak.r_sz);
    const double dz = norm_p(c.p_tx_dbm) - norm_p(peak.p_tx_dbm);
    return -std::sqrt(dx * dx + dy * dy + dz * dz);
  };

  GaParams p;  // Table II population of 24
  std::vector<double> dev_l, dev_r, dev_p;
  for (int s = 0; s < 20; ++s) {
    const OptResult r = ga_optimize(sphere, b, p, RngStream(300 + s));
    for (std::size_t i = 1; i < r.trace.size(); ++i)
      CHECK(r.trace[i] >= r.trace[i - 1]);
    CHECK(within_box(r.best_cop, b));
    dev_l.push_back(
        std::abs(norm_l(r.best_cop.lambda_dbs) - norm_l(peak.lambda_dbs)));
    dev_r.push_back(std::abs(norm_r(r.best_cop.r_sz) - norm_r(peak.r_sz)));
    dev_p.push_back(
        std::abs(norm_p(r.best_cop.p_tx_dbm) - norm_p(peak.p_tx_dbm)));
  }
  CHECK(median(dev_l) < 0.02);
  CHECK(median(dev_r) < 0.02);
  CHECK(median(dev_p) < 0.02);
}

TEST_CASE("ga: population size fixed, feasible evaluations only") {
  const Bounds b;
  GaParams p;
  p.generations = 40;
  p.patience = 40;  // run all generations
  int evals = 0;
  Fitness f = [&](const CopPoint& c) {
    CHECK(within_box(c, b));
    ++evals;
    return centered_quadratic(c);
  };
  const OptResult r = ga_optimize(f, b, p, RngStream(7));
  const int gens = static_cast<int>(r.trace.size()) - 1;
  // initial population, then pop_size - elite fresh evaluations per
  // generation: constant population of 24 throughout
  CHECK(evals == p.pop_size + gens * (p.pop_size - p.elite));
}

TEST_CASE("ga: tournament decisions invariant under increasing transforms") {
  const Bounds b;
  GaParams p;
  p.generations = 30;
  p.patience = 30;  // disable early stop so both runs see equal length
  Fitness f = centered_quadratic;
  Fitness g = [](const CopPoint& c) {
    return 5.0 * centered_quadratic(c) + 2.0;
  };
  const OptResult rf = ga_optimize(f, b, p, RngStream(55));
  const OptResult rg = ga_optimize(g, b, p, RngStream(55));
  CHECK(rf.best_cop.lambda_dbs == rg.best_cop.lambda_dbs);
  CHECK(rf.best_cop.r_sz == rg.best_cop.r_sz);
  CHECK(rf.best_cop.p_tx_dbm == rg.best_cop.p_tx_dbm);
  CHECK(rg.best_value == doctest::Approx(5.0 * rf.best_value + 2.0));
}

TEST_CASE("sign test p-values") {
  CHECK(sign_test_p({}) == 1.0);
  CHECK(sign_test_p({0.0, 0.0}) == 1.0);  // ties dropped
  // 10 of 10 positive: p = 2 * 0.5^10
  CHECK(sign_test_p({1, 1, 1, 1, 1, 1, 1, 1, 1, 1}) ==
        doctest::Approx(2.0 * std::pow(0.5, 10)).epsilon(1e-9));
  // balanced signs: p = 1
  CHECK(sign_test_p({1, -1, 1, -1}) == doctest::Approx(1.0));
  // 15 of 20 positive
  std::vector<double> d(20, 1.0);
  for (int i = 0; i < 5; ++i) d[i] = -1.0;
  CHECK(sign_test_p(d) == doctest::Approx(0.04138946533203125).epsilon(1e-9));
}

}  // TEST_SUITE
