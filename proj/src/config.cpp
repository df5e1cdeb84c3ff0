#include "ucn/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ucn/kv.hpp"

namespace ucn {

namespace {

void fail(const std::string& key, const std::string& why) {
  throw std::runtime_error("config key '" + key + "': " + why);
}

void check_range(const std::string& name, double lo, double hi) {
  if (!(lo < hi))
    fail(name, "min must be < max (got " + format_double(lo) + " >= " +
                   format_double(hi) + ")");
}

void check_positive(const std::string& key, double v) {
  if (!(v > 0.0)) fail(key, "must be > 0");
}

void check_nonneg(const std::string& key, double v) {
  if (!(v >= 0.0)) fail(key, "must be >= 0");
}

}  // namespace

ExperimentConfig default_config() { return {}; }

ExperimentConfig parse_config_text(const std::string& text) {
  const KvFile kv = KvFile::parse_text(text);
  ExperimentConfig c;

  auto opt_double = [&](const char* key, double& slot) {
    if (kv.has(key)) slot = kv.get_double(key);
  };
  auto opt_int = [&](const char* key, int& slot) {
    if (kv.has(key)) slot = static_cast<int>(kv.get_int(key));
  };
  auto opt_bool = [&](const char* key, bool& slot) {
    if (kv.has(key)) slot = kv.get_bool(key);
  };

  opt_double("lambda_dbs_min", c.bounds.lambda_min);
  opt_double("lambda_dbs_max", c.bounds.lambda_max);
  opt_double("r_sz_min_m", c.bounds.r_sz_min);
  opt_double("r_sz_max_m", c.bounds.r_sz_max);
  opt_double("p_tx_min_dbm", c.bounds.p_tx_min);
  opt_double("p_tx_max_dbm", c.bounds.p_tx_max);

  opt_double("lambda_ue", c.scenario.lambda_ue);
  opt_double("area_m2", c.scenario.area_m2);
  opt_bool("elastic_rsz", c.scenario.elastic_rsz);

  opt_double("carrier_hz", c.radio.carrier_hz);
  opt_double("pl_exp_near", c.radio.pl_exp_near);
  opt_double("pl_exp_far", c.radio.pl_exp_far);
  opt_double("breakpoint_m", c.radio.breakpoint_m);
  opt_double("shadow_sigma_db", c.radio.shadow_sigma_db);
  opt_double("noise_dbm", c.radio.noise_dbm);
  opt_double("tx_gain_dbi", c.radio.tx_gain_dbi);
  opt_double("error_radius_m", c.radio.error_radius_m);

  opt_double("dbs_p0_w", c.power.dbs_p0_w);
  opt_double("dbs_slope", c.power.dbs_slope);
  opt_double("dbs_sleep_w", c.power.dbs_sleep_w);
  opt_double("cbs_fixed_w", c.power.cbs_fixed_w);

  opt_int("bins", c.bins);
  opt_int("n_cycles", c.n_cycles);
  opt_int("kfold_k", c.kfold_k);

  if (kv.has("algorithms")) c.algorithms = kv.get_string_list("algorithms");
  if (kv.has("schemes")) c.schemes = kv.get_string_list("schemes");
  if (kv.has("weight_cases")) c.weight_cases = kv.get_double_list("weight_cases");
  if (kv.has("alpha_se")) {
    if (kv.has("weight_cases"))
      fail("alpha_se", "conflicts with weight_cases; set only one");
    c.weight_cases = {kv.get_double("alpha_se")};
  }

  opt_double("sa_t0", c.sa.t0);
  opt_double("sa_delta", c.sa.delta);
  opt_double("sa_sigma", c.sa.sigma);
  opt_bool("sa_sigma_adaptive", c.sa.sigma_adaptive);
  opt_int("sa_sigma_window", c.sa.sigma_window);
  opt_int("sa_max_iters", c.sa.max_iters);
  opt_int("sa_patience", c.sa.patience);
  opt_double("sa_step_frac", c.sa.step_frac);
  opt_double("sa_min_improve", c.sa.min_improve);
  if (kv.has("sa_schedule")) {
    const std::string s = kv.get_string("sa_schedule");
    if (s == "literal")
      c.sa.schedule = SaSchedule::literal;
    else if (s == "aarts")
      c.sa.schedule = SaSchedule::aarts;
    else
      fail("sa_schedule", "expected literal or aarts, got '" + s + "'");
  }

  opt_int("ga_pop_size", c.ga.pop_size);
  opt_int("ga_generations", c.ga.generations);
  opt_int("ga_tournament", c.ga.tournament);
  opt_double("ga_blend_alpha", c.ga.blend_alpha);
  opt_double("ga_mutation_prob", c.ga.mutation_prob);
  opt_double("ga_mutation_frac", c.ga.mutation_frac);
  opt_int("ga_elite", c.ga.elite);
  opt_int("ga_patience", c.ga.patience);
  opt_double("ga_min_improve", c.ga.min_improve);

  opt_int("trials", c.trials);
  if (kv.has("master_seed")) c.master_seed = kv.get_uint("master_seed");
  opt_int("jobs", c.jobs);

  const auto unknown = kv.unread_keys();
  if (!unknown.empty())
    throw std::runtime_error("unknown config key: '" + unknown.front() + "'");

  // Validation.
  check_range("lambda_dbs", c.bounds.lambda_min, c.bounds.lambda_max);
  check_range("r_sz", c.bounds.r_sz_min, c.bounds.r_sz_max);
  check_range("p_tx", c.bounds.p_tx_min, c.bounds.p_tx_max);
  check_nonneg("lambda_dbs_min", c.bounds.lambda_min);
  check_positive("r_sz_min_m", c.bounds.r_sz_min);
  check_nonneg("lambda_ue", c.scenario.lambda_ue);
  check_positive("area_m2", c.scenario.area_m2);
  check_positive("carrier_hz", c.radio.carrier_hz);
  check_positive("breakpoint_m", c.radio.breakpoint_m);
  check_nonneg("pl_exp_near", c.radio.pl_exp_near);
  check_nonneg("pl_exp_far", c.radio.pl_exp_far);
  check_nonneg("shadow_sigma_db", c.radio.shadow_sigma_db);
  check_nonneg("error_radius_m", c.radio.error_radius_m);
  check_nonneg("dbs_p0_w", c.power.dbs_p0_w);
  check_nonneg("dbs_slope", c.power.dbs_slope);
  check_nonneg("dbs_sleep_w", c.power.dbs_sleep_w);
  check_nonneg("cbs_fixed_w", c.power.cbs_fixed_w);
  if (c.power.dbs_p0_w < c.power.dbs_sleep_w)
    fail("dbs_p0_w", "must be >= dbs_sleep_w");
  if (c.bins < 2) fail("bins", "must be >= 2");
  if (c.n_cycles < 1) fail("n_cycles", "must be >= 1");
  if (c.kfold_k < 2) fail("kfold_k", "must be >= 2");
  if (c.trials < 1) fail("trials", "must be >= 1");
  if (c.weight_cases.empty()) fail("weight_cases", "must not be empty");
  for (double a : c.weight_cases)
    if (!(a >= 0.0 && a <= 1.0))
      fail("alpha_se", "weight must be in [0,1], got " + format_double(a));
  if (c.algorithms.empty()) fail("algorithms", "must not be empty");
  for (const auto& a : c.algorithms)
    if (a != "sa" && a != "ga") fail("algorithms", "unknown algorithm '" + a + "'");
  for (const auto& s : c.schemes)
    if (s != "baseline" && s != "ddoec")
      fail("schemes", "unknown scheme '" + s + "'");
  if (!(c.sa.t0 > 0.0)) fail("sa_t0", "must be > 0");
  if (!(c.sa.delta > 0.0)) fail("sa_delta", "must be > 0");
  if (!(c.sa.sigma > 0.0)) fail("sa_sigma", "must be > 0");
  if (!(c.sa.step_frac > 0.0 && c.sa.step_frac <= 1.0))
    fail("sa_step_frac", "must be in (0,1]");
  if (c.sa.max_iters < 1) fail("sa_max_iters", "must be >= 1");
  if (c.sa.patience < 1) fail("sa_patience", "must be >= 1");
  if (c.ga.pop_size < 2) fail("ga_pop_size", "must be >= 2");
  if (c.ga.elite < 0 || c.ga.elite >= c.ga.pop_size)
    fail("ga_elite", "must be in [0, pop_size)");
  if (c.ga.tournament < 1) fail("ga_tournament", "must be >= 1");
  if (c.ga.generations < 1) fail("ga_generations", "must be >= 1");
  if (c.ga.patience < 1) fail("ga_patience", "must be >= 1");
  if (!(c.ga.mutation_prob >= 0.0 && c.ga.mutation_prob <= 1.0))
    fail("ga_mutation_prob", "must be in [0,1]");
  if (c.jobs < 0) fail("jobs", "must be >= 0");

  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_to_text(const ExperimentConfig& c) {
  KvFile kv;
  kv.set_double("lambda_dbs_min", c.bounds.lambda_min);
  kv.set_double("lambda_dbs_max", c.bounds.lambda_max);
  kv.set_double("r_sz_min_m", c.bounds.r_sz_min);
  kv.set_double("r_sz_max_m", c.bounds.r_sz_max);
  kv.set_double("p_tx_min_dbm", c.bounds.p_tx_min);
  kv.set_double("p_tx_max_dbm", c.bounds.p_tx_max);
  kv.set_double("lambda_ue", c.scenario.lambda_ue);
  kv.set_double("area_m2", c.scenario.area_m2);
  kv.set_bool("elastic_rsz", c.scenario.elastic_rsz);
  kv.set_double("carrier_hz", c.radio.carrier_hz);
  kv.set_double("pl_exp_near", c.radio.pl_exp_near);
  kv.set_double("pl_exp_far", c.radio.pl_exp_far);
  kv.set_double("breakpoint_m", c.radio.breakpoint_m);
  kv.set_double("shadow_sigma_db", c.radio.shadow_sigma_db);
  kv.set_double("noise_dbm", c.radio.noise_dbm);
  kv.set_double("tx_gain_dbi", c.radio.tx_gain_dbi);
  kv.set_double("error_radius_m", c.radio.error_radius_m);
  kv.set_double("dbs_p0_w", c.power.dbs_p0_w);
  kv.set_double("dbs_slope", c.power.dbs_slope);
  kv.set_double("dbs_sleep_w", c.power.dbs_sleep_w);
  kv.set_double("cbs_fixed_w", c.power.cbs_fixed_w);
  kv.set_int("bins", c.bins);
  kv.set_int("n_cycles", c.n_cycles);
  kv.set_int("kfold_k", c.kfold_k);
  {
    std::string s;
    for (const auto& a : c.algorithms) s += (s.empty() ? "" : ",") + a;
    kv.set_string("algorithms", s);
  }
  {
    std::string s;
    for (const auto& a : c.schemes) s += (s.empty() ? "" : ",") + a;
    kv.set_string("schemes", s);
  }
  {
    std::string s;
    for (double a : c.weight_cases)
      s += (s.empty() ? "" : ",") + format_double(a);
    kv.set_string("weight_cases", s);
  }
  kv.set_double("sa_t0", c.sa.t0);
  kv.set_double("sa_delta", c.sa.delta);
  kv.set_double("sa_sigma", c.sa.sigma);
  kv.set_bool("sa_sigma_adaptive", c.sa.sigma_adaptive);
  kv.set_int("sa_sigma_window", c.sa.sigma_window);
  kv.set_int("sa_max_iters", c.sa.max_iters);
  kv.set_int("sa_patience", c.sa.patience);
  kv.set_double("sa_step_frac", c.sa.step_frac);
  kv.set_double("sa_min_improve", c.sa.min_improve);
  kv.set_string("sa_schedule",
                c.sa.schedule == SaSchedule::literal ? "literal" : "aarts");
  kv.set_int("ga_pop_size", c.ga.pop_size);
  kv.set_int("ga_generations", c.ga.generations);
  kv.set_int("ga_tournament", c.ga.tournament);
  kv.set_double("ga_blend_alpha", c.ga.blend_alpha);
  kv.set_double("ga_mutation_prob", c.ga.mutation_prob);
  kv.set_double("ga_mutation_frac", c.ga.mutation_frac);
  kv.set_int("ga_elite", c.ga.elite);
  kv.set_int("ga_patience", c.ga.patience);
  kv.set_double("ga_min_improve", c.ga.min_improve);
  kv.set_int("trials", c.trials);
  kv.set_uint("master_seed", c.master_seed);
  kv.set_int("jobs", c.jobs);
  return kv.to_text();
}

}  // namespace ucn
