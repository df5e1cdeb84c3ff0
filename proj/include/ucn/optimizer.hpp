#pragma once

// Weighted ASE/EE objective and the two metaheuristics that maximize it
// over the COP box on surrogate predictions.

#include <functional>
#include <string>
#include <vector>

#include "ucn/netsim.hpp"
#include "ucn/rng.hpp"
#include "ucn/surrogate.hpp"

namespace ucn {

struct ObjectiveSpec {
  double alpha_se = 0.5;  // ASE weight; EE gets 1 - alpha_se
  double theta_max = 1.0;  // ASE normalizer
  double eta_max = 1.0;    // EE normalizer
};

// alpha * ase/theta_max + (1-alpha) * ee/eta_max, with negative inputs
// clamped to zero before normalization.
double objective_value(double ase, double ee, const ObjectiveSpec& spec);

using Fitness = std::function<double(const CopPoint&)>;

enum class FitnessKind { baseline, ddoec, oracle };

// Model slots for fitness construction. baseline needs the E pair, ddoec
// the E and R pairs, oracle the ideal-trained pair (validation role only).
struct ModelBundle {
  const GbtModel* ase_e = nullptr;
  const GbtModel* ee_e = nullptr;
  const GbtModel* ase_r = nullptr;
  const GbtModel* ee_r = nullptr;
  const GbtModel* ase_oracle = nullptr;
  const GbtModel* ee_oracle = nullptr;
};

Fitness make_fitness(FitnessKind kind, const ModelBundle& models,
                     const ObjectiveSpec& spec);

enum class SaSchedule { literal, aarts };

struct SaParams {
  double t0 = 250.0;
  double delta = 1e-4;
  double sigma = 0.01;
  SaSchedule schedule = SaSchedule::literal;
  bool sigma_adaptive = false;   // recompute sigma over a trailing window
  int sigma_window = 50;
  int max_iters = 2000;
  int patience = 50;             // stop after this many stalled iterations
  double min_improve = 1e-4;     // improvement below this counts as stalled
  double step_frac = 0.1;        // proposal std as a fraction of each range
};

struct GaParams {
  int pop_size = 24;
  int generations = 200;
  int tournament = 2;
  double blend_alpha = 0.5;
  double mutation_prob = 0.1;    // per gene
  double mutation_frac = 0.1;    // mutation std as a fraction of each range
  int elite = 1;
  int patience = 10;
  double min_improve = 1e-4;
};

struct OptResult {
  CopPoint best_cop;
  double best_value = 0.0;
  std::vector<double> trace;  // best-so-far per iteration/generation
  int iterations_to_converge = 0;
};

// T / (1 + ln(1+delta)*3*sigma*T) for the literal schedule;
// T / (1 + T*ln(1+delta)/(3*sigma)) for the aarts variant.
double sa_temp_update(double t, const SaParams& p);

OptResult sa_optimize(const Fitness& fitness, const Bounds& bounds,
                      const SaParams& p, RngStream rng);

OptResult ga_optimize(const Fitness& fitness, const Bounds& bounds,
                      const GaParams& p, RngStream rng);

// Exact two-sided sign test p-value for the non-zero differences.
double sign_test_p(const std::vector<double>& diffs);

}  // namespace ucn
