#include "ucn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace ucn {

namespace {

struct Dim {
  double lo, hi;
};

std::array<Dim, 3> dims(const Bounds& b) {
  return {Dim{b.lambda_min, b.lambda_max}, Dim{b.r_sz_min, b.r_sz_max},
          Dim{b.p_tx_min, b.p_tx_max}};
}

std::array<double, 3> to_array(const CopPoint& c) {
  return {c.lambda_dbs, c.r_sz, c.p_tx_dbm};
}

CopPoint from_array(const std::array<double, 3>& v) {
  return {v[0], v[1], v[2]};
}

void require_model(const GbtModel* m, const char* slot, const char* role,
                   const char* target) {
  if (m == nullptr)
    throw std::invalid_argument(std::string("make_fitness: missing model ") +
                                slot);
  if (m->role != role)
    throw std::invalid_argument(std::string("make_fitness: ") + slot +
                                " has role '" + m->role + "', expected '" +
                                role + "'");
  if (m->target_name != target)
    throw std::invalid_argument(std::string("make_fitness: ") + slot +
                                " has target '" + m->target_name +
                                "', expected '" + target + "'");
}

// Shared improvement bookkeeping: records the last iteration whose best-value
// gain reached min_improve; the run stops once `patience` iterations pass
// without one.
struct StallTracker {
  double min_improve;
  int patience;
  int last_improve = 0;

  bool update(int iter, double prev_best, double new_best) {
    if (new_best - prev_best >= min_improve) last_improve = iter;
    return iter - last_improve >= patience;
  }
};

}  // namespace

double objective_value(double ase, double ee, const ObjectiveSpec& spec) {
  if (!(spec.theta_max > 0.0) || !(spec.eta_max > 0.0))
    throw std::invalid_argument("objective: normalizers must be > 0");
  const double a = std::max(ase, 0.0);
  const double e = std::max(ee, 0.0);
  return spec.alpha_se * (a / spec.theta_max) +
         (1.0 - spec.alpha_se) * (e / spec.eta_max);
}

Fitness make_fitness(FitnessKind kind, const ModelBundle& models,
                     const ObjectiveSpec& spec) {
  switch (kind) {
    case FitnessKind::baseline: {
      require_model(models.ase_e, "ase_e", "model_e", "ase");
      require_model(models.ee_e, "ee_e", "model_e", "ee");
      const GbtModel* ase = models.ase_e;
      const GbtModel* ee = models.ee_e;
      return [ase, ee, spec](const CopPoint& cop) {
        return objective_value(ase->predict(cop), ee->predict(cop), spec);
      };
    }
    case FitnessKind::ddoec: {
      require_model(models.ase_e, "ase_e", "model_e", "ase");
      require_model(models.ee_e, "ee_e", "model_e", "ee");
      require_model(models.ase_r, "ase_r", "model_r", "ase");
      require_model(models.ee_r, "ee_r", "model_r", "ee");
      const ModelBundle m = models;
      return [m, spec](const CopPoint& cop) {
        return objective_value(m.ase_e->predict(cop) + m.ase_r->predict(cop),
                               m.ee_e->predict(cop) + m.ee_r->predict(cop),
                               spec);
      };
    }
    case FitnessKind::oracle: {
      require_model(models.ase_oracle, "ase_oracle", "model_e", "ase");
      require_model(models.ee_oracle, "ee_oracle", "model_e", "ee");
      const GbtModel* ase = models.ase_oracle;
      const GbtModel* ee = models.ee_oracle;
      return [ase, ee, spec](const CopPoint& cop) {
        return objective_value(ase->predict(cop), ee->predict(cop), spec);
      };
    }
  }
  throw std::invalid_argument("make_fitness: unknown kind");
}

double sa_temp_update(double t, const SaParams& p) {
  if (!(t > 0.0)) throw std::invalid_argument("sa_temp_update: t must be > 0");
  const double l = std::log1p(p.delta);
  if (p.schedule == SaSchedule::literal)
    return t / (1.0 + l * 3.0 * p.sigma * t);
  return t / (1.0 + t * l / (3.0 * p.sigma));
}

OptResult sa_optimize(const Fitness& fitness, const Bounds& bounds,
                      const SaParams& p, RngStream rng) {
  if (!(p.t0 > 0.0) || !(p.delta > 0.0) || !(p.sigma > 0.0) ||
      !(p.step_frac > 0.0) || p.max_iters < 1)
    throw std::invalid_argument("sa_optimize: invalid parameters");

  const auto box = dims(bounds);
  std::array<double, 3> x{};
  for (int d = 0; d < 3; ++d) x[d] = rng.uniform(box[d].lo, box[d].hi);
  double fx = fitness(from_array(x));

  OptResult res;
  res.best_cop = from_array(x);
  res.best_value = fx;
  res.trace.push_back(fx);

  SaParams sched = p;
  double temperature = p.t0;
  std::deque<double> window;
  if (p.sigma_adaptive) window.push_back(fx);
  StallTracker stall{p.min_improve, p.patience};

  for (int k = 1; k <= p.max_iters; ++k) {
    std::array<double, 3> y = x;
    for (int d = 0; d < 3; ++d) {
      y[d] += rng.normal() * p.step_frac * (box[d].hi - box[d].lo);
      y[d] = std::clamp(y[d], box[d].lo, box[d].hi);
    }
    const double fy = fitness(from_array(y));
    const double delta_f = fy - fx;
    if (delta_f >= 0.0 ||
        rng.next_double() < std::exp(delta_f / temperature)) {
      x = y;
      fx = fy;
    }

    const double prev_best = res.best_value;
    if (fy > res.best_value) {
      res.best_value = fy;
      res.best_cop = from_array(y);
    }
    res.trace.push_back(res.best_value);

    if (p.sigma_adaptive) {
      window.push_back(fy);
      while (static_cast<int>(window.size()) > p.sigma_window)
        window.pop_front();
      double mean = 0.0;
      for (double v : window) mean += v;
      mean /= static_cast<double>(window.size());
      double var = 0.0;
      for (double v : window) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / static_cast<double>(window.size()));
      sched.sigma = std::max(sd, 1e-12);
    }
    temperature = sa_temp_update(temperature, sched);

    if (stall.update(k, prev_best, res.best_value)) break;
  }
  res.iterations_to_converge = stall.last_improve;
  return res;
}

OptResult ga_optimize(const Fitness& fitness, const Bounds& bounds,
                      const GaParams& p, RngStream rng) {
  if (p.pop_size < 2 || p.elite < 0 || p.elite >= p.pop_size ||
      p.tournament < 1 || p.generations < 1)
    throw std::invalid_argument("ga_optimize: invalid parameters");

  const auto box = dims(bounds);
  const int n = p.pop_size;
  std::vector<std::array<double, 3>> pop(n);
  std::vector<double> fit(n);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < 3; ++d) pop[i][d] = rng.uniform(box[d].lo, box[d].hi);
    fit[i] = fitness(from_array(pop[i]));
  }

  // Indices of the current population ordered best-first (ties by index).
  auto ranking = [&] {
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (fit[a] != fit[b]) return fit[a] > fit[b];
      return a < b;
    });
    return order;
  };

  auto tournament_pick = [&] {
    int winner = static_cast<int>(rng.below(n));
    for (int t = 1; t < p.tournament; ++t) {
      const int challenger = static_cast<int>(rng.below(n));
      if (fit[challenger] > fit[winner] ||
          (fit[challenger] == fit[winner] && challenger < winner))
        winner = challenger;
    }
    return winner;
  };

  OptResult res;
  {
    const auto order = ranking();
    res.best_cop = from_array(pop[order[0]]);
    res.best_value = fit[order[0]];
    res.trace.push_back(res.best_value);
  }
  StallTracker stall{p.min_improve, p.patience};

  for (int g = 1; g <= p.generations; ++g) {
    std::vector<std::array<double, 3>> next;
    std::vector<double> next_fit;
    next.reserve(n);
    next_fit.reserve(n);

    const auto order = ranking();
    for (int e = 0; e < p.elite; ++e) {
      next.push_back(pop[order[e]]);
      next_fit.push_back(fit[order[e]]);
    }

    while (static_cast<int>(next.size()) < n) {
      const auto& p1 = pop[tournament_pick()];
      const auto& p2 = pop[tournament_pick()];
      std::array<double, 3> child{};
      for (int d = 0; d < 3; ++d) {
        const double lo = std::min(p1[d], p2[d]);
        const double hi = std::max(p1[d], p2[d]);
        const double spread = hi - lo;
        child[d] = rng.uniform(lo - p.blend_alpha * spread,
                               hi + p.blend_alpha * spread);
        if (rng.next_double() < p.mutation_prob)
          child[d] += rng.normal() * p.mutation_frac * (box[d].hi - box[d].lo);
        child[d] = std::clamp(child[d], box[d].lo, box[d].hi);
      }
      next.push_back(child);
      next_fit.push_back(fitness(from_array(child)));
    }

    pop = std::move(next);
    fit = std::move(next_fit);

    const double prev_best = res.best_value;
    for (int i = 0; i < n; ++i) {
      if (fit[i] > res.best_value) {
        res.best_value = fit[i];
        res.best_cop = from_array(pop[i]);
      }
    }
    res.trace.push_back(res.best_value);
    if (stall.update(g, prev_best, res.best_value)) break;
  }
  res.iterations_to_converge = stall.last_improve;
  return res;
}

double sign_test_p(const std::vector<double>& diffs) {
  int n = 0, pos = 0;
  for (double d : diffs) {
    if (d == 0.0) continue;
    ++n;
    if (d > 0.0) ++pos;
  }
  if (n == 0) return 1.0;
  // Two-sided exact binomial tail at p = 1/2.
  const int k = std::max(pos, n - pos);
  double tail = 0.0;
  double log_half_n = n * std::log(0.5);
  for (int i = k; i <= n; ++i) {
    const double log_c = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) -
                         std::lgamma(n - i + 1.0);
    tail += std::exp(log_c + log_half_n);
  }
  return std::min(1.0, 2.0 * tail);
}

}  // namespace ucn
