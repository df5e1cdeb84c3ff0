#include "ucn/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace ucn {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kMinLinkDistance = 1e-9;  // numerical floor, never physical

inline double sq(double v) { return v * v; }

inline double dist2(const Point2D& a, const Point2D& b) {
  return sq(a.x - b.x) + sq(a.y - b.y);
}

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

// Hash grid over 2-D points, robust to arbitrary coordinates.
class PointGrid {
 public:
  explicit PointGrid(double cell) : cell_(cell) {}

  void insert(std::uint32_t index, const Point2D& p) {
    cells_[key(p)].push_back(index);
  }

  // Visits indices in the 3x3 cell neighborhood of p; any point within
  // cell_ of p is guaranteed to be visited.
  template <typename Fn>
  void for_neighborhood(const Point2D& p, Fn&& fn) const {
    const std::int64_t cx = coord(p.x);
    const std::int64_t cy = coord(p.y);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = cells_.find(pack(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (std::uint32_t idx : it->second) fn(idx);
      }
    }
  }

 private:
  std::int64_t coord(double v) const {
    return static_cast<std::int64_t>(std::floor(v / cell_));
  }
  static std::uint64_t pack(std::int64_t x, std::int64_t y) {
    return (static_cast<std::uint64_t>(x) << 32) ^
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(y));
  }
  std::uint64_t key(const Point2D& p) const {
    return pack(coord(p.x), coord(p.y));
  }

  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

inline double path_loss_db_impl(double d_m, const RadioParams& rp,
                                double fspl_1m) {
  double pl = -fspl_1m - 10.0 * rp.pl_exp_near * std::log10(d_m);
  if (d_m > rp.breakpoint_m)
    pl -= 10.0 * rp.pl_exp_far * std::log10(d_m / rp.breakpoint_m);
  return pl;
}

void check_radio(const RadioParams& rp) {
  if (!(rp.carrier_hz > 0.0) || !(rp.breakpoint_m > 0.0))
    throw std::invalid_argument("radio params: carrier and breakpoint must be > 0");
  if (rp.pl_exp_near < 0.0 || rp.pl_exp_far < 0.0 || rp.shadow_sigma_db < 0.0 ||
      rp.error_radius_m < 0.0)
    throw std::invalid_argument("radio params: exponents, shadowing and error radius must be >= 0");
}

}  // namespace

const char* flavor_name(Flavor f) {
  switch (f) {
    case Flavor::ideal: return "ideal";
    case Flavor::erroneous: return "erroneous";
    case Flavor::residual: return "residual";
  }
  return "?";
}

Flavor flavor_from_name(const std::string& name) {
  if (name == "ideal") return Flavor::ideal;
  if (name == "erroneous") return Flavor::erroneous;
  if (name == "residual") return Flavor::residual;
  throw std::runtime_error("unknown flavor: '" + name + "'");
}

std::vector<Point2D> sample_ppp(double density, double area_m2,
                                RngStream& rng) {
  if (!std::isfinite(density) || !std::isfinite(area_m2))
    throw std::invalid_argument("sample_ppp: non-finite inputs");
  if (density < 0.0) throw std::invalid_argument("sample_ppp: density < 0");
  if (!(area_m2 > 0.0)) throw std::invalid_argument("sample_ppp: area <= 0");
  const double side = std::sqrt(area_m2);
  const std::int64_t count = rng.poisson(density * area_m2);
  std::vector<Point2D> pts(static_cast<std::size_t>(count));
  for (auto& p : pts) {
    p.x = rng.uniform(0.0, side);
    p.y = rng.uniform(0.0, side);
  }
  return pts;
}

std::vector<Node> inject_position_error(const std::vector<Point2D>& reported,
                                        double r_er, RngStream& rng) {
  if (!(r_er >= 0.0) || !std::isfinite(r_er))
    throw std::invalid_argument("inject_position_error: r_er must be >= 0");
  std::vector<Node> nodes(reported.size());
  for (std::size_t i = 0; i < reported.size(); ++i) {
    const double r = r_er * std::sqrt(rng.next_double());
    const double a = 2.0 * std::numbers::pi * rng.next_double();
    nodes[i].perceived = reported[i];
    nodes[i].actual = {reported[i].x + r * std::cos(a),
                       reported[i].y + r * std::sin(a)};
  }
  return nodes;
}

std::vector<Node> exact_nodes(const std::vector<Point2D>& points) {
  std::vector<Node> nodes(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    nodes[i].actual = points[i];
    nodes[i].perceived = points[i];
  }
  return nodes;
}

double fspl_1m_db(double carrier_hz) {
  return 20.0 *
         std::log10(4.0 * std::numbers::pi * carrier_hz / kSpeedOfLight);
}

double path_loss_db(double d_m, const RadioParams& rp) {
  if (!(d_m > 0.0) || !std::isfinite(d_m))
    throw std::invalid_argument("path_loss_db: distance must be > 0");
  return path_loss_db_impl(d_m, rp, fspl_1m_db(rp.carrier_hz));
}

ScheduleResult schedule_and_associate(const Deployment& dep, double r_sz,
                                      RngStream& rng, bool elastic_rsz) {
  if (!(r_sz > 0.0)) throw std::invalid_argument("schedule: r_sz must be > 0");
  ScheduleResult res;
  const std::uint32_t n_ue = static_cast<std::uint32_t>(dep.ues.size());
  if (n_ue == 0) return res;

  const auto order = rng.permutation(n_ue);
  const double conflict2 = sq(2.0 * r_sz);
  const double zone2 = sq(r_sz);

  PointGrid dbs_grid(r_sz);
  for (std::uint32_t b = 0; b < dep.dbs.size(); ++b)
    dbs_grid.insert(b, dep.dbs[b].perceived);

  PointGrid scheduled_grid(2.0 * r_sz);
  std::vector<std::uint32_t> scheduled;
  std::vector<char> dbs_taken(dep.dbs.size(), 0);

  for (const std::uint32_t u : order) {
    const Point2D& pu = dep.ues[u].perceived;
    bool blocked = false;
    scheduled_grid.for_neighborhood(pu, [&](std::uint32_t other) {
      if (!blocked && dist2(pu, dep.ues[other].perceived) <= conflict2)
        blocked = true;
    });
    if (blocked) {
      ++res.deferred;
      continue;
    }
    scheduled_grid.insert(u, pu);
    scheduled.push_back(u);

    // Perceived-nearest free DBS within the Szone; ties to the lowest index.
    std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
    double best_d2 = std::numeric_limits<double>::infinity();
    dbs_grid.for_neighborhood(pu, [&](std::uint32_t b) {
      if (dbs_taken[b]) return;
      const double d2 = dist2(pu, dep.dbs[b].perceived);
      if (d2 > zone2) return;
      if (d2 < best_d2 || (d2 == best_d2 && b < best)) {
        best = b;
        best_d2 = d2;
      }
    });
    if (best == std::numeric_limits<std::uint32_t>::max() && elastic_rsz) {
      // Elastic fallback: grow the zone to the nearest free DBS.
      for (std::uint32_t b = 0; b < dep.dbs.size(); ++b) {
        if (dbs_taken[b]) continue;
        const double d2 = dist2(pu, dep.dbs[b].perceived);
        if (d2 < best_d2 || (d2 == best_d2 && b < best)) {
          best = b;
          best_d2 = d2;
        }
      }
    }
    if (best == std::numeric_limits<std::uint32_t>::max()) {
      ++res.unserved_scheduled;
    } else {
      dbs_taken[best] = 1;
      res.served.emplace_back(u, best);
    }
  }
  return res;
}

KpiSample snapshot_kpis(const Deployment& dep, const CopPoint& cop,
                        const RadioParams& rp, const PowerModelParams& pm,
                        const RngStream& ctx, bool elastic_rsz) {
  check_radio(rp);
  if (!(dep.area_m2 > 0.0))
    throw std::invalid_argument("snapshot_kpis: area must be > 0");

  RngStream sched_rng = ctx.derive("sched");
  const ScheduleResult sr =
      schedule_and_associate(dep, cop.r_sz, sched_rng, elastic_rsz);

  const double fspl = fspl_1m_db(rp.carrier_hz);
  const double noise_mw = dbm_to_mw(rp.noise_dbm);
  const double tx_const_dbm = cop.p_tx_dbm + rp.tx_gain_dbi;
  const bool shadowed = rp.shadow_sigma_db > 0.0;

  // ln-domain constants so each link costs one log and one exp; identical in
  // value to path_loss_db up to rounding.
  constexpr double kLn10 = std::numbers::ln10;
  const double near_coef = 5.0 * rp.pl_exp_near / kLn10;   // * ln(d^2)
  const double far_coef = 5.0 * rp.pl_exp_far / kLn10;
  const double bp2 = sq(rp.breakpoint_m);
  const double ln_bp2 = std::log(bp2);
  const double floor2 = sq(kMinLinkDistance);

  // Received power on the actual-position link (ue, dbs), in mW.
  auto rx_mw = [&](std::uint32_t u, std::uint32_t b) {
    const double d2 =
        std::max(dist2(dep.ues[u].actual, dep.dbs[b].actual), floor2);
    const double ln_d2 = std::log(d2);
    double level = tx_const_dbm - fspl - near_coef * ln_d2;
    if (d2 > bp2) level -= far_coef * (ln_d2 - ln_bp2);
    if (shadowed) {
      RngStream link = ctx.derive("shadow", u, b);
      level += rp.shadow_sigma_db * link.normal();
    }
    return std::exp(level * (kLn10 / 10.0));
  };

  double sum_log2 = 0.0;
  for (const auto& [u, b] : sr.served) {
    const double signal = rx_mw(u, b);
    double interference = 0.0;
    for (const auto& [ou, ob] : sr.served) {
      if (ob == b) continue;
      interference += rx_mw(u, ob);
    }
    const double gamma = signal / (noise_mw + interference);
    sum_log2 += std::log2(1.0 + gamma);
  }

  KpiSample k;
  k.ase = sum_log2 / dep.area_m2;
  const double n_active = static_cast<double>(sr.served.size());
  const double n_sleep = static_cast<double>(dep.dbs.size()) - n_active;
  const double p_tx_w = dbm_to_mw(cop.p_tx_dbm) * 1e-3;
  k.total_power_w = pm.cbs_fixed_w +
                    n_active * (pm.dbs_p0_w + pm.dbs_slope * p_tx_w) +
                    n_sleep * pm.dbs_sleep_w;
  k.ee = k.total_power_w > 0.0 ? dep.area_m2 * k.ase / k.total_power_w : 0.0;
  return k;
}

KpiSample average_kpis(const CopPoint& cop, const Scenario& scen,
                       const RadioParams& rp, const PowerModelParams& pm,
                       int n_cycles, Flavor flavor, std::uint64_t seed) {
  if (n_cycles < 1) throw std::invalid_argument("average_kpis: n_cycles < 1");
  if (flavor == Flavor::residual)
    throw std::invalid_argument("average_kpis: flavor must be ideal or erroneous");
  check_radio(rp);
  if (!(scen.area_m2 > 0.0))
    throw std::invalid_argument("average_kpis: area must be > 0");
  if (!(cop.lambda_dbs >= 0.0) || !(scen.lambda_ue >= 0.0))
    throw std::invalid_argument("average_kpis: densities must be >= 0");

  const RngStream root(seed);
  KpiSample acc;
  for (int c = 0; c < n_cycles; ++c) {
    const RngStream cyc = root.derive("cycle", static_cast<std::uint64_t>(c));
    RngStream dbs_rng = cyc.derive("deploy.dbs");
    RngStream ue_rng = cyc.derive("deploy.ue");
    const auto dbs_pts = sample_ppp(cop.lambda_dbs, scen.area_m2, dbs_rng);
    const auto ue_pts = sample_ppp(scen.lambda_ue, scen.area_m2, ue_rng);

    Deployment dep;
    dep.area_m2 = scen.area_m2;
    if (flavor == Flavor::erroneous) {
      RngStream dbs_err = cyc.derive("err.dbs");
      RngStream ue_err = cyc.derive("err.ue");
      dep.dbs = inject_position_error(dbs_pts, rp.error_radius_m, dbs_err);
      dep.ues = inject_position_error(ue_pts, rp.error_radius_m, ue_err);
    } else {
      dep.dbs = exact_nodes(dbs_pts);
      dep.ues = exact_nodes(ue_pts);
    }

    const KpiSample k = snapshot_kpis(dep, cop, rp, pm, cyc, scen.elastic_rsz);
    acc.ase += k.ase;
    acc.ee += k.ee;
    acc.total_power_w += k.total_power_w;
  }
  acc.ase /= n_cycles;
  acc.ee /= n_cycles;
  acc.total_power_w /= n_cycles;
  return acc;
}

}  // namespace ucn
