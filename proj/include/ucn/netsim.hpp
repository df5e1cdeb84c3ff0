#pragma once

// User-centric ultra-dense network snapshot simulator.
//
// DBSs and UEs are dropped by a Poisson point process over a square area.
// Every node carries two positions: the one the controller believes
// (perceived) and the physical one (actual). Scheduling and DBS association
// run on perceived positions; link budgets and SINR run on actual positions,
// so positioning error shows up as degraded KPIs while the controller's
// decisions stay fixed.

#include <cstdint>
#include <utility>
#include <vector>

#include "ucn/rng.hpp"

namespace ucn {

struct Point2D {
  double x = 0.0;
  double y = 0.0;
};

struct Node {
  Point2D actual;
  Point2D perceived;
};

struct Deployment {
  std::vector<Node> dbs;
  std::vector<Node> ues;
  double area_m2 = 0.0;
};

struct RadioParams {
  double carrier_hz = 3.5e9;
  double pl_exp_near = 2.1;     // path-loss exponent below the breakpoint
  double pl_exp_far = 4.0;      // extra exponent beyond the breakpoint
  double breakpoint_m = 10.0;
  double shadow_sigma_db = 4.0;
  double noise_dbm = -104.0;    // thermal noise over the system bandwidth
  double tx_gain_dbi = 0.0;
  double error_radius_m = 15.0;
};

struct PowerModelParams {
  double dbs_p0_w = 6.8;    // static draw of an active DBS
  double dbs_slope = 4.0;   // per-watt scaling of radiated power
  double dbs_sleep_w = 4.3;
  double cbs_fixed_w = 130.0;
};

// The optimization variable: DBS density, Szone radius, transmit power.
struct CopPoint {
  double lambda_dbs = 0.0;  // DBS per m^2
  double r_sz = 0.0;        // Szone radius, m
  double p_tx_dbm = 0.0;
};

// Box constraints on CopPoint.
struct Bounds {
  double lambda_min = 0.0005, lambda_max = 0.0125;
  double r_sz_min = 10.0, r_sz_max = 50.0;
  double p_tx_min = 15.0, p_tx_max = 30.0;
};

struct Scenario {
  double lambda_ue = 0.0005;  // UE per m^2
  double area_m2 = 1e6;
  bool elastic_rsz = false;   // rescue unserved UEs with the nearest DBS
};

struct ScheduleResult {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> served;  // (ue, dbs)
  int unserved_scheduled = 0;  // scheduled UEs with no in-zone DBS
  int deferred = 0;            // UEs blocked by the 2*r_sz separation rule
};

struct KpiSample {
  double ase = 0.0;            // bit/s/Hz/m^2
  double ee = 0.0;             // bit/s/Hz per watt
  double total_power_w = 0.0;
};

enum class Flavor { ideal, erroneous, residual };

const char* flavor_name(Flavor f);
Flavor flavor_from_name(const std::string& name);

// Homogeneous PPP over a sqrt(area) x sqrt(area) square: Poisson count, then
// independent uniform positions.
std::vector<Point2D> sample_ppp(double density, double area_m2,
                                RngStream& rng);

// Wraps reported positions into Nodes whose actual position is offset by a
// uniform draw from the disk of radius r_er.
std::vector<Node> inject_position_error(const std::vector<Point2D>& reported,
                                        double r_er, RngStream& rng);

// Nodes with actual == perceived.
std::vector<Node> exact_nodes(const std::vector<Point2D>& points);

// Two-slope close-in path loss, returned as a (negative) gain in dB.
double path_loss_db(double d_m, const RadioParams& rp);
// Free-space path loss at 1 m in dB: 20*log10(4*pi*f/c).
double fspl_1m_db(double carrier_hz);

// Greedy Szone scheduling on perceived positions: UEs are visited in a
// random priority order and admitted when farther than 2*r_sz from every
// already-scheduled UE; each admitted UE is paired with the perceived-nearest
// DBS within r_sz (ties to the lowest DBS index).
ScheduleResult schedule_and_associate(const Deployment& dep, double r_sz,
                                      RngStream& rng,
                                      bool elastic_rsz = false);

// Runs scheduling, then evaluates SINR for every served UE on actual
// positions with one log-normal shadowing draw per UE-DBS link, and reduces
// to ASE / EE / total power. Sub-streams are derived from `ctx`, so two
// calls with the same ctx, deployment geometry, and parameters see identical
// randomness.
KpiSample snapshot_kpis(const Deployment& dep, const CopPoint& cop,
                        const RadioParams& rp, const PowerModelParams& pm,
                        const RngStream& ctx, bool elastic_rsz = false);

// Mean of n_cycles independent snapshots at one COP. The ideal flavor keeps
// actual == perceived; the erroneous flavor applies error offsets. Both
// flavors derive every other draw (deployment, scheduling order, shadowing)
// from the same per-cycle sub-streams, so the pair differs only through the
// offsets (common random numbers).
KpiSample average_kpis(const CopPoint& cop, const Scenario& scen,
                       const RadioParams& rp, const PowerModelParams& pm,
                       int n_cycles, Flavor flavor, std::uint64_t seed);

}  // namespace ucn
