#pragma once

// COP-grid sweeps and the on-disk database format.
//
// A database is a CSV of per-COP mean KPIs plus a `.meta` sidecar (flat
// key = value) recording bounds, bins, simulation parameters, the master
// seed, and the schema version. KPI columns are written with 17 significant
// digits so save -> load round trips are bit-exact.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ucn/netsim.hpp"

namespace ucn {

struct DatasetRow {
  CopPoint cop;
  double ase = 0.0;
  double ee = 0.0;
  Flavor flavor = Flavor::ideal;
  int n_cycles = 0;
  std::uint64_t seed = 0;
};

struct DatabaseMeta {
  int schema_version = 1;
  Flavor flavor = Flavor::ideal;
  Bounds bounds;
  int bins = 0;
  int n_cycles = 0;
  std::uint64_t master_seed = 0;
  Scenario scenario;
  RadioParams radio;
  PowerModelParams power;
};

struct Database {
  std::vector<DatasetRow> rows;
  DatabaseMeta meta;
};

// Inclusive linear spacing of each COP dimension, bins values per dimension,
// in lexicographic order (lambda_dbs outermost, p_tx innermost).
std::vector<CopPoint> cop_grid(const Bounds& bounds, int bins);

// One COP-KPI row per grid point and flavor, simulated with common random
// numbers so the pair differs only through position-error offsets. Row order
// matches grid order for any job count.
std::pair<Database, Database> generate_paired_databases(
    const std::vector<CopPoint>& grid, const Scenario& scen,
    const RadioParams& rp, const PowerModelParams& pm, int n_cycles,
    std::uint64_t master_seed, int jobs = 1);

// Per-row ideal minus erroneous KPIs; requires identical COP grids.
Database residualize(const Database& ideal, const Database& erroneous);

void persist_database(const Database& db, const std::string& path);
Database load_database(const std::string& path);

// Path of the sidecar for a database CSV (same basename, .meta suffix).
std::string meta_path_for(const std::string& csv_path);

}  // namespace ucn
