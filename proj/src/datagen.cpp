#include "ucn/datagen.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "ucn/csvio.hpp"
#include "ucn/kv.hpp"
#include "ucn/parallel.hpp"

namespace ucn {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  out.front() = lo;
  out.back() = hi;
  return out;
}

void check_bounds(const Bounds& b) {
  if (!(b.lambda_min < b.lambda_max))
    throw std::invalid_argument("bounds: lambda_dbs range empty");
  if (!(b.r_sz_min < b.r_sz_max))
    throw std::invalid_argument("bounds: r_sz range empty");
  if (!(b.p_tx_min < b.p_tx_max))
    throw std::invalid_argument("bounds: p_tx range empty");
  if (b.lambda_min < 0.0 || b.r_sz_min <= 0.0)
    throw std::invalid_argument("bounds: lambda_dbs must be >= 0 and r_sz > 0");
}

bool same_cop(const CopPoint& a, const CopPoint& b) {
  return a.lambda_dbs == b.lambda_dbs && a.r_sz == b.r_sz &&
         a.p_tx_dbm == b.p_tx_dbm;
}

std::int64_t parse_int_field(const std::string& s, const std::string& context) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE)
    throw std::runtime_error(context + ": not an integer: '" + s + "'");
  return v;
}

std::uint64_t parse_uint_field(const std::string& s,
                               const std::string& context) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE || s[0] == '-')
    throw std::runtime_error(context + ": not an unsigned integer: '" + s +
                             "'");
  return v;
}

void write_meta(const DatabaseMeta& m, const std::string& path) {
  KvFile kv;
  kv.set_int("schema_version", m.schema_version);
  kv.set_string("flavor", flavor_name(m.flavor));
  kv.set_int("bins", m.bins);
  kv.set_int("n_cycles", m.n_cycles);
  kv.set_uint("master_seed", m.master_seed);
  kv.set_double("lambda_dbs_min", m.bounds.lambda_min);
  kv.set_double("lambda_dbs_max", m.bounds.lambda_max);
  kv.set_double("r_sz_min_m", m.bounds.r_sz_min);
  kv.set_double("r_sz_max_m", m.bounds.r_sz_max);
  kv.set_double("p_tx_min_dbm", m.bounds.p_tx_min);
  kv.set_double("p_tx_max_dbm", m.bounds.p_tx_max);
  kv.set_double("lambda_ue", m.scenario.lambda_ue);
  kv.set_double("area_m2", m.scenario.area_m2);
  kv.set_bool("elastic_rsz", m.scenario.elastic_rsz);
  kv.set_double("carrier_hz", m.radio.carrier_hz);
  kv.set_double("pl_exp_near", m.radio.pl_exp_near);
  kv.set_double("pl_exp_far", m.radio.pl_exp_far);
  kv.set_double("breakpoint_m", m.radio.breakpoint_m);
  kv.set_double("shadow_sigma_db", m.radio.shadow_sigma_db);
  kv.set_double("noise_dbm", m.radio.noise_dbm);
  kv.set_double("tx_gain_dbi", m.radio.tx_gain_dbi);
  kv.set_double("error_radius_m", m.radio.error_radius_m);
  kv.set_double("dbs_p0_w", m.power.dbs_p0_w);
  kv.set_double("dbs_slope", m.power.dbs_slope);
  kv.set_double("dbs_sleep_w", m.power.dbs_sleep_w);
  kv.set_double("cbs_fixed_w", m.power.cbs_fixed_w);
  kv.save(path);
}

DatabaseMeta read_meta(const std::string& path) {
  const KvFile kv = KvFile::load(path);
  DatabaseMeta m;
  m.schema_version = static_cast<int>(kv.get_int("schema_version"));
  if (m.schema_version != 1)
    throw std::runtime_error(path + ": unsupported schema_version " +
                             std::to_string(m.schema_version));
  m.flavor = flavor_from_name(kv.get_string("flavor"));
  m.bins = static_cast<int>(kv.get_int("bins"));
  m.n_cycles = static_cast<int>(kv.get_int("n_cycles"));
  m.master_seed = kv.get_uint("master_seed");
  m.bounds.lambda_min = kv.get_double("lambda_dbs_min");
  m.bounds.lambda_max = kv.get_double("lambda_dbs_max");
  m.bounds.r_sz_min = kv.get_double("r_sz_min_m");
  m.bounds.r_sz_max = kv.get_double("r_sz_max_m");
  m.bounds.p_tx_min = kv.get_double("p_tx_min_dbm");
  m.bounds.p_tx_max = kv.get_double("p_tx_max_dbm");
  m.scenario.lambda_ue = kv.get_double("lambda_ue");
  m.scenario.area_m2 = kv.get_double("area_m2");
  m.scenario.elastic_rsz = kv.get_bool("elastic_rsz");
  m.radio.carrier_hz = kv.get_double("carrier_hz");
  m.radio.pl_exp_near = kv.get_double("pl_exp_near");
  m.radio.pl_exp_far = kv.get_double("pl_exp_far");
  m.radio.breakpoint_m = kv.get_double("breakpoint_m");
  m.radio.shadow_sigma_db = kv.get_double("shadow_sigma_db");
  m.radio.noise_dbm = kv.get_double("noise_dbm");
  m.radio.tx_gain_dbi = kv.get_double("tx_gain_dbi");
  m.radio.error_radius_m = kv.get_double("error_radius_m");
  m.power.dbs_p0_w = kv.get_double("dbs_p0_w");
  m.power.dbs_slope = kv.get_double("dbs_slope");
  m.power.dbs_sleep_w = kv.get_double("dbs_sleep_w");
  m.power.cbs_fixed_w = kv.get_double("cbs_fixed_w");
  return m;
}

}  // namespace

std::vector<CopPoint> cop_grid(const Bounds& bounds, int bins) {
  if (bins < 2) throw std::invalid_argument("cop_grid: bins must be >= 2");
  check_bounds(bounds);
  const auto lambdas = linspace(bounds.lambda_min, bounds.lambda_max, bins);
  const auto radii = linspace(bounds.r_sz_min, bounds.r_sz_max, bins);
  const auto powers = linspace(bounds.p_tx_min, bounds.p_tx_max, bins);
  std::vector<CopPoint> grid;
  grid.reserve(static_cast<std::size_t>(bins) * bins * bins);
  for (double l : lambdas)
    for (double r : radii)
      for (double p : powers) grid.push_back({l, r, p});
  return grid;
}

std::pair<Database, Database> generate_paired_databases(
    const std::vector<CopPoint>& grid, const Scenario& scen,
    const RadioParams& rp, const PowerModelParams& pm, int n_cycles,
    std::uint64_t master_seed, int jobs) {
  if (grid.empty())
    throw std::invalid_argument("generate_paired_databases: empty grid");

  Database ideal, erroneous;
  ideal.rows.resize(grid.size());
  erroneous.rows.resize(grid.size());

  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    const CopPoint& cop = grid[i];
    const std::uint64_t row_seed = derive_key(master_seed, "datagen.cop", i);
    try {
      const KpiSample ki =
          average_kpis(cop, scen, rp, pm, n_cycles, Flavor::ideal, row_seed);
      const KpiSample ke = average_kpis(cop, scen, rp, pm, n_cycles,
                                        Flavor::erroneous, row_seed);
      ideal.rows[i] = {cop, ki.ase, ki.ee, Flavor::ideal, n_cycles, row_seed};
      erroneous.rows[i] = {cop, ke.ase, ke.ee, Flavor::erroneous, n_cycles,
                           row_seed};
    } catch (const std::exception& e) {
      throw std::runtime_error(
          "simulation failed at cop (" + format_double(cop.lambda_dbs) + ", " +
          format_double(cop.r_sz) + ", " + format_double(cop.p_tx_dbm) +
          "): " + e.what());
    }
  });

  DatabaseMeta meta;
  meta.n_cycles = n_cycles;
  meta.master_seed = master_seed;
  meta.scenario = scen;
  meta.radio = rp;
  meta.power = pm;
  const int bins = static_cast<int>(std::lround(std::cbrt(
      static_cast<double>(grid.size()))));
  if (static_cast<std::size_t>(bins) * bins * bins == grid.size()) {
    meta.bins = bins;
    meta.bounds = {grid.front().lambda_dbs, grid.back().lambda_dbs,
                   grid.front().r_sz,       grid.back().r_sz,
                   grid.front().p_tx_dbm,   grid.back().p_tx_dbm};
  } else {
    meta.bins = 0;  // not a full grid; bounds stay at defaults
  }
  ideal.meta = meta;
  ideal.meta.flavor = Flavor::ideal;
  erroneous.meta = meta;
  erroneous.meta.flavor = Flavor::erroneous;
  return {std::move(ideal), std::move(erroneous)};
}

Database residualize(const Database& ideal, const Database& erroneous) {
  if (ideal.rows.size() != erroneous.rows.size())
    throw std::invalid_argument("residualize: row count mismatch");
  Database res;
  res.rows.resize(ideal.rows.size());
  for (std::size_t i = 0; i < ideal.rows.size(); ++i) {
    const DatasetRow& a = ideal.rows[i];
    const DatasetRow& b = erroneous.rows[i];
    if (!same_cop(a.cop, b.cop))
      throw std::invalid_argument("residualize: grid mismatch at row " +
                                  std::to_string(i));
    res.rows[i] = {a.cop, a.ase - b.ase, a.ee - b.ee, Flavor::residual,
                   a.n_cycles, a.seed};
  }
  res.meta = ideal.meta;
  res.meta.flavor = Flavor::residual;
  return res;
}

void persist_database(const Database& db, const std::string& path) {
  CsvWriter w({"lambda_dbs", "r_sz_m", "p_tx_dbm", "ase", "ee", "flavor",
               "n_cycles", "seed"});
  for (const auto& r : db.rows)
    w.add_row({format_double(r.cop.lambda_dbs), format_double(r.cop.r_sz),
               format_double(r.cop.p_tx_dbm), format_double(r.ase),
               format_double(r.ee), flavor_name(r.flavor),
               std::to_string(r.n_cycles), std::to_string(r.seed)});
  w.save(path);
  write_meta(db.meta, meta_path_for(path));
}

Database load_database(const std::string& path) {
  const CsvTable t = read_csv(path);
  const std::size_t c_lambda = t.column("lambda_dbs");
  const std::size_t c_rsz = t.column("r_sz_m");
  const std::size_t c_ptx = t.column("p_tx_dbm");
  const std::size_t c_ase = t.column("ase");
  const std::size_t c_ee = t.column("ee");
  const std::size_t c_flavor = t.column("flavor");
  const std::size_t c_cycles = t.column("n_cycles");
  const std::size_t c_seed = t.column("seed");

  Database db;
  db.meta = read_meta(meta_path_for(path));
  db.rows.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string ctx = path + " line " + std::to_string(i + 2);
    DatasetRow r;
    r.cop.lambda_dbs = parse_double(row[c_lambda], ctx + " column lambda_dbs");
    r.cop.r_sz = parse_double(row[c_rsz], ctx + " column r_sz_m");
    r.cop.p_tx_dbm = parse_double(row[c_ptx], ctx + " column p_tx_dbm");
    r.ase = parse_double(row[c_ase], ctx + " column ase");
    r.ee = parse_double(row[c_ee], ctx + " column ee");
    r.flavor = flavor_from_name(row[c_flavor]);
    r.n_cycles = static_cast<int>(
        parse_int_field(row[c_cycles], ctx + " column n_cycles"));
    r.seed = parse_uint_field(row[c_seed], ctx + " column seed");
    db.rows.push_back(r);
  }
  return db;
}

std::string meta_path_for(const std::string& csv_path) {
  const auto dot = csv_path.find_last_of('.');
  const auto slash = csv_path.find_last_of('/');
  if (dot == std::string::npos ||
      (slash != std::string::npos && dot < slash))
    return csv_path + ".meta";
  return csv_path.substr(0, dot) + ".meta";
}

}  // namespace ucn
