#include "ucn/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "ucn/csvio.hpp"
#include "ucn/digest.hpp"
#include "ucn/kv.hpp"
#include "ucn/parallel.hpp"

namespace ucn {

namespace fs = std::filesystem;

namespace {

bool in_bounds(const CopPoint& cop, const Bounds& b) {
  return cop.lambda_dbs >= b.lambda_min && cop.lambda_dbs <= b.lambda_max &&
         cop.r_sz >= b.r_sz_min && cop.r_sz <= b.r_sz_max &&
         cop.p_tx_dbm >= b.p_tx_min && cop.p_tx_dbm <= b.p_tx_max;
}

FitnessKind kind_from_scheme(const std::string& scheme) {
  if (scheme == "baseline") return FitnessKind::baseline;
  if (scheme == "ddoec") return FitnessKind::ddoec;
  if (scheme == "oracle") return FitnessKind::oracle;
  throw std::invalid_argument("unknown scheme: '" + scheme + "'");
}

void save_cv_report(const CvReport reports[4], const CvReport oracle[2],
                    int k, const std::string& path) {
  std::vector<std::string> header = {"model", "candidate", "chosen",
                                     "mean_rmse", "std_rmse"};
  for (int f = 0; f < k; ++f) header.push_back("fold_" + std::to_string(f));
  CsvWriter w(header);
  const char* names[6] = {"model_e_ase", "model_e_ee", "model_r_ase",
                          "model_r_ee", "model_o_ase", "model_o_ee"};
  auto add = [&](const char* name, const CvReport& r) {
    for (const auto& c : r.candidates) {
      std::vector<std::string> row = {name, c.id,
                                      c.id == r.chosen ? "1" : "0",
                                      format_double(c.mean_rmse),
                                      format_double(c.std_rmse)};
      for (double v : c.fold_rmse) row.push_back(format_double(v));
      w.add_row(std::move(row));
    }
  };
  for (int i = 0; i < 4; ++i) add(names[i], reports[i]);
  for (int i = 0; i < 2; ++i) add(names[4 + i], oracle[i]);
  w.save(path);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::uint64_t validation_seed(const ExperimentConfig& cfg) {
  return derive_key(cfg.master_seed, "validate");
}

ValidationResult validate_on_simulator(const CopPoint& cop,
                                       const ExperimentConfig& cfg,
                                       const ObjectiveSpec& spec,
                                       std::uint64_t seed) {
  if (!in_bounds(cop, cfg.bounds))
    throw std::invalid_argument("validate_on_simulator: cop out of bounds");
  const KpiSample k = average_kpis(cop, cfg.scenario, cfg.radio, cfg.power,
                                   cfg.n_cycles, Flavor::ideal, seed);
  ValidationResult v;
  v.ase_norm = std::max(k.ase, 0.0) / spec.theta_max;
  v.ee_norm = std::max(k.ee, 0.0) / spec.eta_max;
  v.objective = objective_value(k.ase, k.ee, spec);
  return v;
}

std::uint64_t trial_seed_for(std::uint64_t master_seed,
                             const std::string& algorithm, double alpha_se,
                             int trial) {
  // The scheme is deliberately absent so baseline/ddoec pairs share seeds.
  const std::uint64_t algo_idx = algorithm == "sa" ? 0 : 1;
  return derive_key(master_seed, "trial", algo_idx,
                    std::bit_cast<std::uint64_t>(alpha_se),
                    static_cast<std::uint64_t>(trial));
}

ModelBundle TrainedModels::bundle() const {
  ModelBundle b;
  b.ase_e = &kpi.ase_e;
  b.ee_e = &kpi.ee_e;
  b.ase_r = &kpi.ase_r;
  b.ee_r = &kpi.ee_r;
  b.ase_oracle = &oracle.ase;
  b.ee_oracle = &oracle.ee;
  return b;
}

TrialRecord run_trial(const ExperimentConfig& cfg, const ModelBundle& models,
                      const std::string& algorithm, const std::string& scheme,
                      double alpha_se, int trial_index,
                      std::uint64_t trial_seed,
                      const ObjectiveSpec& base_spec) {
  TrialRecord rec;
  rec.algorithm = algorithm;
  rec.scheme = scheme;
  rec.alpha_se = alpha_se;
  rec.trial_index = trial_index;
  rec.trial_seed = trial_seed;

  const auto start = std::chrono::steady_clock::now();
  try {
    ObjectiveSpec spec = base_spec;
    spec.alpha_se = alpha_se;
    const Fitness fitness =
        make_fitness(kind_from_scheme(scheme), models, spec);
    RngStream rng(trial_seed);
    if (algorithm == "sa")
      rec.opt = sa_optimize(fitness, cfg.bounds, cfg.sa, rng);
    else if (algorithm == "ga")
      rec.opt = ga_optimize(fitness, cfg.bounds, cfg.ga, rng);
    else
      throw std::invalid_argument("unknown algorithm: '" + algorithm + "'");
    rec.reported_objective = rec.opt.best_value;

    const ValidationResult v = validate_on_simulator(
        rec.opt.best_cop, cfg, spec, validation_seed(cfg));
    rec.validated_objective = v.objective;
    rec.validated_ase_norm = v.ase_norm;
    rec.validated_ee_norm = v.ee_norm;
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = std::string(e.what()) + " [" + algorithm + "/" + scheme +
                "/alpha=" + format_double(alpha_se) +
                "/trial=" + std::to_string(trial_index) + "]";
  }
  rec.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return rec;
}

StagePaths stage_gen_data(const ExperimentConfig& cfg,
                          const std::string& dir) {
  fs::create_directories(dir);
  const auto grid = cop_grid(cfg.bounds, cfg.bins);
  auto [ideal, erroneous] = generate_paired_databases(
      grid, cfg.scenario, cfg.radio, cfg.power, cfg.n_cycles, cfg.master_seed,
      cfg.jobs);
  ideal.meta.bins = cfg.bins;
  ideal.meta.bounds = cfg.bounds;
  erroneous.meta.bins = cfg.bins;
  erroneous.meta.bounds = cfg.bounds;
  const Database residual = residualize(ideal, erroneous);

  StagePaths p;
  p.ideal_csv = (fs::path(dir) / "ideal.csv").string();
  p.erroneous_csv = (fs::path(dir) / "erroneous.csv").string();
  p.residual_csv = (fs::path(dir) / "residual.csv").string();
  persist_database(ideal, p.ideal_csv);
  persist_database(erroneous, p.erroneous_csv);
  persist_database(residual, p.residual_csv);
  write_manifest(dir, "gen-data", cfg, {},
                 {"ideal.csv", "ideal.meta", "erroneous.csv", "erroneous.meta",
                  "residual.csv", "residual.meta"});
  return p;
}

TrainedModels stage_train(const ExperimentConfig& cfg,
                          const std::string& data_dir,
                          const std::string& dir) {
  const std::string ideal_csv = (fs::path(data_dir) / "ideal.csv").string();
  const std::string err_csv = (fs::path(data_dir) / "erroneous.csv").string();
  const std::string res_csv = (fs::path(data_dir) / "residual.csv").string();
  const Database ideal = load_database(ideal_csv);
  const Database erroneous = load_database(err_csv);
  const Database residual = load_database(res_csv);

  const auto menu = default_menu();
  TrainedModels tm;
  tm.kpi = train_kpi_models(erroneous, residual, cfg.kfold_k, menu,
                            cfg.master_seed);
  tm.oracle = train_target_models(ideal, "model_e", cfg.kfold_k, menu,
                                  cfg.master_seed);
  for (const auto& r : ideal.rows) {
    tm.theta_max = std::max(tm.theta_max, r.ase);
    tm.eta_max = std::max(tm.eta_max, r.ee);
  }
  if (!(tm.theta_max > 0.0) || !(tm.eta_max > 0.0))
    throw std::runtime_error(
        "stage_train: ideal database has no positive KPI values; "
        "normalizers undefined");

  fs::create_directories(dir);
  const fs::path d(dir);
  save_model(tm.kpi.ase_e, (d / "model_e_ase.json").string());
  save_model(tm.kpi.ee_e, (d / "model_e_ee.json").string());
  save_model(tm.kpi.ase_r, (d / "model_r_ase.json").string());
  save_model(tm.kpi.ee_r, (d / "model_r_ee.json").string());
  save_model(tm.oracle.ase, (d / "model_o_ase.json").string());
  save_model(tm.oracle.ee, (d / "model_o_ee.json").string());

  KvFile norm;
  norm.set_int("schema_version", 1);
  norm.set_double("theta_max", tm.theta_max);
  norm.set_double("eta_max", tm.eta_max);
  norm.save((d / "normalizers.kv").string());

  const CvReport oracle_reports[2] = {tm.oracle.ase_report,
                                      tm.oracle.ee_report};
  save_cv_report(tm.kpi.reports, oracle_reports, cfg.kfold_k,
                 (d / "cv_report.csv").string());
  write_manifest(dir, "train", cfg,
                 {ideal_csv, err_csv, res_csv},
                 {"model_e_ase.json", "model_e_ee.json", "model_r_ase.json",
                  "model_r_ee.json", "model_o_ase.json", "model_o_ee.json",
                  "normalizers.kv", "cv_report.csv"});
  return tm;
}

TrainedModels load_trained_models(const std::string& models_dir) {
  const fs::path d(models_dir);
  const std::string hint =
      "; run `ucnopt train` first to produce model files";
  auto need = [&](const char* name) {
    const std::string p = (d / name).string();
    if (!fs::exists(p))
      throw std::runtime_error("missing model file " + p + hint);
    return p;
  };
  TrainedModels tm;
  tm.kpi.ase_e = load_model(need("model_e_ase.json"), "model_e", "ase");
  tm.kpi.ee_e = load_model(need("model_e_ee.json"), "model_e", "ee");
  tm.kpi.ase_r = load_model(need("model_r_ase.json"), "model_r", "ase");
  tm.kpi.ee_r = load_model(need("model_r_ee.json"), "model_r", "ee");
  tm.oracle.ase = load_model(need("model_o_ase.json"), "model_e", "ase");
  tm.oracle.ee = load_model(need("model_o_ee.json"), "model_e", "ee");
  const std::string norm_path = (d / "normalizers.kv").string();
  if (!fs::exists(norm_path))
    throw std::runtime_error("missing " + norm_path + hint);
  const KvFile norm = KvFile::load(norm_path);
  tm.theta_max = norm.get_double("theta_max");
  tm.eta_max = norm.get_double("eta_max");
  return tm;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  stage_gen_data(cfg, (out / "data").string());
  const TrainedModels tm =
      stage_train(cfg, (out / "data").string(), (out / "models").string());
  const ModelBundle bundle = tm.bundle();

  ObjectiveSpec base_spec;
  base_spec.theta_max = tm.theta_max;
  base_spec.eta_max = tm.eta_max;

  struct Slot {
    std::string algorithm, scheme;
    double alpha;
    int trial;
  };
  std::vector<Slot> slots;
  for (const auto& algo : cfg.algorithms)
    for (const auto& scheme : cfg.schemes)
      for (double alpha : cfg.weight_cases)
        for (int t = 0; t < cfg.trials; ++t)
          slots.push_back({algo, scheme, alpha, t});

  ExperimentOutput outp;
  outp.records.resize(slots.size());
  parallel_for(slots.size(), cfg.jobs, [&](std::size_t i) {
    const Slot& s = slots[i];
    outp.records[i] = run_trial(
        cfg, bundle, s.algorithm, s.scheme, s.alpha, s.trial,
        trial_seed_for(cfg.master_seed, s.algorithm, s.alpha, s.trial),
        base_spec);
  });

  emit_report(outp.records, out_dir);

  {
    CsvWriter w({"algorithm", "scheme", "alpha_se", "trial", "wall_time_s"});
    for (const auto& r : outp.records)
      w.add_row({r.algorithm, r.scheme, format_double(r.alpha_se),
                 std::to_string(r.trial_index), format_double(r.wall_time_s)});
    w.save((out / "timings.csv").string());
  }

  std::vector<std::string> outputs = {"records.csv", "summary.csv",
                                      "iterations.csv"};
  write_manifest(out_dir, "experiment", cfg, {}, outputs);
  return outp;
}

void write_manifest(const std::string& dir, const std::string& command,
                    const ExperimentConfig& cfg,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["tool"] = "ucnopt";
  j["version"] = "0.1.0";
  j["command"] = command;
  j["created_utc"] = utc_now();
  j["master_seed"] = cfg.master_seed;

  nlohmann::json conf = nlohmann::json::object();
  std::istringstream lines(config_to_text(cfg));
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    conf[line.substr(0, eq)] = line.substr(eq + 3);
  }
  j["config"] = std::move(conf);

  nlohmann::json in = nlohmann::json::object();
  for (const auto& p : inputs) {
    // keys are relative to the manifest so reruns rooted elsewhere match
    std::error_code ec;
    const fs::path rel =
        fs::relative(fs::absolute(p), fs::absolute(dir), ec);
    in[ec || rel.empty() ? p : rel.string()] = file_digest(p);
  }
  j["inputs"] = std::move(in);

  nlohmann::json outj = nlohmann::json::object();
  for (const auto& name : outputs)
    outj[name] = file_digest((fs::path(dir) / name).string());
  j["outputs"] = std::move(outj);

  std::ofstream f(fs::path(dir) / "manifest.json", std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write manifest in " + dir);
  f << j.dump(1, '\t') << "\n";
}

}  // namespace ucn
