#include "ucn/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ucn/config.hpp"
#include "ucn/csvio.hpp"
#include "ucn/datagen.hpp"
#include "ucn/kv.hpp"
#include "ucn/pipeline.hpp"

namespace ucn {

namespace fs = std::filesystem;

namespace {

ExperimentConfig load_cfg(const std::string& config_path) {
  if (config_path.empty()) return default_config();
  return load_config(config_path);
}

std::string resolve_out(const std::string& flag_value,
                        const std::string& fallback) {
  if (const char* env = std::getenv("UCNOPT_OUT"); env && *env) return env;
  return flag_value.empty() ? fallback : flag_value;
}

CopPoint parse_cop(const std::string& s) {
  std::vector<double> v;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) v.push_back(parse_double(item, "--cop"));
  if (v.size() != 3)
    throw std::runtime_error(
        "--cop expects 'lambda_dbs,r_sz_m,p_tx_dbm', got '" + s + "'");
  return {v[0], v[1], v[2]};
}

int do_optimize(const ExperimentConfig& cfg_in, const std::string& models_dir,
                const std::string& algo, const std::string& scheme,
                double alpha, int trial, const std::string& out_dir) {
  ExperimentConfig cfg = cfg_in;
  const TrainedModels tm = load_trained_models(models_dir);
  ObjectiveSpec spec;
  spec.theta_max = tm.theta_max;
  spec.eta_max = tm.eta_max;
  const TrialRecord rec = run_trial(
      cfg, tm.bundle(), algo, scheme, alpha, trial,
      trial_seed_for(cfg.master_seed, algo, alpha, trial), spec);
  if (rec.failed) throw std::runtime_error(rec.error);

  fs::create_directories(out_dir);
  {
    CsvWriter w({"algorithm", "scheme", "alpha_se", "trial", "trial_seed",
                 "best_lambda_dbs", "best_r_sz_m", "best_p_tx_dbm",
                 "reported_objective", "validated_objective",
                 "validated_ase_norm", "validated_ee_norm",
                 "iterations_to_converge", "total_iterations"});
    w.add_row({rec.algorithm, rec.scheme, format_double(rec.alpha_se),
               std::to_string(rec.trial_index), std::to_string(rec.trial_seed),
               format_double(rec.opt.best_cop.lambda_dbs),
               format_double(rec.opt.best_cop.r_sz),
               format_double(rec.opt.best_cop.p_tx_dbm),
               format_double(rec.reported_objective),
               format_double(rec.validated_objective),
               format_double(rec.validated_ase_norm),
               format_double(rec.validated_ee_norm),
               std::to_string(rec.opt.iterations_to_converge),
               std::to_string(rec.opt.trace.size() - 1)});
    w.save((fs::path(out_dir) / "result.csv").string());
  }
  {
    CsvWriter w({"iter", "best_value"});
    for (std::size_t i = 0; i < rec.opt.trace.size(); ++i)
      w.add_row({std::to_string(i), format_double(rec.opt.trace[i])});
    w.save((fs::path(out_dir) / "trace.csv").string());
  }
  write_manifest(out_dir, "optimize", cfg, {}, {"result.csv", "trace.csv"});
  std::cout << "best_cop=" << format_double(rec.opt.best_cop.lambda_dbs) << ","
            << format_double(rec.opt.best_cop.r_sz) << ","
            << format_double(rec.opt.best_cop.p_tx_dbm)
            << " reported=" << format_double(rec.reported_objective)
            << " validated=" << format_double(rec.validated_objective)
            << " iterations=" << rec.opt.iterations_to_converge << "\n";
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"user-centric network COP optimization pipeline"};
  app.require_subcommand(1);

  std::string config_path, out_dir, data_dir, models_dir, in_dir, cop_str;
  std::string algo = "ga", scheme = "ddoec";
  double alpha = 0.5;
  int trial = 0;
  int jobs = -1;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path,
                    "config file (flat key = value); omit for defaults");
  };

  CLI::App* gen = app.add_subcommand("gen-data",
                                     "simulate the COP grid and write the "
                                     "ideal/erroneous/residual databases");
  add_config(gen);
  gen->add_option("--out", out_dir, "output directory");
  gen->add_option("--jobs", jobs, "worker threads (0 = hardware)");

  CLI::App* train = app.add_subcommand(
      "train", "fit Model-E/Model-R (and ideal-trained) surrogates");
  add_config(train);
  train->add_option("--data", data_dir, "directory with gen-data output")
      ->required();
  train->add_option("--out", out_dir, "output directory");

  CLI::App* opt = app.add_subcommand(
      "optimize", "run one optimization on trained surrogates");
  add_config(opt);
  opt->add_option("--models", models_dir, "directory with train output")
      ->required();
  opt->add_option("--algo", algo, "sa | ga")
      ->check(CLI::IsMember({"sa", "ga"}));
  opt->add_option("--scheme", scheme, "baseline | ddoec | oracle")
      ->check(CLI::IsMember({"baseline", "ddoec", "oracle"}));
  opt->add_option("--alpha", alpha, "ASE weight in [0,1]");
  opt->add_option("--trial", trial, "trial index (seeds the run)");
  opt->add_option("--out", out_dir, "output directory");

  CLI::App* val = app.add_subcommand(
      "validate", "evaluate a COP on the ideal-position simulator");
  add_config(val);
  val->add_option("--models", models_dir,
                  "directory with train output (for the normalizers)")
      ->required();
  val->add_option("--cop", cop_str, "lambda_dbs,r_sz_m,p_tx_dbm")->required();
  val->add_option("--alpha", alpha, "ASE weight in [0,1]");
  val->add_option("--out", out_dir, "optional output directory");

  CLI::App* exp = app.add_subcommand(
      "experiment", "full pipeline: gen-data, train, optimize, validate, report");
  add_config(exp);
  exp->add_option("--out", out_dir, "output directory");
  exp->add_option("--jobs", jobs, "worker threads (0 = hardware)");

  CLI::App* rep = app.add_subcommand(
      "report", "re-render summary/plots from an experiment directory");
  rep->add_option("--in", in_dir, "experiment directory")->required();
  rep->add_option("--out", out_dir, "output directory");

  std::vector<const char*> argv;
  argv.push_back("ucnopt");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    const ExperimentConfig base_cfg = load_cfg(config_path);
    ExperimentConfig cfg = base_cfg;
    if (jobs >= 0) cfg.jobs = jobs;
    if (gen->parsed()) {
      stage_gen_data(cfg, resolve_out(out_dir, "ucnopt_out/data"));
      return 0;
    }
    if (train->parsed()) {
      stage_train(cfg, data_dir, resolve_out(out_dir, "ucnopt_out/models"));
      return 0;
    }
    if (opt->parsed()) {
      if (alpha < 0.0 || alpha > 1.0)
        throw std::runtime_error("--alpha must be in [0,1]");
      return do_optimize(cfg, models_dir, algo, scheme, alpha, trial,
                         resolve_out(out_dir, "ucnopt_out/optimize"));
    }
    if (val->parsed()) {
      if (alpha < 0.0 || alpha > 1.0)
        throw std::runtime_error("--alpha must be in [0,1]");
      const TrainedModels tm = load_trained_models(models_dir);
      ObjectiveSpec spec;
      spec.alpha_se = alpha;
      spec.theta_max = tm.theta_max;
      spec.eta_max = tm.eta_max;
      const CopPoint cop = parse_cop(cop_str);
      const ValidationResult v =
          validate_on_simulator(cop, cfg, spec, validation_seed(cfg));
      std::cout << "objective=" << format_double(v.objective)
                << " ase_norm=" << format_double(v.ase_norm)
                << " ee_norm=" << format_double(v.ee_norm) << "\n";
      if (!out_dir.empty() || std::getenv("UCNOPT_OUT")) {
        const std::string dir = resolve_out(out_dir, "ucnopt_out/validate");
        fs::create_directories(dir);
        CsvWriter w({"lambda_dbs", "r_sz_m", "p_tx_dbm", "alpha_se",
                     "objective", "ase_norm", "ee_norm"});
        w.add_row({format_double(cop.lambda_dbs), format_double(cop.r_sz),
                   format_double(cop.p_tx_dbm), format_double(alpha),
                   format_double(v.objective), format_double(v.ase_norm),
                   format_double(v.ee_norm)});
        w.save((fs::path(dir) / "validation.csv").string());
        write_manifest(dir, "validate", cfg, {}, {"validation.csv"});
      }
      return 0;
    }
    if (exp->parsed()) {
      run_experiment(cfg, resolve_out(out_dir, "ucnopt_out"));
      return 0;
    }
    if (rep->parsed()) {
      const auto records = load_records(in_dir);
      emit_report(records, resolve_out(out_dir, in_dir));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace ucn
