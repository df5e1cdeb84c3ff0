#pragma once

// End-to-end experiment orchestration: database generation, model training,
// baseline vs DD-OEC optimization, simulator validation, and reports.
//
// Output tree of `run_experiment` (and of the equivalent staged commands):
//   out/
//     manifest.json          run manifest (config snapshot, seeds, digests)
//     data/                  ideal/erroneous/residual databases
//     models/                model files, cv_report.csv, normalizers.kv
//     records.csv            one row per trial (scalar fields)
//     timings.csv            wall-clock per trial (not reproducible)
//     summary.csv            one row per (algorithm, weight case)
//     iterations.csv         convergence-iteration distribution
//     traces/                per-cell best-so-far traces, one column/trial
//     plots/                 SVG convergence and iteration plots
// Everything except timings.csv and the manifest's created timestamp is
// byte-reproducible from (config, master_seed).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ucn/config.hpp"
#include "ucn/datagen.hpp"
#include "ucn/optimizer.hpp"
#include "ucn/surrogate.hpp"

namespace ucn {

struct ValidationResult {
  double objective = 0.0;
  double ase_norm = 0.0;  // ase / theta_max
  double ee_norm = 0.0;   // ee / eta_max
};

// Ideal-flavor simulation at one COP under the shared normalizers; the seed
// should be the validation seed, distinct from training seeds.
ValidationResult validate_on_simulator(const CopPoint& cop,
                                       const ExperimentConfig& cfg,
                                       const ObjectiveSpec& spec,
                                       std::uint64_t seed);

std::uint64_t validation_seed(const ExperimentConfig& cfg);

struct TrialRecord {
  std::string algorithm;  // sa | ga
  std::string scheme;     // baseline | ddoec
  double alpha_se = 0.5;
  int trial_index = 0;
  std::uint64_t trial_seed = 0;
  OptResult opt;
  double reported_objective = 0.0;  // best surrogate objective
  double validated_objective = 0.0;
  double validated_ase_norm = 0.0;
  double validated_ee_norm = 0.0;
  double wall_time_s = 0.0;
  bool failed = false;
  std::string error;
};

// Seed shared by the baseline and ddoec runs of one (algorithm, alpha,
// trial) slot so scheme comparisons are paired.
std::uint64_t trial_seed_for(std::uint64_t master_seed,
                             const std::string& algorithm, double alpha_se,
                             int trial);

TrialRecord run_trial(const ExperimentConfig& cfg, const ModelBundle& models,
                      const std::string& algorithm, const std::string& scheme,
                      double alpha_se, int trial_index,
                      std::uint64_t trial_seed, const ObjectiveSpec& base_spec);

// All model artifacts of one training pass, owning storage for ModelBundle.
struct TrainedModels {
  KpiModels kpi;          // Model-E / Model-R pairs
  TargetModels oracle;    // same structure, fitted to the ideal database
  double theta_max = 0.0; // ASE normalizer from the ideal database
  double eta_max = 0.0;   // EE normalizer from the ideal database

  ModelBundle bundle() const;
};

// Pipeline stages. Each writes its artifacts plus a manifest under dir.
struct StagePaths {
  std::string ideal_csv, erroneous_csv, residual_csv;
};
StagePaths stage_gen_data(const ExperimentConfig& cfg, const std::string& dir);
TrainedModels stage_train(const ExperimentConfig& cfg,
                          const std::string& data_dir, const std::string& dir);
TrainedModels load_trained_models(const std::string& models_dir);

struct ExperimentOutput {
  std::vector<TrialRecord> records;
};

// Full cross-product {algorithms x schemes x weight cases x trials}; writes
// the complete output tree under out_dir.
ExperimentOutput run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir);

// Renders records.csv / iterations.csv / summary.csv / traces / plots from
// trial records; idempotent for the same records.
void emit_report(const std::vector<TrialRecord>& records,
                 const std::string& out_dir);

// Reads records + traces back from an experiment directory (for the
// `report` command); wall times and manifests are not needed or restored.
std::vector<TrialRecord> load_records(const std::string& experiment_dir);

// Run manifest: config snapshot, seed, tool version, file digests. The
// created timestamp is the single non-reproducible field.
void write_manifest(const std::string& dir, const std::string& command,
                    const ExperimentConfig& cfg,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs);

}  // namespace ucn
