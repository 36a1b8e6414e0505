#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wlsa/metrics.hpp"
#include "wlsa/training.hpp"

namespace wlsa::experiment {

using Overrides = std::map<std::string, std::string>;

/// Reads `key = value` lines; blank lines and `#` comments are skipped.
/// Throws ContractError on a line without '='.
Overrides parse_config(std::istream& in);
Overrides load_config_file(const std::filesystem::path& path);

/// Applies overrides by hyperparameter name (learning_rate, batch_size,
/// epochs, grad_clip, tau_temp, k_neighbors, hidden_dim, iterations,
/// level_times, base_horizons, horizon_scale, lambda_cone, ...). Throws
/// ContractError for unknown keys or unparsable values.
void apply_overrides(training::TrainConfig& config, const Overrides& overrides);

/// Names accepted by apply_overrides, for help output.
std::vector<std::string> override_keys();

struct ExperimentSpec {
  std::vector<scenes::DatasetTag> datasets{scenes::DatasetTag::kToy};
  std::vector<model::Mode> modes{model::kAllModes.begin(), model::kAllModes.end()};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::optional<std::size_t> epochs;  // overrides the config default when set
  std::optional<std::filesystem::path> clevr_path;
  /// Synthesized CLEVR-like records used when no annotation file is given (0 = skip clevr).
  std::size_t clevr_synthetic_records = 0;
  std::size_t jobs = 1;
  metrics::LevelMapping level_mapping = metrics::LevelMapping::kMod;
  Overrides overrides;

  /// Throws ContractError on empty datasets, modes or seeds.
  void validate() const;
};

struct MatrixResult {
  std::vector<metrics::RunResult> runs;  // sorted by dataset, mode, seed
  std::vector<std::string> warnings;
  bool any_aborted() const;
};

/// Base training config for one cell of the matrix, with spec overrides applied.
training::TrainConfig cell_config(const ExperimentSpec& spec, scenes::DatasetTag dataset, model::Mode mode,
                                  std::uint64_t seed,
                                  std::shared_ptr<const std::vector<scenes::ClevrSceneRecord>> pool);

/// Runs every (dataset, mode, seed) cell. Progress goes to `log`.
MatrixResult run_matrix(const ExperimentSpec& spec, std::ostream& log);

struct CellSummary {
  scenes::DatasetTag dataset{};
  model::Mode mode{};
  std::size_t runs = 0;
  double ari_mean = 0.0, ari_std = 0.0;
  double level_mean = 0.0, level_std = 0.0;
  double recon_mean = 0.0;
  /// Level accuracy of this cell vs the lorentzian cell of the same dataset.
  std::optional<metrics::WelchResult> vs_lorentzian;
};

std::vector<CellSummary> summarize(std::span<const metrics::RunResult> runs);

void write_results_csv(std::ostream& out, std::span<const metrics::RunResult> runs);
void write_curves_csv(std::ostream& out, std::span<const metrics::RunResult> runs);
void write_summary_csv(std::ostream& out, std::span<const CellSummary> cells);
/// Aligned plain-text table.
void write_summary_text(std::ostream& out, std::span<const CellSummary> cells);

// ---------------------------------------------------------------- sweep

struct SweepValue {
  std::string label;
  double level_mean = 0.0;
};

struct SweepKnob {
  std::string name;
  std::vector<SweepValue> values;
  double spread = 0.0;  // max − min of level_mean
  std::string criterion;
  bool pass = false;
};

struct SweepReport {
  std::vector<SweepKnob> knobs;
};

/// Toy, lorentzian: varies cone penalties, base horizons, λ and level times
/// one at a time around the defaults.
SweepReport sensitivity_sweep(const ExperimentSpec& spec, std::ostream& log);
void write_sweep_csv(std::ostream& out, const SweepReport& report);

// ---------------------------------------------------------------- plots

/// Level accuracy vs epoch, one series per mode (mean over seeds) for one
/// dataset. Returns false and writes nothing when there are no curves.
bool write_curves_svg(const std::filesystem::path& path, std::span<const metrics::RunResult> runs,
                      scenes::DatasetTag dataset);
/// Grouped bars of mean level accuracy and object ARI per cell.
bool write_summary_svg(const std::filesystem::path& path, std::span<const CellSummary> cells);

}  // namespace wlsa::experiment
