#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wlsa/model.hpp"
#include "wlsa/scenes.hpp"
#include "wlsa/tensor.hpp"

namespace wlsa::metrics {

/// How a slot index maps to a hierarchy level. kMod (level = k % 3) matches
/// the worldline slot layout; kDiv (level = k / 3) is the alternative reading.
/// The object is always the other factor.
enum class LevelMapping { kMod, kDiv };

std::string_view to_string(LevelMapping m);
LevelMapping parse_level_mapping(std::string_view name);

struct Assignment {
  std::vector<int> object;
  std::vector<int> level;
};

/// Hard per-point assignment from K×N attention: argmax over slots, ties to
/// the lowest slot index.
Assignment assign(const Tensor& attention, LevelMapping mapping = LevelMapping::kMod);

/// Pair-counting adjusted Rand index. Labels are arbitrary ints. Throws
/// DimensionError on a length mismatch and ContractError for fewer than 2 points.
double adjusted_rand_index(std::span<const int> pred, std::span<const int> truth);

/// Fraction of points with truth ≥ 0 whose predicted level matches exactly.
/// No relabelling is attempted.
double level_accuracy(std::span<const int> pred, std::span<const int> truth);

struct SceneScore {
  double object_ari = 0.0;
  double level_acc = 0.0;
};

/// Scores one scene, ignoring noise points in both metrics.
SceneScore score_scene(const Tensor& attention, const scenes::Scene& scene,
                       LevelMapping mapping = LevelMapping::kMod);

struct HungarianResult {
  std::vector<std::size_t> assignment;  // row i → column assignment[i]
  double cost = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix. Throws ContractError
/// on non-square or non-finite input.
HungarianResult hungarian(const std::vector<std::vector<double>>& cost);

/// Accuracy after the best one-to-one relabelling of predicted clusters onto
/// true ones (noise in truth ignored).
double matched_accuracy(std::span<const int> pred, std::span<const int> truth);

// ---------------------------------------------------------------- statistics

double mean(std::span<const double> v);
/// Sample standard deviation (n − 1); 0 for fewer than 2 values.
double sample_std(std::span<const double> v);

struct WelchResult {
  double mean_a = 0.0, mean_b = 0.0;
  double std_a = 0.0, std_b = 0.0;
  double t = 0.0;
  double dof = 0.0;
  double p_two_sided = 1.0;
  /// Difference of means over the pooled standard deviation.
  double cohens_d = 0.0;
  /// Difference of means over group a's standard deviation.
  double cohens_d_group_a = 0.0;
  double ci95_low = 0.0, ci95_high = 0.0;  // for mean_a
  /// Both groups have zero variance; t and d are ±inf (or 0 for equal means).
  bool degenerate = false;
};

/// Welch two-sample t-test with Welch–Satterthwaite degrees of freedom.
/// Throws ContractError when either group has fewer than 2 values.
WelchResult welch_stats(std::span<const double> a, std::span<const double> b);

/// p-values below 1e-12 print as "<1e-12".
std::string format_p(double p);

// ---------------------------------------------------------------- run records

struct EvalPoint {
  std::size_t epoch = 0;
  double object_ari = 0.0;
  double level_acc = 0.0;
  double loss = 0.0;
  double reconstruction = 0.0;
};

struct RunResult {
  std::uint64_t seed = 0;
  scenes::DatasetTag dataset = scenes::DatasetTag::kToy;
  model::Mode mode = model::Mode::kLorentzian;
  double object_ari = 0.0;
  double level_acc = 0.0;
  double final_loss = 0.0;
  double final_reconstruction = 0.0;
  std::vector<double> loss_curve;  // mean training loss per epoch
  std::vector<EvalPoint> evals;
  std::size_t clip_events = 0;
  std::size_t clip_events_first10 = 0;
  std::size_t parameter_count = 0;
  bool aborted = false;
  std::string abort_reason;
};

}  // namespace wlsa::metrics
