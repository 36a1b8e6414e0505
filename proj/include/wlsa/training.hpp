#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "wlsa/metrics.hpp"
#include "wlsa/model.hpp"
#include "wlsa/scenes.hpp"

namespace wlsa::training {

struct AdamConfig {
  double lr = 0.003;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over a fixed list of parameter tensors.
class Adam {
 public:
  Adam(std::span<const model::Parameter> params, AdamConfig config);

  /// Applies one update. Throws NumericalError naming the first parameter
  /// whose gradient is not finite; parameters are left untouched in that case.
  void step(std::span<model::Parameter> params, std::span<const Tensor> grads);

  std::size_t steps() const noexcept { return steps_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  AdamConfig config_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::size_t steps_ = 0;
};

double global_norm(std::span<const Tensor> grads);

struct ClipResult {
  double norm_before = 0.0;
  bool clipped = false;
};

/// Scales all gradients by max_norm / norm when the global ℓ2 norm exceeds max_norm.
ClipResult clip_global_norm(std::span<Tensor> grads, double max_norm);

std::size_t default_batch_size(scenes::DatasetTag tag);

struct TrainConfig {
  model::ModelConfig model;
  scenes::DatasetTag dataset = scenes::DatasetTag::kToy;
  std::uint64_t seed = 0;
  AdamConfig adam;
  std::size_t epochs = 300;
  /// 0 selects the dataset default (16 for toy/sprites, 64 for clevr).
  std::size_t batch_size = 0;
  /// Optimizer steps per epoch; 0 selects the dataset default (1 for the
  /// synthetic datasets, subset/batch for clevr).
  std::size_t steps_per_epoch = 0;
  double grad_clip = 1.0;
  std::size_t eval_every = 10;
  std::size_t eval_scenes = 32;
  metrics::LevelMapping level_mapping = metrics::LevelMapping::kMod;
  /// Filtered CLEVR records; required when dataset is clevr.
  std::shared_ptr<const std::vector<scenes::ClevrSceneRecord>> clevr_pool;
  /// Scenes drawn (without replacement) from the pool per epoch.
  std::size_t clevr_epoch_scenes = 64 * 20;
  /// Where the last finite parameters are written if the run aborts.
  std::optional<std::filesystem::path> abort_checkpoint;
  /// Build per-scene graphs in an OpenMP loop over the batch.
  bool parallel_batch = true;
  /// Called after every evaluation (progress reporting).
  std::function<void(const metrics::EvalPoint&)> on_eval;

  std::size_t resolved_batch_size() const;
  std::size_t resolved_steps_per_epoch() const;
  /// Throws ContractError on zero sizes, non-positive rates or a missing CLEVR pool.
  void validate() const;
};

/// Draws training and evaluation scenes for one run. Synthetic datasets
/// generate fresh scenes from seed-derived streams; CLEVR reserves
/// `eval_scenes` records for evaluation and shuffles the rest each epoch.
class SceneSource {
 public:
  explicit SceneSource(const TrainConfig& config);

  /// Scenes for batch `step` of `epoch` (epochs count from 0).
  std::vector<scenes::Scene> batch(std::size_t epoch, std::size_t step, std::size_t size);
  const std::vector<scenes::Scene>& eval_set() const noexcept { return eval_; }

 private:
  const TrainConfig& config_;
  std::vector<scenes::Scene> eval_;
  std::vector<std::size_t> train_records_;
  std::vector<std::size_t> epoch_order_;
  std::size_t order_epoch_ = static_cast<std::size_t>(-1);
};

struct BatchGradient {
  std::vector<Tensor> grads;  // mean over scenes, parameter order
  double loss = 0.0;
  double reconstruction = 0.0;
};

/// Mean loss and gradient over a batch. Per-scene work may run in parallel;
/// the reduction is always in scene order, so results do not depend on the
/// thread count.
BatchGradient batch_gradient(const model::WorldlineModel& model, std::span<const scenes::Scene> batch,
                             bool parallel);

struct EvalSummary {
  double object_ari = 0.0;
  double level_acc = 0.0;
  double loss = 0.0;
  double reconstruction = 0.0;
};

EvalSummary evaluate(const model::WorldlineModel& model, std::span<const scenes::Scene> scenes,
                     metrics::LevelMapping mapping, bool parallel);

/// Full training run. Never throws for numerical failure: a non-finite loss
/// or gradient marks the result aborted (and writes the last finite
/// parameters to abort_checkpoint when set).
metrics::RunResult train_run(const TrainConfig& config, model::WorldlineModel* trained = nullptr);

}  // namespace wlsa::training
