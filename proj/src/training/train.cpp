#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <random>

#include "wlsa/errors.hpp"
#include "wlsa/graph.hpp"
#include "wlsa/random.hpp"
#include "wlsa/training.hpp"

namespace wlsa::training {
namespace {

// Independent seed streams of one run.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kEvalStream = 2;
constexpr std::uint64_t kShuffleStream = 3;
constexpr std::uint64_t kBuildStream = 4;

void write_abort_checkpoint(const TrainConfig& config, const model::WorldlineModel& model) {
  if (!config.abort_checkpoint) return;
  std::ofstream out(*config.abort_checkpoint);
  if (out) model::save_checkpoint(out, model);
}

}  // namespace

std::size_t default_batch_size(scenes::DatasetTag tag) { return tag == scenes::DatasetTag::kClevr ? 64 : 16; }

std::size_t TrainConfig::resolved_batch_size() const {
  return batch_size != 0 ? batch_size : default_batch_size(dataset);
}

std::size_t TrainConfig::resolved_steps_per_epoch() const {
  if (steps_per_epoch != 0) return steps_per_epoch;
  if (dataset == scenes::DatasetTag::kClevr) return std::max<std::size_t>(1, clevr_epoch_scenes / resolved_batch_size());
  return 1;
}

void TrainConfig::validate() const {
  model.validate();
  if (epochs == 0 || eval_every == 0 || eval_scenes == 0) throw ContractError("epochs, eval_every and eval_scenes must be positive");
  if (!(adam.lr > 0.0) || !(grad_clip > 0.0)) throw ContractError("learning rate and grad clip must be positive");
  if (dataset == scenes::DatasetTag::kClevr) {
    if (!clevr_pool || clevr_pool->size() <= eval_scenes) {
      throw ContractError("clevr runs need a record pool larger than eval_scenes");
    }
  }
}

SceneSource::SceneSource(const TrainConfig& config) : config_(config) {
  const std::uint64_t eval_base = derive_seed(config.seed, kEvalStream);
  if (config.dataset == scenes::DatasetTag::kClevr) {
    const auto& pool = *config.clevr_pool;
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(config.seed, kShuffleStream));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < config.eval_scenes; ++i) {
      eval_.push_back(scenes::clevr_to_scene(pool[order[i]], derive_seed(eval_base, i)));
    }
    train_records_.assign(order.begin() + static_cast<std::ptrdiff_t>(config.eval_scenes), order.end());
  } else {
    for (std::size_t i = 0; i < config.eval_scenes; ++i) {
      eval_.push_back(scenes::generate_synthetic(config.dataset, derive_seed(eval_base, i)));
    }
  }
}

std::vector<scenes::Scene> SceneSource::batch(std::size_t epoch, std::size_t step, std::size_t size) {
  const std::uint64_t epoch_base = derive_seed(derive_seed(config_.seed, kTrainStream), epoch);
  std::vector<scenes::Scene> out;
  out.reserve(size);
  if (config_.dataset != scenes::DatasetTag::kClevr) {
    for (std::size_t i = 0; i < size; ++i) {
      out.push_back(scenes::generate_synthetic(config_.dataset, derive_seed(epoch_base, step * size + i)));
    }
    return out;
  }
  if (order_epoch_ != epoch) {
    epoch_order_ = train_records_;
    std::mt19937_64 rng(derive_seed(derive_seed(config_.seed, kShuffleStream), epoch + 1));
    std::shuffle(epoch_order_.begin(), epoch_order_.end(), rng);
    const std::size_t keep = std::min(epoch_order_.size(), config_.clevr_epoch_scenes);
    epoch_order_.resize(keep);
    order_epoch_ = epoch;
  }
  const auto& pool = *config_.clevr_pool;
  const std::uint64_t build_base = derive_seed(epoch_base, kBuildStream);
  for (std::size_t i = 0; i < size; ++i) {
    // Wraps around when the subset is shorter than steps × batch.
    const std::size_t slot = (step * size + i) % epoch_order_.size();
    out.push_back(scenes::clevr_to_scene(pool[epoch_order_[slot]], derive_seed(build_base, step * size + i)));
  }
  return out;
}

BatchGradient batch_gradient(const model::WorldlineModel& model, std::span<const scenes::Scene> batch, bool parallel) {
  const std::size_t n = batch.size();
  if (n == 0) throw ContractError("batch_gradient: empty batch");
  const std::size_t k = model.config().k_neighbors;
  std::vector<std::vector<Tensor>> grads(n);
  std::vector<double> losses(n), recons(n);
  std::vector<std::exception_ptr> errors(n);

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::size_t s = 0; s < n; ++s) {
    try {
      grad::Graph g;
      const auto input = model::prepare_input(batch[s], k);
      const auto fwd = model::forward(g, model, input);
      g.backward(fwd.loss);
      losses[s] = fwd.loss.value().item();
      recons[s] = fwd.reconstruction.value().item();
      grads[s].reserve(fwd.params.size());
      for (const auto& p : fwd.params) grads[s].push_back(p.grad());
    } catch (...) {
      errors[s] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  BatchGradient out;
  const double inv = 1.0 / static_cast<double>(n);
  out.grads = grads[0];
  for (std::size_t s = 1; s < n; ++s)
    for (std::size_t p = 0; p < out.grads.size(); ++p)
      for (std::size_t j = 0; j < out.grads[p].size(); ++j) out.grads[p][j] += grads[s][p][j];
  for (auto& g : out.grads)
    for (double& v : g.data()) v *= inv;
  for (std::size_t s = 0; s < n; ++s) {
    out.loss += losses[s];
    out.reconstruction += recons[s];
  }
  out.loss *= inv;
  out.reconstruction *= inv;
  return out;
}

EvalSummary evaluate(const model::WorldlineModel& model, std::span<const scenes::Scene> scenes,
                     metrics::LevelMapping mapping, bool parallel) {
  const std::size_t n = scenes.size();
  if (n == 0) throw ContractError("evaluate: no scenes");
  std::vector<EvalSummary> per(n);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::size_t s = 0; s < n; ++s) {
    try {
      grad::Graph g;
      const auto input = model::prepare_input(scenes[s], model.config().k_neighbors);
      const auto fwd = model::forward(g, model, input);
      const auto score = metrics::score_scene(fwd.final_attention(), scenes[s], mapping);
      per[s] = {score.object_ari, score.level_acc, fwd.loss.value().item(), fwd.reconstruction.value().item()};
    } catch (...) {
      errors[s] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  EvalSummary out;
  for (const auto& p : per) {
    out.object_ari += p.object_ari;
    out.level_acc += p.level_acc;
    out.loss += p.loss;
    out.reconstruction += p.reconstruction;
  }
  const double inv = 1.0 / static_cast<double>(n);
  out.object_ari *= inv;
  out.level_acc *= inv;
  out.loss *= inv;
  out.reconstruction *= inv;
  return out;
}

metrics::RunResult train_run(const TrainConfig& config, model::WorldlineModel* trained) {
  config.validate();
  model::WorldlineModel model(config.model, derive_seed(config.seed, kInitStream));
  Adam adam(model.parameters(), config.adam);
  SceneSource source(config);

  metrics::RunResult result;
  result.seed = config.seed;
  result.dataset = config.dataset;
  result.mode = config.model.mode;
  result.parameter_count = model.parameter_count();

  const std::size_t batch = config.resolved_batch_size();
  const std::size_t steps = config.resolved_steps_per_epoch();
  auto record_eval = [&](std::size_t epoch) {
    const EvalSummary e = evaluate(model, source.eval_set(), config.level_mapping, config.parallel_batch);
    const metrics::EvalPoint point{epoch, e.object_ari, e.level_acc, e.loss, e.reconstruction};
    result.evals.push_back(point);
    if (config.on_eval) config.on_eval(point);
    return point;
  };

  try {
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      double epoch_loss = 0.0;
      for (std::size_t step = 0; step < steps; ++step) {
        const auto scenes = source.batch(epoch, step, batch);
        BatchGradient bg = batch_gradient(model, scenes, config.parallel_batch);
        if (!std::isfinite(bg.loss)) throw NumericalError("non-finite loss at epoch " + std::to_string(epoch + 1));
        const ClipResult clip = clip_global_norm(bg.grads, config.grad_clip);
        if (clip.clipped) {
          ++result.clip_events;
          if (epoch < 10) ++result.clip_events_first10;
        }
        adam.step(model.parameters(), bg.grads);
        epoch_loss += bg.loss;
      }
      result.loss_curve.push_back(epoch_loss / static_cast<double>(steps));
      const std::size_t done = epoch + 1;
      if (done % config.eval_every == 0 || done == config.epochs) record_eval(done);
    }
  } catch (const NumericalError& e) {
    result.aborted = true;
    result.abort_reason = e.what();
    write_abort_checkpoint(config, model);
  }

  if (!result.evals.empty()) {
    const auto& last = result.evals.back();
    result.object_ari = last.object_ari;
    result.level_acc = last.level_acc;
    result.final_loss = last.loss;
    result.final_reconstruction = last.reconstruction;
  }
  if (trained) *trained = std::move(model);
  return result;
}

}  // namespace wlsa::training
