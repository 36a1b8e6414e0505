#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wlsa/attention_ops.hpp"
#include "wlsa/geometry.hpp"
#include "wlsa/graph.hpp"
#include "wlsa/scenes.hpp"
#include "wlsa/tensor.hpp"

namespace wlsa::model {

enum class Mode { kLorentzian, kHyperbolic, kEuclideanWl, kEuclideanStd };

std::string_view to_string(Mode mode);
/// Accepts lorentzian, hyperbolic, euclidean_wl, euclidean_std.
Mode parse_mode(std::string_view name);
inline constexpr std::array<Mode, 4> kAllModes{Mode::kLorentzian, Mode::kHyperbolic, Mode::kEuclideanWl,
                                               Mode::kEuclideanStd};

inline constexpr std::size_t kNumObjects = 3;
inline constexpr std::size_t kNumLevels = 3;
inline constexpr std::size_t kNumSlots = kNumObjects * kNumLevels;

/// Slot k belongs to object k / 3 at level k % 3.
constexpr std::size_t slot_index(std::size_t object, std::size_t level) { return object * kNumLevels + level; }

struct ModelConfig {
  Mode mode = Mode::kLorentzian;
  std::size_t hidden_dim = 32;
  std::size_t encoder_hidden = 64;
  std::size_t time_hidden = 16;
  std::size_t iterations = 3;
  std::size_t k_neighbors = 5;
  std::array<double, 3> level_times{1.0, 2.5, 4.0};
  geometry::ConeParams cone;
  double lambda_cone = 0.5;
  double tau_temp = 0.1;
  // t = time_base − time_density_scale·ρ + time_head_scale·tanh(head)
  double time_base = 5.0;
  double time_density_scale = 1.5;
  double time_head_scale = 0.5;
  double residual_scale = 0.2;
  double diversity_weight = 0.3;
  double diversity_margin = 2.0;
  double center_init_scale = 0.5;
  std::array<double, 3> ball_radii{0.2, 0.5, 0.8};
  double bonus_width = 0.6;
  /// Reconstruct only the spatial part of each feature instead of the full event.
  bool reconstruct_spatial_only = false;
  grad::KernelRoute kernel_route = grad::KernelRoute::kAuto;

  /// Throws ContractError on non-increasing level times, bad radii or zero sizes.
  void validate() const;
};

struct Parameter {
  std::string name;
  Tensor value;
};

/// Learnable state of one model. Parameters are stored flat, in a fixed
/// order that forward() relies on.
class WorldlineModel {
 public:
  WorldlineModel(ModelConfig config, std::uint64_t init_seed);

  const ModelConfig& config() const noexcept { return config_; }
  Mode mode() const noexcept { return config_.mode; }

  std::span<Parameter> parameters() noexcept { return params_; }
  std::span<const Parameter> parameters() const noexcept { return params_; }
  std::size_t parameter_count() const;

  /// Throws ContractError for unknown names.
  const Tensor& param(std::string_view name) const;
  Tensor& param(std::string_view name);

 private:
  ModelConfig config_;
  std::vector<Parameter> params_;
};

/// Per-scene model input: N×2 points and the N×1 normalised k-NN density.
struct SceneInput {
  Tensor points;
  Tensor density;
  std::vector<double> raw_density;
};

/// Throws ContractError when the scene has ≤ k points.
SceneInput prepare_input(const scenes::Scene& scene, std::size_t k_neighbors);

struct ForwardResult {
  std::vector<grad::Var> params;  // bound parameters, same order as the model
  grad::Var loss;
  grad::Var reconstruction;
  grad::Var diversity;
  grad::Var features;   // N×33 events (hyperbolic: N×32 ball points)
  grad::Var slots;      // K×D after the last update
  grad::Var centers;    // final μ (3×32), or 9×32 slot positions for euclidean_std
  std::vector<grad::Var> attention;  // K×N per iteration; the last one is the model's answer
  const Tensor& final_attention() const { return attention.back().value(); }
};

/// Builds the full forward pass and loss for one scene on `graph`.
ForwardResult forward(grad::Graph& graph, const WorldlineModel& model, const SceneInput& input);

/// Forward pass without keeping the graph; returns the final K×N attention.
Tensor infer_attention(const WorldlineModel& model, const SceneInput& input);

/// Checkpoint container: header "WLSA-v1", mode, then one block per parameter
/// with name, shape and values printed round-trip exactly.
void save_checkpoint(std::ostream& out, const WorldlineModel& model);
/// Overwrites the parameters of `model`; throws IngestionError on a header,
/// name, shape or mode mismatch.
void load_checkpoint(std::istream& in, WorldlineModel& model);

}  // namespace wlsa::model
