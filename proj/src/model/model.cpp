#include "wlsa/model.hpp"

#include <cmath>
#include <string>

#include "wlsa/errors.hpp"
#include "wlsa/ops.hpp"
#include "wlsa/random.hpp"

namespace wlsa::model {
namespace {

using grad::Graph;
using grad::Var;

// Parameter order; centers (or slot positions + times) come last.
enum Index : std::size_t {
  kEncW1,
  kEncB1,
  kEncW2,
  kEncB2,
  kTimeW1,
  kTimeB1,
  kTimeW2,
  kTimeB2,
  kGruWxz,
  kGruWhz,
  kGruBz,
  kGruWxr,
  kGruWhr,
  kGruBr,
  kGruWxh,
  kGruWhh,
  kGruBh,
  kLnGain,
  kLnBias,
  kResW,
  kResB,
  kCenters,
  kSlotTimes,
};

constexpr double kMassEps = 1e-6;
constexpr double kPairEps = 1e-12;

Tensor uniform(Rng& rng, Shape shape, double bound) {
  Tensor t(std::move(shape));
  for (double& v : t.storage()) v = rng.uniform(-bound, bound);
  return t;
}

void add_linear(std::vector<Parameter>& ps, Rng& rng, const std::string& name, std::size_t in, std::size_t out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  ps.push_back({name + ".w", uniform(rng, {in, out}, bound)});
  ps.push_back({name + ".b", uniform(rng, {out}, bound)});
}

// R[k, k / 3] = 1: copies each object row to its three level slots.
Tensor replicate_matrix() {
  Tensor r({kNumSlots, kNumObjects});
  for (std::size_t k = 0; k < kNumSlots; ++k) r.at(k, k / kNumLevels) = 1.0;
  return r;
}

Tensor aggregate_matrix() {
  Tensor g({kNumObjects, kNumSlots});
  for (std::size_t k = 0; k < kNumSlots; ++k) g.at(k / kNumLevels, k) = 1.0;
  return g;
}

// Rows are e_i − e_j for every unordered pair i < j of `n` items.
Tensor pair_difference_matrix(std::size_t n) {
  Tensor p({n * (n - 1) / 2, n});
  std::size_t row = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++row) {
      p.at(row, i) = 1.0;
      p.at(row, j) = -1.0;
    }
  }
  return p;
}

Tensor column(std::size_t n, double value) { return Tensor({n, 1}, value); }

struct Builder {
  Graph& g;
  const ModelConfig& c;
  const std::vector<Var>& p;
  Var replicate;
  Var aggregate;
  Var slot_times;  // constant K×1 for worldline modes

  Var mean_aggregate(Var attn, Var values) const {
    const Var mass = grad::add_scalar(grad::sum_axis(attn, 1), kMassEps);
    const Var inv = grad::div(g.constant(column(kNumSlots, 1.0)), mass);
    return grad::mul_col(grad::matmul(attn, values), inv);
  }

  Var slots_from(Var centers) const {
    switch (c.mode) {
      case Mode::kLorentzian:
      case Mode::kEuclideanWl:
        return grad::concat_cols(slot_times, grad::matmul(replicate, centers));
      case Mode::kHyperbolic: {
        const Var inv_norm = grad::div(g.constant(column(kNumObjects, 1.0)), grad::row_norms(centers, kPairEps));
        const Var theta = grad::mul_col(centers, inv_norm);
        Tensor radii({kNumSlots, 1});
        for (std::size_t k = 0; k < kNumSlots; ++k) radii[k] = c.ball_radii[k % kNumLevels];
        return grad::mul_col(grad::matmul(replicate, theta), g.constant(std::move(radii)));
      }
      case Mode::kEuclideanStd:
        return grad::concat_cols(p[kSlotTimes], centers);
    }
    throw ContractError("unknown mode");
  }

  Var update(Var centers, Var delta) const {
    const grad::GruWeights w{p[kGruWxz], p[kGruWhz], p[kGruBz], p[kGruWxr], p[kGruWhr],
                             p[kGruBr],  p[kGruWxh], p[kGruWhh], p[kGruBh]};
    const Var gru = grad::gru_cell(delta, centers, w);
    const Var residual = grad::linear(grad::layer_norm(centers, p[kLnGain], p[kLnBias]), p[kResW], p[kResB]);
    return grad::add(gru, grad::scale(residual, c.residual_scale));
  }
};

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kLorentzian:
      return "lorentzian";
    case Mode::kHyperbolic:
      return "hyperbolic";
    case Mode::kEuclideanWl:
      return "euclidean_wl";
    case Mode::kEuclideanStd:
      return "euclidean_std";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : kAllModes)
    if (to_string(m) == name) return m;
  throw ContractError("unknown mode '" + std::string(name) +
                      "' (expected lorentzian, hyperbolic, euclidean_wl or euclidean_std)");
}

void ModelConfig::validate() const {
  if (hidden_dim == 0 || encoder_hidden == 0 || time_hidden == 0 || iterations == 0 || k_neighbors == 0) {
    throw ContractError("model sizes must be positive");
  }
  for (std::size_t j = 1; j < level_times.size(); ++j) {
    if (!(level_times[j] > level_times[j - 1])) throw ContractError("level_times must be strictly increasing");
  }
  for (double r : ball_radii) {
    if (!(r > 0.0 && r < 1.0)) throw ContractError("ball radii must lie in (0, 1)");
  }
  if (!(tau_temp > 0.0)) throw ContractError("tau_temp must be positive");
  if (!(bonus_width > 0.0)) throw ContractError("bonus_width must be positive");
  cone.validate();
}

WorldlineModel::WorldlineModel(ModelConfig config, std::uint64_t init_seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(init_seed);
  const std::size_t d = config_.hidden_dim;
  add_linear(params_, rng, "encoder.l1", 2, config_.encoder_hidden);
  add_linear(params_, rng, "encoder.l2", config_.encoder_hidden, d);
  add_linear(params_, rng, "time_head.l1", d + 1, config_.time_hidden);
  add_linear(params_, rng, "time_head.l2", config_.time_hidden, 1);
  const double gru_bound = 1.0 / std::sqrt(static_cast<double>(d));
  for (const char* gate : {"z", "r", "h"}) {
    params_.push_back({std::string("gru.w_x") + gate, uniform(rng, {d, d}, gru_bound)});
    params_.push_back({std::string("gru.w_h") + gate, uniform(rng, {d, d}, gru_bound)});
    params_.push_back({std::string("gru.b_") + gate, uniform(rng, {d}, gru_bound)});
  }
  params_.push_back({"residual.ln_gain", Tensor({d}, 1.0)});
  params_.push_back({"residual.ln_bias", Tensor({d}, 0.0)});
  add_linear(params_, rng, "residual.l1", d, d);

  if (config_.mode == Mode::kEuclideanStd) {
    Tensor positions({kNumSlots, d});
    for (double& v : positions.storage()) v = config_.center_init_scale * rng.normal(0.0, 1.0);
    params_.push_back({"slots.position", std::move(positions)});
    Tensor times({kNumSlots, 1});
    for (std::size_t k = 0; k < kNumSlots; ++k) times[k] = config_.level_times[k % kNumLevels];
    params_.push_back({"slots.time", std::move(times)});
  } else {
    Tensor centers({kNumObjects, d});
    for (double& v : centers.storage()) v = config_.center_init_scale * rng.normal(0.0, 1.0);
    params_.push_back({"centers", std::move(centers)});
  }
}

std::size_t WorldlineModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

const Tensor& WorldlineModel::param(std::string_view name) const {
  for (const auto& p : params_)
    if (p.name == name) return p.value;
  throw ContractError("no parameter named '" + std::string(name) + "'");
}

Tensor& WorldlineModel::param(std::string_view name) {
  return const_cast<Tensor&>(static_cast<const WorldlineModel&>(*this).param(name));
}

SceneInput prepare_input(const scenes::Scene& scene, std::size_t k_neighbors) {
  const std::size_t n = scene.size();
  const auto density = geometry::knn_density(scene.points, k_neighbors);
  SceneInput in;
  in.points = Tensor({n, 2});
  in.density = Tensor({n, 1});
  for (std::size_t i = 0; i < n; ++i) {
    in.points.at(i, 0) = scene.points[i].x;
    in.points.at(i, 1) = scene.points[i].y;
    in.density[i] = density.normalized[i];
  }
  in.raw_density = density.raw;
  return in;
}

ForwardResult forward(Graph& g, const WorldlineModel& model, const SceneInput& input) {
  const ModelConfig& c = model.config();
  const std::size_t n = input.points.rows();
  if (n == 0 || input.density.size() != n) throw DimensionError("forward: empty scene or density size mismatch");

  ForwardResult out;
  for (const auto& p : model.parameters()) out.params.push_back(g.parameter(p.value));
  const auto& p = out.params;

  Tensor times({kNumSlots, 1});
  for (std::size_t k = 0; k < kNumSlots; ++k) times[k] = c.level_times[k % kNumLevels];
  const Builder b{g, c, p, g.constant(replicate_matrix()), g.constant(aggregate_matrix()),
                  g.constant(std::move(times))};

  // Encoding: spatial code z and density-driven time t.
  const Var x = g.constant(input.points);
  const Var rho = g.constant(input.density);
  const Var z = grad::linear(grad::relu(grad::linear(x, p[kEncW1], p[kEncB1])), p[kEncW2], p[kEncB2]);
  const Var head = grad::tanh(grad::linear(
      grad::relu(grad::linear(grad::concat_cols(z, rho), p[kTimeW1], p[kTimeB1])), p[kTimeW2], p[kTimeB2]));
  const Var t = grad::add_scalar(grad::add(grad::scale(rho, -c.time_density_scale), grad::scale(head, c.time_head_scale)),
                                 c.time_base);
  const Var events = grad::concat_cols(t, z);

  Var features = events;
  if (c.mode == Mode::kHyperbolic) {
    const Var norms = grad::row_norms(z);
    const Var unit = grad::mul_col(z, grad::div(g.constant(column(n, 1.0)), norms));
    Tensor target({n, 1});
    for (std::size_t i = 0; i < n; ++i) target[i] = 0.2 + 0.6 * (1.0 - input.density[i]);
    features = grad::mul_col(unit, grad::mul(grad::tanh(norms), g.constant(std::move(target))));
  }
  out.features = features;

  Tensor horizons({kNumSlots, n});
  for (std::size_t k = 0; k < kNumSlots; ++k)
    for (std::size_t i = 0; i < n; ++i)
      horizons.at(k, i) = geometry::adaptive_horizon(k % kNumLevels, input.density[i], c.cone);

  Var centers = p[kCenters];
  Var slots = b.slots_from(centers);
  for (std::size_t it = 0; it < c.iterations; ++it) {
    Var logits;
    switch (c.mode) {
      case Mode::kLorentzian:
        logits = grad::lorentz_logits(features, slots, horizons, {c.cone, c.lambda_cone, c.tau_temp}, c.kernel_route);
        break;
      case Mode::kEuclideanWl:
      case Mode::kEuclideanStd:
        logits = grad::euclid_logits(features, slots, {c.cone.eps, c.tau_temp}, c.kernel_route);
        break;
      case Mode::kHyperbolic: {
        std::vector<double> radius(kNumSlots);
        for (std::size_t k = 0; k < kNumSlots; ++k) radius[k] = c.ball_radii[k % kNumLevels];
        logits = grad::poincare_logits(features, slots, std::move(radius), {c.lambda_cone, c.tau_temp, c.bonus_width},
                                       c.kernel_route);
        break;
      }
    }
    const Var attn = grad::softmax(logits, 0);
    out.attention.push_back(attn);

    // Per-slot attention-weighted mean of the spatial codes; worldlines sum
    // their three levels before the shared GRU update.
    const Var per_slot = b.mean_aggregate(attn, z);
    const Var delta = c.mode == Mode::kEuclideanStd ? per_slot : grad::matmul(b.aggregate, per_slot);
    centers = b.update(centers, delta);
    slots = b.slots_from(centers);
  }
  out.centers = centers;
  out.slots = slots;

  const Var attn = out.attention.back();
  Var target = features;
  Var recon_slots = slots;
  if (c.reconstruct_spatial_only && c.mode != Mode::kHyperbolic) {
    target = z;
    recon_slots = grad::slice_cols(slots, 1, 1 + c.hidden_dim);
  }
  out.reconstruction = grad::mean(grad::square(grad::sub(target, grad::matmul(grad::transpose(attn), recon_slots))));

  const std::size_t rows = centers.value().rows();
  const Var diffs = grad::matmul(g.constant(pair_difference_matrix(rows)), centers);
  const Var dist = grad::sqrt(grad::sum_axis(grad::square(diffs), 1), kPairEps);
  out.diversity = grad::sum(grad::relu(grad::add_scalar(grad::neg(dist), c.diversity_margin)));
  out.loss = grad::add(out.reconstruction, grad::scale(out.diversity, c.diversity_weight));
  return out;
}

Tensor infer_attention(const WorldlineModel& model, const SceneInput& input) {
  Graph g;
  return forward(g, model, input).final_attention();
}

}  // namespace wlsa::model
