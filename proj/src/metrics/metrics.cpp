#include "wlsa/metrics.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "wlsa/errors.hpp"

namespace wlsa::metrics {

std::string_view to_string(LevelMapping m) { return m == LevelMapping::kMod ? "mod" : "div"; }

LevelMapping parse_level_mapping(std::string_view name) {
  if (name == "mod") return LevelMapping::kMod;
  if (name == "div") return LevelMapping::kDiv;
  throw ContractError("unknown level mapping '" + std::string(name) + "' (expected mod or div)");
}

Assignment assign(const Tensor& attention, LevelMapping mapping) {
  if (attention.rank() != 2 || attention.rows() != model::kNumSlots) {
    throw DimensionError("assign: attention must be " + std::to_string(model::kNumSlots) + "xN, got " +
                         shape_string(attention.shape()));
  }
  const std::size_t k_slots = attention.rows(), n = attention.cols();
  Assignment out;
  out.object.resize(n);
  out.level.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < k_slots; ++k)
      if (attention.at(k, i) > attention.at(best, i)) best = k;
    const int major = static_cast<int>(best / model::kNumLevels);
    const int minor = static_cast<int>(best % model::kNumLevels);
    out.object[i] = mapping == LevelMapping::kMod ? major : minor;
    out.level[i] = mapping == LevelMapping::kMod ? minor : major;
  }
  return out;
}

namespace {
double choose2(double n) { return n * (n - 1.0) / 2.0; }
}  // namespace

double adjusted_rand_index(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw DimensionError("adjusted_rand_index: label lengths differ");
  if (pred.size() < 2) throw ContractError("adjusted_rand_index: need at least 2 points");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    joint[{pred[i], truth[i]}] += 1.0;
    rows[pred[i]] += 1.0;
    cols[truth[i]] += 1.0;
  }
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [_, c] : joint) index += choose2(c);
  for (const auto& [_, c] : rows) sum_a += choose2(c);
  for (const auto& [_, c] : cols) sum_b += choose2(c);
  const double expected = sum_a * sum_b / choose2(static_cast<double>(pred.size()));
  const double max_index = 0.5 * (sum_a + sum_b);
  // Both partitions trivial in the same way (all one cluster, or all singletons).
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double level_accuracy(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw DimensionError("level_accuracy: label lengths differ");
  std::size_t total = 0, hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (truth[i] < 0) continue;
    ++total;
    if (pred[i] == truth[i]) ++hit;
  }
  if (total == 0) throw ContractError("level_accuracy: no labeled points");
  return static_cast<double>(hit) / static_cast<double>(total);
}

SceneScore score_scene(const Tensor& attention, const scenes::Scene& scene, LevelMapping mapping) {
  if (attention.cols() != scene.size()) throw DimensionError("score_scene: attention does not match the scene");
  const Assignment a = assign(attention, mapping);
  std::vector<int> pred_obj, true_obj;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    if (scene.object_id[i] < 0) continue;
    pred_obj.push_back(a.object[i]);
    true_obj.push_back(scene.object_id[i]);
  }
  return {adjusted_rand_index(pred_obj, true_obj), level_accuracy(a.level, scene.level_id)};
}

double matched_accuracy(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw DimensionError("matched_accuracy: label lengths differ");
  std::map<int, std::size_t> p_index, t_index;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (truth[i] < 0) continue;
    p_index.emplace(pred[i], p_index.size());
    t_index.emplace(truth[i], t_index.size());
  }
  if (t_index.empty()) throw ContractError("matched_accuracy: no labeled points");
  const std::size_t n = std::max(p_index.size(), t_index.size());
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  std::size_t total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (truth[i] < 0) continue;
    cost[p_index.at(pred[i])][t_index.at(truth[i])] -= 1.0;
    ++total;
  }
  return -hungarian(cost).cost / static_cast<double>(total);
}

}  // namespace wlsa::metrics
