#include <fstream>
#include <functional>
#include <sstream>

#include "wlsa/errors.hpp"
#include "wlsa/experiment.hpp"

namespace wlsa::experiment {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ContractError("config: '" + key + "' expects a number, got '" + v + "'");
}

std::size_t to_size(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d < 0.0 || d != static_cast<double>(static_cast<std::size_t>(d))) {
    throw ContractError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return static_cast<std::size_t>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ContractError("config: '" + key + "' expects true or false, got '" + v + "'");
}

std::array<double, 3> to_triple(const std::string& key, std::string v) {
  for (char& c : v)
    if (c == '[' || c == ']') c = ' ';
  std::array<double, 3> out{};
  std::istringstream in(v);
  std::string item;
  std::size_t i = 0;
  while (std::getline(in, item, ',')) {
    if (i == 3) break;
    out[i++] = to_double(key, trim(item));
  }
  if (i != 3 || std::getline(in, item)) throw ContractError("config: '" + key + "' expects three comma-separated values");
  return out;
}

using Setter = std::function<void(training::TrainConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  using C = training::TrainConfig;
  static const std::map<std::string, Setter> table = {
      {"num_objects",
       [](C&, const std::string& k, const std::string& v) {
         if (to_size(k, v) != model::kNumObjects) throw ContractError("config: num_objects is fixed at 3");
       }},
      {"num_levels",
       [](C&, const std::string& k, const std::string& v) {
         if (to_size(k, v) != model::kNumLevels) throw ContractError("config: num_levels is fixed at 3");
       }},
      {"hidden_dim", [](C& c, const std::string& k, const std::string& v) { c.model.hidden_dim = to_size(k, v); }},
      {"iterations", [](C& c, const std::string& k, const std::string& v) { c.model.iterations = to_size(k, v); }},
      {"level_times", [](C& c, const std::string& k, const std::string& v) { c.model.level_times = to_triple(k, v); }},
      {"base_horizons",
       [](C& c, const std::string& k, const std::string& v) { c.model.cone.base_horizons = to_triple(k, v); }},
      {"horizon_scale",
       [](C& c, const std::string& k, const std::string& v) { c.model.cone.horizon_scale = to_double(k, v); }},
      {"lambda_cone", [](C& c, const std::string& k, const std::string& v) { c.model.lambda_cone = to_double(k, v); }},
      {"past_penalty",
       [](C& c, const std::string& k, const std::string& v) { c.model.cone.past_penalty = to_double(k, v); }},
      {"spacelike_penalty",
       [](C& c, const std::string& k, const std::string& v) { c.model.cone.spacelike_penalty = to_double(k, v); }},
      {"learning_rate", [](C& c, const std::string& k, const std::string& v) { c.adam.lr = to_double(k, v); }},
      {"adam_beta1", [](C& c, const std::string& k, const std::string& v) { c.adam.beta1 = to_double(k, v); }},
      {"adam_beta2", [](C& c, const std::string& k, const std::string& v) { c.adam.beta2 = to_double(k, v); }},
      {"adam_eps", [](C& c, const std::string& k, const std::string& v) { c.adam.eps = to_double(k, v); }},
      {"batch_size", [](C& c, const std::string& k, const std::string& v) { c.batch_size = to_size(k, v); }},
      {"epochs", [](C& c, const std::string& k, const std::string& v) { c.epochs = to_size(k, v); }},
      {"steps_per_epoch", [](C& c, const std::string& k, const std::string& v) { c.steps_per_epoch = to_size(k, v); }},
      {"grad_clip", [](C& c, const std::string& k, const std::string& v) { c.grad_clip = to_double(k, v); }},
      {"tau_temp", [](C& c, const std::string& k, const std::string& v) { c.model.tau_temp = to_double(k, v); }},
      {"k_neighbors", [](C& c, const std::string& k, const std::string& v) { c.model.k_neighbors = to_size(k, v); }},
      {"eval_every", [](C& c, const std::string& k, const std::string& v) { c.eval_every = to_size(k, v); }},
      {"eval_scenes", [](C& c, const std::string& k, const std::string& v) { c.eval_scenes = to_size(k, v); }},
      {"clevr_epoch_scenes",
       [](C& c, const std::string& k, const std::string& v) { c.clevr_epoch_scenes = to_size(k, v); }},
      {"diversity_weight",
       [](C& c, const std::string& k, const std::string& v) { c.model.diversity_weight = to_double(k, v); }},
      {"diversity_margin",
       [](C& c, const std::string& k, const std::string& v) { c.model.diversity_margin = to_double(k, v); }},
      {"residual_scale",
       [](C& c, const std::string& k, const std::string& v) { c.model.residual_scale = to_double(k, v); }},
      {"center_init_scale",
       [](C& c, const std::string& k, const std::string& v) { c.model.center_init_scale = to_double(k, v); }},
      {"reconstruct_spatial_only",
       [](C& c, const std::string& k, const std::string& v) { c.model.reconstruct_spatial_only = to_bool(k, v); }},
  };
  return table;
}

}  // namespace

Overrides parse_config(std::istream& in) {
  Overrides out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ContractError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

Overrides load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open config file '" + path.string() + "'");
  return parse_config(in);
}

void apply_overrides(training::TrainConfig& config, const Overrides& overrides) {
  const auto& table = setters();
  for (const auto& [key, value] : overrides) {
    const auto it = table.find(key);
    if (it == table.end()) throw ContractError("config: unknown key '" + key + "'");
    it->second(config, key, value);
  }
}

std::vector<std::string> override_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

}  // namespace wlsa::experiment
