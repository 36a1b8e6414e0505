#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wlsa/errors.hpp"
#include "wlsa/experiment.hpp"
#include "wlsa/random.hpp"

namespace fs = std::filesystem;
using namespace wlsa;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

// "1,2,3" or "1-5" (inclusive), or a mix of both.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& part : split(text, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(std::stoull(part));
    } else {
      const auto lo = std::stoull(part.substr(0, dash)), hi = std::stoull(part.substr(dash + 1));
      if (hi < lo) throw ContractError("bad seed range '" + part + "'");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    }
  }
  if (seeds.empty()) throw ContractError("no seeds given");
  return seeds;
}

struct CommonOptions {
  std::string datasets = "toy";
  std::string modes = "lorentzian,hyperbolic,euclidean_wl,euclidean_std";
  std::string seeds;  // empty: 1-10 when clevr is selected, else 1-5
  std::size_t epochs = 0;
  std::string clevr_path;
  std::size_t clevr_synthetic = 0;
  std::string out = "results";
  std::size_t jobs = 1;
  std::string level_mapping = "mod";
  std::string config_file;
  std::vector<std::string> sets;
};

experiment::ExperimentSpec make_spec(const CommonOptions& o) {
  experiment::ExperimentSpec spec;
  spec.datasets.clear();
  for (const auto& d : split(o.datasets, ',')) spec.datasets.push_back(scenes::parse_dataset(d));
  spec.modes.clear();
  for (const auto& m : split(o.modes, ',')) spec.modes.push_back(model::parse_mode(m));
  const bool has_clevr = std::find(spec.datasets.begin(), spec.datasets.end(), scenes::DatasetTag::kClevr) !=
                         spec.datasets.end();
  spec.seeds = parse_seeds(!o.seeds.empty() ? o.seeds : has_clevr ? "1-10" : "1-5");
  if (o.epochs > 0) spec.epochs = o.epochs;
  if (!o.clevr_path.empty()) spec.clevr_path = o.clevr_path;
  spec.clevr_synthetic_records = o.clevr_synthetic;
  spec.jobs = o.jobs;
  spec.level_mapping = metrics::parse_level_mapping(o.level_mapping);
  if (!o.config_file.empty()) spec.overrides = experiment::load_config_file(o.config_file);
  std::string joined;
  for (const auto& s : o.sets) joined += s + "\n";
  std::istringstream in(joined);
  for (const auto& [k, v] : experiment::parse_config(in)) spec.overrides[k] = v;
  // Fail early on unknown keys.
  training::TrainConfig probe;
  experiment::apply_overrides(probe, spec.overrides);
  return spec;
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--dataset", o.datasets, "Comma-separated datasets: toy, sprites, clevr")->capture_default_str();
  cmd->add_option("--mode", o.modes, "Comma-separated modes")->capture_default_str();
  cmd->add_option("--seeds", o.seeds, "Seeds, e.g. 1-5 or 1,3,7 (default 1-5; 1-10 with clevr)");
  cmd->add_option("--epochs", o.epochs, "Training epochs (default 300)");
  cmd->add_option("--clevr-path", o.clevr_path, "CLEVR scenes JSON (e.g. CLEVR_train_scenes.json)");
  cmd->add_option("--clevr-synthetic", o.clevr_synthetic,
                  "Use N synthesized CLEVR-like records when no --clevr-path is given");
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--jobs", o.jobs, "Concurrent runs")->capture_default_str();
  cmd->add_option("--level-mapping", o.level_mapping, "Slot-to-level mapping: mod or div")
      ->check(CLI::IsMember({"mod", "div"}))
      ->capture_default_str();
  cmd->add_option("--config", o.config_file, "key = value hyperparameter file");
  cmd->add_option("--set", o.sets, "Single key=value override (repeatable)");
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw IngestionError("cannot write '" + p.string() + "'");
  return out;
}

int cmd_run(const CommonOptions& o) {
  const auto spec = make_spec(o);
  fs::create_directories(o.out);
  const auto result = experiment::run_matrix(spec, std::cerr);
  const fs::path dir(o.out);
  {
    auto f = open_out(dir / "results.csv");
    experiment::write_results_csv(f, result.runs);
  }
  {
    auto f = open_out(dir / "curves.csv");
    experiment::write_curves_csv(f, result.runs);
  }
  const auto cells = experiment::summarize(result.runs);
  {
    auto f = open_out(dir / "summary.csv");
    experiment::write_summary_csv(f, cells);
  }
  {
    auto f = open_out(dir / "summary.txt");
    experiment::write_summary_text(f, cells);
  }
  experiment::write_summary_text(std::cout, cells);
  for (auto d : spec.datasets) {
    const auto svg = dir / ("curves_" + std::string(scenes::to_string(d)) + ".svg");
    if (!experiment::write_curves_svg(svg, result.runs, d)) {
      std::cerr << "warning: no curves for " << scenes::to_string(d) << ", " << svg.string() << " not written\n";
    }
  }
  if (!experiment::write_summary_svg(dir / "summary.svg", cells)) std::cerr << "warning: empty summary, no bar chart\n";
  if (result.any_aborted()) {
    std::cerr << "error: at least one run aborted on a non-finite loss or gradient\n";
    return 2;
  }
  return 0;
}

int cmd_sweep(const CommonOptions& o) {
  const auto spec = make_spec(o);
  fs::create_directories(o.out);
  const auto report = experiment::sensitivity_sweep(spec, std::cerr);
  auto f = open_out(fs::path(o.out) / "sweep.csv");
  experiment::write_sweep_csv(f, report);
  for (const auto& k : report.knobs) {
    std::cout << k.name << ": spread " << k.spread << " (" << k.criterion << ") " << (k.pass ? "PASS" : "FAIL") << '\n';
  }
  return 0;
}

std::vector<scenes::ClevrSceneRecord> clevr_records(const std::string& path, std::size_t synthetic, std::uint64_t seed) {
  if (!path.empty()) return scenes::ingest_clevr(path);
  if (synthetic == 0) {
    throw IngestionError("no CLEVR data: pass --clevr-path (annotations at " + std::string(scenes::kClevrDownloadUrl) +
                         ") or --clevr-synthetic N");
  }
  return scenes::synthesize_clevr_records(seed, synthetic);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worldline slot attention: training, ablations and dataset tools"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "Train the dataset x mode x seed matrix and write results");
  add_common(run, run_opts);

  CommonOptions sweep_opts;
  sweep_opts.seeds = "1-3";
  sweep_opts.out = "sweep";
  auto* sweep = app.add_subcommand("sweep", "Hyperparameter sensitivity grid on toy (lorentzian)");
  add_common(sweep, sweep_opts);

  std::string density_path, density_out = "density.csv";
  std::size_t density_scenes = 200, density_synth = 0, density_k = 5;
  std::uint64_t density_seed = 1;
  auto* density = app.add_subcommand("density", "Per-level k-NN density report on CLEVR-derived scenes");
  density->add_option("--clevr-path", density_path, "CLEVR scenes JSON");
  density->add_option("--clevr-synthetic", density_synth, "Synthesized records when no path is given");
  density->add_option("--scenes", density_scenes, "Scenes to build")->capture_default_str();
  density->add_option("--k", density_k, "Neighbors")->capture_default_str();
  density->add_option("--seed", density_seed, "Construction seed")->capture_default_str();
  density->add_option("--out", density_out, "Output CSV")->capture_default_str();

  std::string gen_dataset = "toy", gen_out, gen_clevr;
  std::uint64_t gen_seed = 1;
  auto* generate = app.add_subcommand("generate", "Write one scene as x,y,object_id,level_id CSV");
  generate->add_option("--dataset", gen_dataset, "toy, sprites or clevr")->capture_default_str();
  generate->add_option("--seed", gen_seed, "Scene seed")->capture_default_str();
  generate->add_option("--clevr-path", gen_clevr, "CLEVR scenes JSON (clevr only; synthesized if absent)");
  generate->add_option("--out", gen_out, "Output file (stdout when omitted)");

  auto* params = app.add_subcommand("params", "Print trainable parameter counts per mode");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts);
    if (density->parsed()) {
      if (density_path.empty() && density_synth == 0) {
        std::cerr << "note: no --clevr-path, building from " << density_scenes << " synthesized records\n";
        density_synth = density_scenes;
      }
      const auto records = clevr_records(density_path, density_synth, derive_seed(density_seed, 0));
      std::vector<scenes::Scene> built;
      std::size_t counts[3] = {0, 0, 0}, labeled = 0;
      for (std::size_t i = 0; i < density_scenes; ++i) {
        built.push_back(scenes::clevr_to_scene(records[i % records.size()], derive_seed(density_seed, i + 1)));
        for (int l = 0; l < 3; ++l) counts[l] += built.back().count_level(l);
        labeled += built.back().labeled_count();
      }
      const auto report = scenes::density_report(built, density_k);
      auto f = open_out(density_out);
      scenes::write_density_csv(f, report);
      scenes::write_density_csv(std::cout, report);
      for (int l = 0; l < 3; ++l) {
        std::cout << "L" << l << " share " << 100.0 * static_cast<double>(counts[l]) / static_cast<double>(labeled)
                  << "%\n";
      }
      return 0;
    }
    if (generate->parsed()) {
      const auto tag = scenes::parse_dataset(gen_dataset);
      scenes::Scene s;
      if (tag == scenes::DatasetTag::kClevr) {
        const auto records = clevr_records(gen_clevr, 16, derive_seed(gen_seed, 0));
        s = scenes::clevr_to_scene(records[gen_seed % records.size()], derive_seed(gen_seed, 1));
      } else {
        s = scenes::generate_synthetic(tag, gen_seed);
      }
      if (gen_out.empty()) {
        scenes::write_scene_csv(std::cout, s);
      } else {
        auto f = open_out(gen_out);
        scenes::write_scene_csv(f, s);
      }
      return 0;
    }
    if (params->parsed()) {
      for (auto m : model::kAllModes) {
        model::ModelConfig c;
        c.mode = m;
        std::cout << model::to_string(m) << ' ' << model::WorldlineModel(c, 0).parameter_count() << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
