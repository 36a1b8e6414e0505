#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "wlsa/errors.hpp"
#include "wlsa/experiment.hpp"

namespace wlsa::experiment {
namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::size_t mode_rank(model::Mode m) {
  return static_cast<std::size_t>(std::find(model::kAllModes.begin(), model::kAllModes.end(), m) -
                                  model::kAllModes.begin());
}

bool run_less(const metrics::RunResult& a, const metrics::RunResult& b) {
  if (a.dataset != b.dataset) return a.dataset < b.dataset;
  if (a.mode != b.mode) return mode_rank(a.mode) < mode_rank(b.mode);
  return a.seed < b.seed;
}

std::vector<double> level_accs(std::span<const metrics::RunResult> runs, scenes::DatasetTag d, model::Mode m) {
  std::vector<double> out;
  for (const auto& r : runs)
    if (r.dataset == d && r.mode == m) out.push_back(r.level_acc);
  return out;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (datasets.empty() || modes.empty() || seeds.empty()) {
    throw ContractError("experiment needs at least one dataset, mode and seed");
  }
  if (jobs == 0) throw ContractError("jobs must be at least 1");
}

bool MatrixResult::any_aborted() const {
  return std::any_of(runs.begin(), runs.end(), [](const auto& r) { return r.aborted; });
}

training::TrainConfig cell_config(const ExperimentSpec& spec, scenes::DatasetTag dataset, model::Mode mode,
                                  std::uint64_t seed,
                                  std::shared_ptr<const std::vector<scenes::ClevrSceneRecord>> pool) {
  training::TrainConfig c;
  c.dataset = dataset;
  c.seed = seed;
  c.model.mode = mode;
  c.level_mapping = spec.level_mapping;
  c.clevr_pool = std::move(pool);
  apply_overrides(c, spec.overrides);
  if (spec.epochs) c.epochs = *spec.epochs;
  c.parallel_batch = spec.jobs == 1;
  return c;
}

MatrixResult run_matrix(const ExperimentSpec& spec, std::ostream& log) {
  spec.validate();
  MatrixResult result;

  std::shared_ptr<const std::vector<scenes::ClevrSceneRecord>> pool;
  std::vector<scenes::DatasetTag> datasets;
  for (auto d : spec.datasets) {
    if (d != scenes::DatasetTag::kClevr) {
      datasets.push_back(d);
      continue;
    }
    try {
      if (spec.clevr_path) {
        pool = std::make_shared<const std::vector<scenes::ClevrSceneRecord>>(scenes::ingest_clevr(*spec.clevr_path));
      } else if (spec.clevr_synthetic_records > 0) {
        pool = std::make_shared<const std::vector<scenes::ClevrSceneRecord>>(
            scenes::synthesize_clevr_records(0xC1E7, spec.clevr_synthetic_records));
      } else {
        result.warnings.push_back("clevr skipped: no --clevr-path given (annotations: " +
                                  std::string(scenes::kClevrDownloadUrl) + ")");
        continue;
      }
      datasets.push_back(d);
    } catch (const IngestionError& e) {
      result.warnings.push_back(std::string("clevr skipped: ") + e.what());
    }
  }
  for (const auto& w : result.warnings) log << "warning: " << w << '\n';

  std::vector<training::TrainConfig> cells;
  for (auto d : datasets)
    for (auto m : spec.modes)
      for (auto s : spec.seeds) cells.push_back(cell_config(spec, d, m, s, pool));

  result.runs.resize(cells.size());
  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto& c = cells[i];
      {
        std::lock_guard lock(log_mutex);
        log << "run " << scenes::to_string(c.dataset) << '/' << model::to_string(c.model.mode) << " seed " << c.seed
            << " (" << c.epochs << " epochs)\n";
      }
      result.runs[i] = training::train_run(c);
      const auto& r = result.runs[i];
      std::lock_guard lock(log_mutex);
      log << "done " << scenes::to_string(c.dataset) << '/' << model::to_string(c.model.mode) << " seed " << c.seed
          << ": level_acc " << fixed(r.level_acc, 3) << " object_ari " << fixed(r.object_ari, 3)
          << (r.aborted ? "  ABORTED: " + r.abort_reason : std::string()) << '\n';
    }
  };
  const std::size_t threads = std::min(spec.jobs, std::max<std::size_t>(1, cells.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool_threads;
    for (std::size_t t = 0; t < threads; ++t) pool_threads.emplace_back(worker);
    for (auto& t : pool_threads) t.join();
  }
  std::sort(result.runs.begin(), result.runs.end(), run_less);
  return result;
}

std::vector<CellSummary> summarize(std::span<const metrics::RunResult> runs) {
  std::vector<metrics::RunResult> sorted(runs.begin(), runs.end());
  std::stable_sort(sorted.begin(), sorted.end(), run_less);
  std::vector<CellSummary> cells;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    std::vector<double> ari, level, recon;
    while (j < sorted.size() && sorted[j].dataset == sorted[i].dataset && sorted[j].mode == sorted[i].mode) {
      ari.push_back(sorted[j].object_ari);
      level.push_back(sorted[j].level_acc);
      recon.push_back(sorted[j].final_reconstruction);
      ++j;
    }
    CellSummary c;
    c.dataset = sorted[i].dataset;
    c.mode = sorted[i].mode;
    c.runs = j - i;
    c.ari_mean = metrics::mean(ari);
    c.ari_std = metrics::sample_std(ari);
    c.level_mean = metrics::mean(level);
    c.level_std = metrics::sample_std(level);
    c.recon_mean = metrics::mean(recon);
    if (c.mode != model::Mode::kLorentzian) {
      const auto lor = level_accs(sorted, c.dataset, model::Mode::kLorentzian);
      if (lor.size() >= 2 && level.size() >= 2) c.vs_lorentzian = metrics::welch_stats(lor, level);
    }
    cells.push_back(c);
    i = j;
  }
  return cells;
}

void write_results_csv(std::ostream& out, std::span<const metrics::RunResult> runs) {
  std::vector<metrics::RunResult> sorted(runs.begin(), runs.end());
  std::stable_sort(sorted.begin(), sorted.end(), run_less);
  out << "dataset,mode,seed,object_ari,level_acc,final_loss\n";
  for (const auto& r : sorted) {
    out << scenes::to_string(r.dataset) << ',' << model::to_string(r.mode) << ',' << r.seed << ','
        << fixed(r.object_ari) << ',' << fixed(r.level_acc) << ',' << fixed(r.final_loss) << '\n';
  }
}

void write_curves_csv(std::ostream& out, std::span<const metrics::RunResult> runs) {
  std::vector<metrics::RunResult> sorted(runs.begin(), runs.end());
  std::stable_sort(sorted.begin(), sorted.end(), run_less);
  out << "dataset,mode,seed,epoch,object_ari,level_acc,loss,reconstruction\n";
  for (const auto& r : sorted) {
    for (const auto& e : r.evals) {
      out << scenes::to_string(r.dataset) << ',' << model::to_string(r.mode) << ',' << r.seed << ',' << e.epoch << ','
          << fixed(e.object_ari) << ',' << fixed(e.level_acc) << ',' << fixed(e.loss) << ','
          << fixed(e.reconstruction) << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, std::span<const CellSummary> cells) {
  out << "dataset,mode,runs,object_ari_mean,object_ari_std,level_acc_mean,level_acc_std,reconstruction_mean,"
         "welch_t,welch_dof,welch_p,cohens_d,cohens_d_group_a,degenerate\n";
  for (const auto& c : cells) {
    out << scenes::to_string(c.dataset) << ',' << model::to_string(c.mode) << ',' << c.runs << ','
        << fixed(c.ari_mean) << ',' << fixed(c.ari_std) << ',' << fixed(c.level_mean) << ',' << fixed(c.level_std)
        << ',' << fixed(c.recon_mean) << ',';
    if (c.vs_lorentzian) {
      const auto& w = *c.vs_lorentzian;
      out << fixed(w.t, 4) << ',' << fixed(w.dof, 2) << ',' << metrics::format_p(w.p_two_sided) << ','
          << fixed(w.cohens_d, 4) << ',' << fixed(w.cohens_d_group_a, 4) << ',' << (w.degenerate ? "yes" : "no");
    } else {
      out << ",,,,,";
    }
    out << '\n';
  }
}

void write_summary_text(std::ostream& out, std::span<const CellSummary> cells) {
  out << std::left << std::setw(9) << "dataset" << std::setw(15) << "mode" << std::right << std::setw(5) << "n"
      << std::setw(18) << "object ARI" << std::setw(18) << "level acc" << std::setw(10) << "recon" << std::setw(10)
      << "t" << std::setw(10) << "p" << std::setw(9) << "d" << '\n';
  for (const auto& c : cells) {
    out << std::left << std::setw(9) << scenes::to_string(c.dataset) << std::setw(15) << model::to_string(c.mode)
        << std::right << std::setw(5) << c.runs << std::setw(18)
        << (fixed(c.ari_mean, 3) + " ± " + fixed(c.ari_std, 3)) << std::setw(18)
        << (fixed(c.level_mean, 3) + " ± " + fixed(c.level_std, 3)) << std::setw(10) << fixed(c.recon_mean, 4);
    if (c.vs_lorentzian) {
      const auto& w = *c.vs_lorentzian;
      out << std::setw(10) << fixed(w.t, 2) << std::setw(10) << metrics::format_p(w.p_two_sided) << std::setw(9)
          << fixed(w.cohens_d, 2) << (w.degenerate ? "  (zero variance)" : "");
    } else {
      out << std::setw(10) << "-" << std::setw(10) << "-" << std::setw(9) << "-";
    }
    out << '\n';
  }
}

SweepReport sensitivity_sweep(const ExperimentSpec& spec, std::ostream& log) {
  spec.validate();
  struct Cell {
    std::string knob, label;
    Overrides overrides;
  };
  const std::vector<std::pair<std::string, std::vector<std::pair<std::string, Overrides>>>> knobs = {
      {"cone_penalties",
       {{"(8,4)", {{"past_penalty", "8"}, {"spacelike_penalty", "4"}}},
        {"(10,5)", {}},
        {"(12,6)", {{"past_penalty", "12"}, {"spacelike_penalty", "6"}}}}},
      {"base_horizons",
       {{"[0.8,0.5,0.2]", {{"base_horizons", "0.8,0.5,0.2"}}},
        {"[0.9,0.6,0.3]", {}},
        {"[1.0,0.7,0.4]", {{"base_horizons", "1.0,0.7,0.4"}}}}},
      {"lambda_cone", {{"0.3", {{"lambda_cone", "0.3"}}}, {"0.5", {}}, {"0.7", {{"lambda_cone", "0.7"}}}}},
      {"level_times",
       {{"[1,2,3]", {{"level_times", "1,2,3"}}},
        {"[1,2.5,4]", {}},
        {"[0.5,2,4.5]", {{"level_times", "0.5,2,4.5"}}}}},
  };

  // The default cell is shared by all knobs and trained once.
  std::map<Overrides, double> cache;
  auto cell_mean = [&](const Overrides& extra) {
    if (auto it = cache.find(extra); it != cache.end()) return it->second;
    ExperimentSpec s = spec;
    s.datasets = {scenes::DatasetTag::kToy};
    s.modes = {model::Mode::kLorentzian};
    for (const auto& [k, v] : extra) s.overrides[k] = v;
    std::ostringstream quiet;
    const MatrixResult r = run_matrix(s, quiet);
    std::vector<double> acc;
    for (const auto& run : r.runs) acc.push_back(run.level_acc);
    const double m = metrics::mean(acc);
    cache.emplace(extra, m);
    return m;
  };

  SweepReport report;
  for (const auto& [name, values] : knobs) {
    SweepKnob knob;
    knob.name = name;
    for (const auto& [label, extra] : values) {
      knob.values.push_back({label, cell_mean(extra)});
      log << "sweep " << name << ' ' << label << ": level_acc " << fixed(knob.values.back().level_mean, 3) << '\n';
    }
    double lo = knob.values.front().level_mean, hi = lo;
    for (const auto& v : knob.values) {
      lo = std::min(lo, v.level_mean);
      hi = std::max(hi, v.level_mean);
    }
    knob.spread = hi - lo;
    // Reference bounds doubled for 3-seed noise.
    if (name == "cone_penalties") {
      knob.criterion = "spread < 0.06";
      knob.pass = knob.spread < 0.06;
    } else if (name == "base_horizons") {
      knob.criterion = "spread < 0.08";
      knob.pass = knob.spread < 0.08;
    } else if (name == "lambda_cone") {
      knob.criterion = "spread < 0.10";
      knob.pass = knob.spread < 0.10;
    } else {
      knob.criterion = "[1,2.5,4] >= [1,2,3] - 0.04";
      knob.pass = knob.values[1].level_mean >= knob.values[0].level_mean - 0.04;
    }
    report.knobs.push_back(std::move(knob));
  }
  return report;
}

void write_sweep_csv(std::ostream& out, const SweepReport& report) {
  out << "knob,value,level_acc_mean,spread,criterion,pass\n";
  for (const auto& k : report.knobs) {
    for (const auto& v : k.values) {
      out << k.name << ",\"" << v.label << "\"," << fixed(v.level_mean) << ',' << fixed(k.spread) << ",\""
          << k.criterion << "\"," << (k.pass ? "yes" : "no") << '\n';
    }
  }
}

}  // namespace wlsa::experiment
