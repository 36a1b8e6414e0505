#include <cmath>
#include <ostream>

#include "wlsa/errors.hpp"
#include "wlsa/scenes.hpp"

namespace wlsa::scenes {

DensityReport density_report(std::span<const Scene> scenes, std::size_t k) {
  if (scenes.empty()) throw ContractError("density_report: no scenes");
  std::vector<double> sum(kNumLevels, 0.0), sumsq(kNumLevels, 0.0);
  std::vector<std::size_t> count(kNumLevels, 0);
  for (const Scene& s : scenes) {
    const auto est = geometry::knn_density(s.points, k);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const int level = s.level_id[i];
      if (level < 0) continue;
      sum[level] += est.raw[i];
      sumsq[level] += est.raw[i] * est.raw[i];
      ++count[level];
    }
  }

  DensityReport report;
  report.k = k;
  for (int level = 0; level < kNumLevels; ++level) {
    if (count[level] == 0) continue;
    LevelDensity row;
    row.level = level;
    row.count = count[level];
    const double n = static_cast<double>(count[level]);
    row.mean = sum[level] / n;
    const double var = count[level] > 1 ? std::max(0.0, (sumsq[level] - n * row.mean * row.mean) / (n - 1.0)) : 0.0;
    row.std = std::sqrt(var);
    if (!report.levels.empty()) {
      const LevelDensity& prev = report.levels.back();
      const double diff = prev.mean - row.mean;
      const double se = std::sqrt(prev.std * prev.std / static_cast<double>(prev.count) + var / n);
      if (se > 0.0) row.separation = diff / se;
      const double pooled = std::sqrt(0.5 * (prev.std * prev.std + var));
      if (pooled > 0.0) row.effect_size = diff / pooled;
    }
    report.levels.push_back(row);
  }
  return report;
}

void write_density_csv(std::ostream& out, const DensityReport& report) {
  out << "level,count,mean_knn,std_knn,separation_sigma,effect_size\n";
  for (const auto& row : report.levels) {
    out << 'L' << row.level << ',' << row.count << ',' << row.mean << ',' << row.std << ',';
    if (row.separation) {
      out << *row.separation;
    } else {
      out << "n/a";
    }
    out << ',';
    if (row.effect_size) {
      out << *row.effect_size;
    } else {
      out << "n/a";
    }
    out << '\n';
  }
}

}  // namespace wlsa::scenes
