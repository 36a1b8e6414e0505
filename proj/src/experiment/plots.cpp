#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "wlsa/experiment.hpp"

namespace wlsa::experiment {
namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 60, kRight = 160, kTop = 30, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

void header(std::ostream& out, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << escape(title) << "</text>\n";
}

// Axes with a [0, 1] y range and horizontal grid lines every 0.2.
void axes(std::ostream& out, const std::string& xlabel, const std::string& ylabel) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  for (int i = 0; i <= 5; ++i) {
    const double y = y0 - (y0 - y1) * i / 5.0;
    out << "<line x1=\"" << x0 << "\" y1=\"" << num(y) << "\" x2=\"" << x1 << "\" y2=\"" << num(y)
        << "\" stroke=\"#ddd\"/>\n"
        << "<text x=\"" << x0 - 6 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
        << "font-size=\"10\">" << num(i / 5.0) << "</text>\n";
  }
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0 << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1 << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(xlabel) << "</text>\n"
      << "<text x=\"14\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\" transform=\"rotate(-90 14 " << (y0 + y1) / 2 << ")\">" << escape(ylabel) << "</text>\n";
}

void legend(std::ostream& out, std::size_t index, const std::string& label) {
  const double x = kWidth - kRight + 12, y = kTop + 16.0 * static_cast<double>(index);
  out << "<rect x=\"" << x << "\" y=\"" << num(y) << "\" width=\"12\" height=\"10\" fill=\"" << kColors[index % 6]
      << "\"/>\n"
      << "<text x=\"" << x + 16 << "\" y=\"" << num(y + 9) << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << escape(label) << "</text>\n";
}

}  // namespace

bool write_curves_svg(const std::filesystem::path& path, std::span<const metrics::RunResult> runs,
                      scenes::DatasetTag dataset) {
  // mode → epoch → (sum, count)
  std::map<std::size_t, std::map<std::size_t, std::pair<double, std::size_t>>> series;
  std::size_t max_epoch = 1;
  for (const auto& r : runs) {
    if (r.dataset != dataset) continue;
    const auto rank = static_cast<std::size_t>(
        std::find(model::kAllModes.begin(), model::kAllModes.end(), r.mode) - model::kAllModes.begin());
    for (const auto& e : r.evals) {
      auto& cell = series[rank][e.epoch];
      cell.first += e.level_acc;
      ++cell.second;
      max_epoch = std::max(max_epoch, e.epoch);
    }
  }
  if (series.empty()) return false;

  std::ofstream out(path);
  if (!out) return false;
  header(out, "Level accuracy vs epoch (" + std::string(scenes::to_string(dataset)) + ")");
  axes(out, "epoch", "level accuracy");
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  std::size_t idx = 0;
  for (const auto& [rank, points] : series) {
    out << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << kColors[idx % 6] << "\" points=\"";
    bool first = true;
    for (const auto& [epoch, acc] : points) {
      const double x = x0 + (x1 - x0) * static_cast<double>(epoch) / static_cast<double>(max_epoch);
      const double y = y0 - (y0 - y1) * std::clamp(acc.first / static_cast<double>(acc.second), 0.0, 1.0);
      out << (first ? "" : " ") << num(x) << ',' << num(y);
      first = false;
    }
    out << "\"/>\n";
    legend(out, idx, std::string(model::to_string(model::kAllModes[rank])));
    ++idx;
  }
  out << "</svg>\n";
  return static_cast<bool>(out);
}

bool write_summary_svg(const std::filesystem::path& path, std::span<const CellSummary> cells) {
  if (cells.empty()) return false;
  std::ofstream out(path);
  if (!out) return false;
  header(out, "Mean level accuracy and object ARI per cell");
  axes(out, "dataset / mode", "score");
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  const double group = (x1 - x0) / static_cast<double>(cells.size());
  const double bar = group * 0.35;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const double gx = x0 + group * static_cast<double>(i) + group * 0.15;
    const double values[2] = {c.level_mean, c.ari_mean};
    for (int b = 0; b < 2; ++b) {
      const double h = (y0 - y1) * std::clamp(values[b], 0.0, 1.0);
      out << "<rect x=\"" << num(gx + bar * b) << "\" y=\"" << num(y0 - h) << "\" width=\"" << num(bar)
          << "\" height=\"" << num(h) << "\" fill=\"" << kColors[b] << "\"/>\n";
    }
    const std::string label = std::string(scenes::to_string(c.dataset)) + "/" + std::string(model::to_string(c.mode));
    out << "<text x=\"" << num(gx + bar) << "\" y=\"" << num(y0 + 14)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"8\">" << escape(label) << "</text>\n";
  }
  legend(out, 0, "level accuracy");
  legend(out, 1, "object ARI");
  out << "</svg>\n";
  return static_cast<bool>(out);
}

}  // namespace wlsa::experiment
