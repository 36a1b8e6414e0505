#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "wlsa/errors.hpp"
#include "wlsa/scenes.hpp"

namespace wlsa::scenes {

namespace {
constexpr std::string_view kHeader = "x,y,object_id,level_id";

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

void write_scene_csv(std::ostream& out, const Scene& scene) {
  out << kHeader << '\n';
  for (std::size_t i = 0; i < scene.size(); ++i) {
    out << format_double(scene.points[i].x) << ',' << format_double(scene.points[i].y) << ','
        << scene.object_id[i] << ',' << scene.level_id[i] << '\n';
  }
}

Scene read_scene_csv(std::istream& in, DatasetTag tag) {
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("scene file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw IngestionError("scene file header must be '" + std::string(kHeader) + "'");
  Scene s;
  s.tag = tag;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string x, y, obj, lvl;
    if (!std::getline(row, x, ',') || !std::getline(row, y, ',') || !std::getline(row, obj, ',') ||
        !std::getline(row, lvl)) {
      throw IngestionError("scene file line " + std::to_string(lineno) + ": expected 4 fields");
    }
    try {
      s.points.push_back({std::stod(x), std::stod(y)});
      s.object_id.push_back(std::stoi(obj));
      s.level_id.push_back(std::stoi(lvl));
    } catch (const std::exception&) {
      throw IngestionError("scene file line " + std::to_string(lineno) + ": unparsable field");
    }
  }
  try {
    s.validate();
  } catch (const ContractError& e) {
    throw IngestionError(std::string("scene file: ") + e.what());
  }
  return s;
}

}  // namespace wlsa::scenes
