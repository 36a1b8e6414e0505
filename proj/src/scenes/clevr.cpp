#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "json.hpp"

#include "wlsa/errors.hpp"
#include "wlsa/random.hpp"
#include "wlsa/scenes.hpp"

namespace wlsa::scenes {
namespace {

using nlohmann::json;

std::string with_url(const std::string& what) {
  return what + " (CLEVR scene annotations are in " + std::string(kClevrDownloadUrl) +
         "; pass the extracted scenes/CLEVR_*_scenes.json)";
}

ClevrObject parse_object(const json& j) {
  ClevrObject o;
  const auto& coords = j.at("3d_coords");
  if (!coords.is_array() || coords.size() != 3) throw IngestionError(with_url("object without 3d_coords triple"));
  for (std::size_t i = 0; i < 3; ++i) o.center[i] = coords.at(i).get<double>();
  const std::string size = j.value("size", "small");
  if (size == "large") {
    o.size = SizeTag::kLarge;
  } else if (size == "small") {
    o.size = SizeTag::kSmall;
  } else {
    throw IngestionError(with_url("unknown object size '" + size + "'"));
  }
  o.shape = j.value("shape", "");
  o.color = j.value("color", "");
  o.material = j.value("material", "");
  return o;
}

double base_radius(SizeTag size, const ClevrBuildConfig& c) {
  return size == SizeTag::kLarge ? c.large_radius : c.small_radius;
}

}  // namespace

std::vector<ClevrSceneRecord> parse_clevr(std::istream& in, const ClevrFilter& filter) {
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw IngestionError(with_url(std::string("malformed CLEVR scenes file: ") + e.what()));
  }
  std::vector<ClevrSceneRecord> out;
  try {
    const json& scenes = doc.at("scenes");
    if (!scenes.is_array()) throw IngestionError(with_url("'scenes' is not an array"));
    for (const json& s : scenes) {
      const json& objects = s.at("objects");
      if (objects.size() < filter.min_objects || objects.size() > filter.max_objects) continue;
      ClevrSceneRecord rec;
      rec.image_index = s.value("image_index", static_cast<int>(out.size()));
      for (const json& o : objects) rec.objects.push_back(parse_object(o));
      out.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw IngestionError(with_url(std::string("unexpected CLEVR scenes layout: ") + e.what()));
  }
  return out;
}

std::vector<ClevrSceneRecord> ingest_clevr(const std::filesystem::path& path, const ClevrFilter& filter) {
  std::ifstream in(path);
  if (!in) throw IngestionError(with_url("cannot open CLEVR scenes file '" + path.string() + "'"));
  return parse_clevr(in, filter);
}

void write_clevr(std::ostream& out, std::span<const ClevrSceneRecord> records) {
  json scenes = json::array();
  for (const auto& r : records) {
    json objects = json::array();
    for (const auto& o : r.objects) {
      objects.push_back({{"3d_coords", {o.center[0], o.center[1], o.center[2]}},
                         {"size", o.size == SizeTag::kLarge ? "large" : "small"},
                         {"shape", o.shape},
                         {"color", o.color},
                         {"material", o.material}});
    }
    scenes.push_back({{"image_index", r.image_index}, {"objects", std::move(objects)}});
  }
  out << json{{"info", {{"version", "1.0"}}}, {"scenes", std::move(scenes)}}.dump() << '\n';
}

std::vector<ClevrSceneRecord> synthesize_clevr_records(std::uint64_t seed, std::size_t count,
                                                       const ClevrFilter& filter) {
  static const char* kShapes[] = {"cube", "sphere", "cylinder"};
  static const char* kColors[] = {"gray", "red", "blue", "green", "brown", "purple", "cyan", "yellow"};
  static const char* kMaterials[] = {"rubber", "metal"};
  const ClevrBuildConfig radii;
  Rng rng(seed);
  std::vector<ClevrSceneRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    ClevrSceneRecord rec;
    rec.image_index = static_cast<int>(i);
    const int n = rng.uniform_int(static_cast<int>(filter.min_objects), static_cast<int>(filter.max_objects));
    for (int j = 0; j < n; ++j) {
      ClevrObject o;
      o.size = rng.bernoulli(0.5) ? SizeTag::kLarge : SizeTag::kSmall;
      const double r = base_radius(o.size, radii);
      // Footprints keep a 0.25 gap, as in the CLEVR renderer's placement rule.
      for (int attempt = 0; attempt < 200; ++attempt) {
        o.center = {rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0), r};
        bool clear = true;
        for (const auto& other : rec.objects) {
          const double gap = std::hypot(o.center[0] - other.center[0], o.center[1] - other.center[1]);
          if (gap < r + base_radius(other.size, radii) + 0.25) clear = false;
        }
        if (clear) break;
      }
      o.shape = kShapes[rng.uniform_int(0, 2)];
      o.color = kColors[rng.uniform_int(0, 7)];
      o.material = kMaterials[rng.uniform_int(0, 1)];
      rec.objects.push_back(std::move(o));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

Scene clevr_to_scene(const ClevrSceneRecord& record, std::uint64_t seed, const ClevrBuildConfig& config) {
  Rng rng(seed);
  Scene s;
  s.tag = DatasetTag::kClevr;
  auto keep = [&](Point2 p, int obj, int level) {
    if (rng.bernoulli(config.dropout)) return;
    s.points.push_back(p);
    s.object_id.push_back(obj);
    s.level_id.push_back(level);
  };
  for (std::size_t o = 0; o < record.objects.size(); ++o) {
    const auto& obj = record.objects[o];
    const int oid = static_cast<int>(o);
    const Point2 center{obj.center[0], obj.center[1]};
    keep({rng.normal(center.x, config.center_sigma), rng.normal(center.y, config.center_sigma)}, oid, 0);

    const int n_parts = rng.uniform_int(config.min_parts, config.max_parts);
    const double base = base_radius(obj.size, config);
    for (int i = 0; i < n_parts; ++i) {
      const double angle = 2.0 * std::numbers::pi * i / n_parts + rng.normal(0.0, config.angle_sigma);
      const double radius = base * rng.uniform(config.radius_lo, config.radius_hi);
      const Point2 part{center.x + radius * std::cos(angle), center.y + radius * std::sin(angle)};
      keep(part, oid, 1);
      const int n_sub = rng.uniform_int(config.min_subparts, config.max_subparts);
      for (int j = 0; j < n_sub; ++j) {
        keep({rng.normal(part.x, config.subpart_sigma), rng.normal(part.y, config.subpart_sigma)}, oid, 2);
      }
    }
  }
  const std::size_t labeled = s.points.size();
  const auto noise = static_cast<std::size_t>(
      std::lround(static_cast<double>(labeled) * config.noise_fraction / (1.0 - config.noise_fraction)));
  const double e = config.noise_half_extent;
  for (std::size_t i = 0; i < noise; ++i) {
    s.points.push_back({rng.uniform(-e, e), rng.uniform(-e, e)});
    s.object_id.push_back(kNoiseLabel);
    s.level_id.push_back(kNoiseLabel);
  }
  return s;
}

}  // namespace wlsa::scenes
