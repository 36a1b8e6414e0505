#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include "wlsa/errors.hpp"
#include "wlsa/random.hpp"
#include "wlsa/scenes.hpp"

namespace wlsa::scenes {
namespace {

constexpr int kMaxCountDraws = 20;

struct ObjectCounts {
  int parts = 0;
  std::vector<int> subparts;
};

std::size_t labeled_points(const std::vector<ObjectCounts>& objects) {
  std::size_t n = 0;
  for (const auto& o : objects) {
    n += 1 + static_cast<std::size_t>(o.parts);
    for (int s : o.subparts) n += static_cast<std::size_t>(s);
  }
  return n;
}

std::size_t noise_points(std::size_t labeled, double fraction) {
  return static_cast<std::size_t>(std::lround(static_cast<double>(labeled) * fraction / (1.0 - fraction)));
}

// Draws structural counts until labeled + noise lands in [lo, hi], at most
// kMaxCountDraws times. Returns the counts and the noise budget; when no draw
// fits, noise is truncated (or padded) to reach the range.
std::pair<std::vector<ObjectCounts>, std::size_t> fit_counts(Rng& rng, std::size_t num_objects, int min_parts,
                                                             int max_parts, int min_sub, int max_sub,
                                                             double noise_fraction, std::size_t lo,
                                                             std::size_t hi) {
  std::vector<ObjectCounts> objects;
  for (int attempt = 0; attempt < kMaxCountDraws; ++attempt) {
    objects.assign(num_objects, {});
    for (auto& o : objects) {
      o.parts = rng.uniform_int(min_parts, max_parts);
      o.subparts.resize(static_cast<std::size_t>(o.parts));
      for (int& s : o.subparts) s = rng.uniform_int(min_sub, max_sub);
    }
    const std::size_t labeled = labeled_points(objects);
    const std::size_t total = labeled + noise_points(labeled, noise_fraction);
    if (total >= lo && total <= hi) return {objects, total - labeled};
  }
  const std::size_t labeled = labeled_points(objects);
  std::size_t noise = noise_points(labeled, noise_fraction);
  if (labeled + noise > hi) noise = labeled >= hi ? 0 : hi - labeled;
  if (labeled + noise < lo) noise = lo - labeled;
  return {objects, noise};
}

std::vector<Point2> draw_centers(Rng& rng, std::size_t n, double half_extent, double min_sep) {
  std::vector<Point2> centers;
  for (std::size_t i = 0; i < n; ++i) {
    Point2 best{};
    double best_gap = -1.0;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const Point2 c{rng.uniform(-half_extent, half_extent), rng.uniform(-half_extent, half_extent)};
      double gap = std::numeric_limits<double>::infinity();
      for (const Point2& o : centers) gap = std::min(gap, std::hypot(c.x - o.x, c.y - o.y));
      if (gap >= min_sep) {
        best = c;
        break;
      }
      if (gap > best_gap) {
        best_gap = gap;
        best = c;
      }
    }
    centers.push_back(best);
  }
  return centers;
}

void push(Scene& s, Point2 p, int object, int level) {
  s.points.push_back(p);
  s.object_id.push_back(object);
  s.level_id.push_back(level);
}

void add_noise(Scene& s, Rng& rng, std::size_t count, double half_extent) {
  for (std::size_t i = 0; i < count; ++i) {
    push(s, {rng.uniform(-half_extent, half_extent), rng.uniform(-half_extent, half_extent)}, kNoiseLabel,
         kNoiseLabel);
  }
}

// Drops trailing L2 points until the scene fits `max_points`. Only reachable
// when even zero noise cannot bring the count into range.
void truncate_to(Scene& s, std::size_t max_points) {
  while (s.size() > max_points) {
    auto it = std::find(s.level_id.rbegin(), s.level_id.rend(), 2);
    if (it == s.level_id.rend()) break;
    const auto idx = static_cast<std::size_t>(std::distance(it, s.level_id.rend()) - 1);
    s.points.erase(s.points.begin() + static_cast<std::ptrdiff_t>(idx));
    s.object_id.erase(s.object_id.begin() + static_cast<std::ptrdiff_t>(idx));
    s.level_id.erase(s.level_id.begin() + static_cast<std::ptrdiff_t>(idx));
  }
}

}  // namespace

std::string_view to_string(DatasetTag tag) {
  switch (tag) {
    case DatasetTag::kToy:
      return "toy";
    case DatasetTag::kSprites:
      return "sprites";
    case DatasetTag::kClevr:
      return "clevr";
  }
  return "?";
}

DatasetTag parse_dataset(std::string_view name) {
  if (name == "toy") return DatasetTag::kToy;
  if (name == "sprites") return DatasetTag::kSprites;
  if (name == "clevr") return DatasetTag::kClevr;
  throw ContractError("unknown dataset '" + std::string(name) + "' (expected toy, sprites or clevr)");
}

std::size_t Scene::labeled_count() const {
  return static_cast<std::size_t>(std::count_if(level_id.begin(), level_id.end(), [](int l) { return l >= 0; }));
}

std::size_t Scene::count_level(int level) const {
  return static_cast<std::size_t>(std::count(level_id.begin(), level_id.end(), level));
}

std::size_t Scene::num_objects() const {
  std::set<int> ids;
  for (int o : object_id)
    if (o >= 0) ids.insert(o);
  return ids.size();
}

void Scene::validate() const {
  if (object_id.size() != points.size() || level_id.size() != points.size()) {
    throw ContractError("scene label arrays do not match the point count");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const bool noise_obj = object_id[i] == kNoiseLabel;
    const bool noise_lvl = level_id[i] == kNoiseLabel;
    if (noise_obj != noise_lvl) throw ContractError("point " + std::to_string(i) + " is half-labeled");
    if (level_id[i] < kNoiseLabel || level_id[i] >= kNumLevels) {
      throw ContractError("point " + std::to_string(i) + " has level " + std::to_string(level_id[i]));
    }
    if (object_id[i] < kNoiseLabel) throw ContractError("negative object id");
    if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y)) throw ContractError("non-finite point");
  }
}

Scene generate_toy(std::uint64_t seed, const ToyConfig& config) {
  Rng rng(seed);
  auto [objects, noise] = fit_counts(rng, config.num_objects, 4, 5, 2, 4, config.noise_fraction, config.min_points,
                                     config.max_points);
  const auto centers = draw_centers(rng, config.num_objects, config.center_half_extent, config.min_center_separation);

  Scene s;
  s.tag = DatasetTag::kToy;
  for (std::size_t o = 0; o < objects.size(); ++o) {
    const int oid = static_cast<int>(o);
    const Point2 c = centers[o];
    push(s, c, oid, 0);
    const int n_parts = objects[o].parts;
    for (int p = 0; p < n_parts; ++p) {
      const double angle = 2.0 * std::numbers::pi * p / n_parts +
                           rng.uniform(-config.part_angle_jitter, config.part_angle_jitter);
      const double radius =
          config.part_radius * rng.uniform(1.0 - config.part_radius_jitter, 1.0 + config.part_radius_jitter);
      const Point2 part{c.x + radius * std::cos(angle), c.y + radius * std::sin(angle)};
      push(s, part, oid, 1);
      for (int q = 0; q < objects[o].subparts[static_cast<std::size_t>(p)]; ++q) {
        push(s, {rng.normal(part.x, config.subpart_sigma), rng.normal(part.y, config.subpart_sigma)}, oid, 2);
      }
    }
  }
  add_noise(s, rng, noise, config.noise_half_extent);
  truncate_to(s, config.max_points);
  return s;
}

Scene generate_sprites(std::uint64_t seed, const SpritesConfig& config) {
  Rng rng(seed);
  auto [objects, noise] = fit_counts(rng, config.num_objects, 4, 5, 2, 4, config.noise_fraction, config.min_points,
                                     config.max_points);
  const auto centers = draw_centers(rng, config.num_objects, config.center_half_extent, config.min_center_separation);

  // Four diagonal limbs; a fifth part, when present, is the head straight up.
  constexpr double kPi = std::numbers::pi;
  const double anchors[5] = {0.25 * kPi, 0.75 * kPi, 1.25 * kPi, 1.75 * kPi, 0.5 * kPi};

  Scene s;
  s.tag = DatasetTag::kSprites;
  for (std::size_t o = 0; o < objects.size(); ++o) {
    const int oid = static_cast<int>(o);
    const Point2 body = centers[o];
    push(s, body, oid, 0);
    for (int p = 0; p < objects[o].parts; ++p) {
      const double angle = anchors[p] + rng.normal(0.0, config.anchor_jitter);
      const double length = p < 4 ? config.limb_length : config.head_length;
      const Point2 dir{std::cos(angle), std::sin(angle)};
      const Point2 end{body.x + length * dir.x, body.y + length * dir.y};
      push(s, end, oid, 1);
      // Joints step inward from the limb end.
      for (int q = 0; q < objects[o].subparts[static_cast<std::size_t>(p)]; ++q) {
        const double frac = 1.0 - config.joint_spacing * (q + 1);
        push(s,
             {rng.normal(body.x + frac * length * dir.x, config.joint_sigma),
              rng.normal(body.y + frac * length * dir.y, config.joint_sigma)},
             oid, 2);
      }
    }
  }
  add_noise(s, rng, noise, config.noise_half_extent);
  truncate_to(s, config.max_points);
  return s;
}

Scene generate_synthetic(DatasetTag tag, std::uint64_t seed) {
  switch (tag) {
    case DatasetTag::kToy:
      return generate_toy(seed);
    case DatasetTag::kSprites:
      return generate_sprites(seed);
    case DatasetTag::kClevr:
      break;
  }
  throw ContractError("CLEVR scenes are built from annotation records, not generated");
}

}  // namespace wlsa::scenes
