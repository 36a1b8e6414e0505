#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wlsa/geometry.hpp"

namespace wlsa::scenes {

enum class DatasetTag { kToy, kSprites, kClevr };

std::string_view to_string(DatasetTag tag);
/// Accepts "toy", "sprites", "clevr". Throws ContractError otherwise.
DatasetTag parse_dataset(std::string_view name);

inline constexpr int kNoiseLabel = -1;
inline constexpr int kNumLevels = 3;

/// Labeled hierarchical 2-D point cloud. Noise points carry label −1 in both
/// object_id and level_id.
struct Scene {
  std::vector<Point2> points;
  std::vector<int> object_id;
  std::vector<int> level_id;
  DatasetTag tag = DatasetTag::kToy;

  std::size_t size() const noexcept { return points.size(); }
  std::size_t labeled_count() const;
  std::size_t count_level(int level) const;
  std::size_t num_objects() const;
  /// Throws ContractError on inconsistent lengths or labels.
  void validate() const;
};

struct ToyConfig {
  std::size_t num_objects = 3;
  double center_half_extent = 4.0;  // centers ~ U([−4, 4]²)
  double min_center_separation = 2.5;
  double part_radius = 1.0;
  double part_radius_jitter = 0.2;  // radius · U(1 − j, 1 + j)
  double part_angle_jitter = 0.3;   // radians, uniform ±
  double subpart_sigma = 0.15;
  double noise_half_extent = 5.0;
  double noise_fraction = 0.10;
  std::size_t min_points = 50;
  std::size_t max_points = 70;
};

struct SpritesConfig {
  std::size_t num_objects = 3;
  double center_half_extent = 4.0;
  double min_center_separation = 2.5;
  double limb_length = 1.4;
  double head_length = 0.9;
  double anchor_jitter = 0.1;  // radians, Gaussian σ on each limb direction
  double joint_spacing = 0.15;  // fraction of the limb between consecutive joints
  double joint_sigma = 0.06;
  double noise_half_extent = 5.0;
  double noise_fraction = 0.10;
  std::size_t min_points = 60;
  std::size_t max_points = 80;
};

/// 3 objects, each: 1 L0 center, 4–5 L1 parts around it, 2–4 tightly clustered
/// L2 subparts per part; ~10% uniform noise; 50–70 points in total.
Scene generate_toy(std::uint64_t seed, const ToyConfig& config = {});

/// Sprite layout: L0 body, L1 limb ends at four diagonal anchors (plus an
/// optional head), L2 joints spaced along each limb; 60–80 points.
Scene generate_sprites(std::uint64_t seed, const SpritesConfig& config = {});

/// Toy or sprites by tag (CLEVR scenes come from annotation records).
Scene generate_synthetic(DatasetTag tag, std::uint64_t seed);

// ---------------------------------------------------------------- CLEVR

inline constexpr std::string_view kClevrDownloadUrl = "https://dl.fbaipublicfiles.com/clevr/CLEVR_v1.0_no_images.zip";

enum class SizeTag { kSmall, kLarge };

struct ClevrObject {
  std::array<double, 3> center{};
  SizeTag size = SizeTag::kSmall;
  std::string shape;
  std::string color;
  std::string material;
};

struct ClevrSceneRecord {
  int image_index = -1;
  std::vector<ClevrObject> objects;
};

struct ClevrFilter {
  std::size_t min_objects = 3;
  std::size_t max_objects = 5;
};

/// Parses a CLEVR v1.0 scenes file (e.g. CLEVR_train_scenes.json) and keeps
/// scenes whose object count lies within the filter. Throws IngestionError
/// (mentioning the download URL) when the file is missing or malformed.
std::vector<ClevrSceneRecord> ingest_clevr(const std::filesystem::path& path, const ClevrFilter& filter = {});
std::vector<ClevrSceneRecord> parse_clevr(std::istream& in, const ClevrFilter& filter = {});

/// Writes records in the CLEVR scenes-file layout.
void write_clevr(std::ostream& out, std::span<const ClevrSceneRecord> records);

/// CLEVR-like records for tests and offline runs: 3–5 objects with x, y in
/// [−3, 3], non-overlapping footprints and random sizes.
std::vector<ClevrSceneRecord> synthesize_clevr_records(std::uint64_t seed, std::size_t count,
                                                       const ClevrFilter& filter = {});

struct ClevrBuildConfig {
  double small_radius = 0.35;
  double large_radius = 0.70;
  double center_sigma = 0.02;
  double angle_sigma = 0.1;
  double radius_lo = 0.8;
  double radius_hi = 1.2;
  double subpart_sigma = 0.12;
  int min_parts = 3;
  int max_parts = 5;
  int min_subparts = 2;
  int max_subparts = 4;
  double dropout = 0.15;
  double noise_fraction = 0.10;
  double noise_half_extent = 3.5;
};

/// Builds the density-stratified hierarchy around each object's (x, y):
/// L0 center, L1 ring of parts, L2 clusters around each part, per-point
/// dropout and background noise.
Scene clevr_to_scene(const ClevrSceneRecord& record, std::uint64_t seed, const ClevrBuildConfig& config = {});

// ---------------------------------------------------------------- I/O

/// One line per point, `x,y,object_id,level_id`, after a header line.
void write_scene_csv(std::ostream& out, const Scene& scene);
Scene read_scene_csv(std::istream& in, DatasetTag tag);

// ---------------------------------------------------------------- density

struct LevelDensity {
  int level = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;
  /// (mean of previous level − mean) in standard-error units of the
  /// difference; empty for the first level present.
  std::optional<double> separation;
  /// Same difference in pooled per-point standard deviations.
  std::optional<double> effect_size;
};

struct DensityReport {
  std::size_t k = 5;
  std::vector<LevelDensity> levels;
};

/// Per-level statistics of the raw k-NN distance over all labeled points.
DensityReport density_report(std::span<const Scene> scenes, std::size_t k = 5);
void write_density_csv(std::ostream& out, const DensityReport& report);

}  // namespace wlsa::scenes
