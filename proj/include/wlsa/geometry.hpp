#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace wlsa {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

}  // namespace wlsa

namespace wlsa::geometry {

inline constexpr double kEps = 1e-6;
inline constexpr double kLightlikeTol = 1e-9;
inline constexpr double kBallClamp = 1.0 - 1e-5;

/// Event (t, x) in (d+1)-dimensional Minkowski space with signature (+,−,…,−).
struct LorentzianEvent {
  double t = 0.0;
  std::vector<double> x;

  std::size_t dim() const noexcept { return x.size(); }
};

enum class Separation { kTimelike, kSpacelike, kLightlike };

const char* to_string(Separation s);

/// Light-cone score constants. Horizons are indexed by hierarchy level.
struct ConeParams {
  std::array<double, 3> base_horizons{0.9, 0.6, 0.3};
  double horizon_scale = 0.3;
  double past_penalty = 10.0;
  double spacelike_penalty = 5.0;
  double eps = kEps;

  /// Throws ContractError unless horizons strictly decrease and penalties are positive.
  void validate() const;
};

/// a.t·b.t − ⟨a.x, b.x⟩
double minkowski_inner(const LorentzianEvent& a, const LorentzianEvent& b);

/// ⟨Δ,Δ⟩_L for Δ = a − b.
double squared_interval(const LorentzianEvent& a, const LorentzianEvent& b);

/// sign(q)·√(|q| + eps), q = ⟨Δ,Δ⟩_L. sign(0) is 0, so coincident events are at distance 0.
double proper_time_distance(const LorentzianEvent& a, const LorentzianEvent& b, double eps = kEps);

/// Symmetric in its arguments.
Separation classify(const LorentzianEvent& a, const LorentzianEvent& b, double tol = kLightlikeTol);

/// x ∈ C⁺(p): x.t > p.t and ⟨x−p, x−p⟩_L ≥ 0.
bool in_future_cone(const LorentzianEvent& p, const LorentzianEvent& x);

/// w_level + α·(ρ − 0.5)
double adaptive_horizon(std::size_t level, double density, const ConeParams& params);

/// h − r/(|τ|+ε) − past·ReLU(−τ) − spacelike·ReLU(r − |τ|)
double cone_score(double tau, double r, double h, const ConeParams& params);
/// τ = feature.t − slot.t, r = ‖feature.x − slot.x‖.
double cone_score(const LorentzianEvent& feature, const LorentzianEvent& slot, double h, const ConeParams& params);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Poincaré-ball distance. Inputs are radially clamped to norm ≤ 1 − 1e-5 first.
double poincare_distance(std::span<const double> u, std::span<const double> v);

struct DensityEstimate {
  /// Mean Euclidean distance to the k nearest other points.
  std::vector<double> raw;
  /// raw min-max rescaled to [0, 1] within the point set; 0.5 everywhere when max == min.
  std::vector<double> normalized;
};

/// Throws ContractError unless points.size() > k and k ≥ 1.
DensityEstimate knn_density(std::span<const Point2> points, std::size_t k);

/// Min-max rescale to [0, 1]; (numerically) constant input maps to 0.5.
std::vector<double> minmax_normalize(std::span<const double> values);

}  // namespace wlsa::geometry
