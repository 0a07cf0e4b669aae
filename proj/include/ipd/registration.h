// SPDX-License-Identifier: Apache-2.0
//
// Point-set registration of synthetic onto real bounding-box centers. A RANSAC
// loop draws one triple from each set per iteration, fits the affine map for
// all six bijections between the triples and keeps the map with the lowest
// trimmed mean nearest-neighbor distance. The returned transform maps
// synthetic coordinates into the real image.

#ifndef IPD_REGISTRATION_H_
#define IPD_REGISTRATION_H_

#include <cstdint>
#include <optional>
#include <span>

#include "ipd/geometry.h"

namespace ipd {

// How each iteration chooses its two triples.
enum class SamplingStrategy {
  // Both triples uniformly at random.
  kUniform,
  // Cycles three kinds of iteration: uniform; local (a synthetic point and
  // its two nearest neighbors against a real point paired with each pair of
  // its six nearest neighbors); guided (three of the incumbent's inlier
  // synthetic points against their nearest real points under it).
  kMixed,
};

struct RegistrationConfig {
  int max_iterations = 2000;
  // Unset: 1e-6 times the diagonal of the real points' bounding box.
  std::optional<double> early_exit_score;
  std::uint64_t rng_seed = 0;
  int min_points_for_affine = 3;
  double trim_fraction = 0.2;
  SamplingStrategy sampling = SamplingStrategy::kMixed;
  // Hypotheses whose |det A| differs from the ratio of the real to synthetic
  // bounding-box areas by more than this factor are rejected. Such maps
  // collapse the synthetic set onto a few real points. Infinity disables.
  double area_ratio_tolerance = 10.0;
};

// Throws InputError on an invalid configuration.
void validate(const RegistrationConfig& cfg);

struct RegistrationResult {
  AffineTransform2D transform;
  double score = 0.0;
  int iterations_used = 0;
  int hypothesis_count = 0;
  // Set when the centroid translation was returned: one of the sets was too
  // small, every sample was degenerate, or no hypothesis scored better.
  bool used_fallback = false;
};

// Trimmed mean of nearest-real-point distances of the transformed synthetic
// points, keeping the ceil((1 - trim) * min(n, m)) smallest.
double registration_score(const AffineTransform2D& t,
                          std::span<const Point2> synth_pts,
                          std::span<const Point2> real_pts,
                          double trim_fraction);

// Translation taking the synthetic centroid onto the real centroid.
AffineTransform2D fallback_translation(std::span<const Point2> synth_pts,
                                       std::span<const Point2> real_pts);

// Deterministic for fixed inputs, input order and seed.
RegistrationResult register_points(std::span<const Point2> synth_pts,
                                   std::span<const Point2> real_pts,
                                   const RegistrationConfig& cfg);

}  // namespace ipd

#endif  // IPD_REGISTRATION_H_
