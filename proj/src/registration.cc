// SPDX-License-Identifier: Apache-2.0

#include "ipd/registration.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "ipd/errors.h"

namespace ipd {
namespace {

// Unbiased index in [0, n) by rejection; independent of the standard
// library's distribution implementations so streams are portable.
std::size_t draw_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t range = n;
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return static_cast<std::size_t>(v % range);
}

std::array<std::size_t, 3> draw_triple(std::mt19937_64& rng, std::size_t n) {
  std::array<std::size_t, 3> idx{};
  idx[0] = draw_index(rng, n);
  do {
    idx[1] = draw_index(rng, n);
  } while (idx[1] == idx[0]);
  do {
    idx[2] = draw_index(rng, n);
  } while (idx[2] == idx[0] || idx[2] == idx[1]);
  return idx;
}

// k nearest neighbors of every point, nearest first, ties by lower index.
std::vector<std::vector<std::size_t>> k_nearest(std::span<const Point2> pts,
                                                std::size_t k) {
  std::vector<std::vector<std::size_t>> out(pts.size());
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    d.clear();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j != i) d.emplace_back(distance(pts[i], pts[j]), j);
    }
    const std::size_t kk = std::min(k, d.size());
    std::partial_sort(d.begin(), d.begin() + kk, d.end());
    for (std::size_t j = 0; j < kk; ++j) out[i].push_back(d[j].second);
  }
  return out;
}

std::size_t nearest_index(const Point2& p, std::span<const Point2> pts) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const double d = distance(p, pts[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

struct Extent {
  double dx = 0.0;
  double dy = 0.0;
};

Extent bounding_extent(std::span<const Point2> pts) {
  double xmin = pts[0].x, xmax = pts[0].x, ymin = pts[0].y, ymax = pts[0].y;
  for (const Point2& p : pts) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  return {xmax - xmin, ymax - ymin};
}

void check_finite(std::span<const Point2> pts, const char* what) {
  for (const Point2& p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw InputError(std::string(what) + " contains a non-finite point");
    }
  }
}

// Real-side neighborhood size for local hypotheses.
constexpr std::size_t kLocalNeighbors = 6;

// Default early exit as a fraction of the real scene diagonal.
constexpr double kEarlyExitFraction = 1e-6;

std::vector<double> nearest_distances(const AffineTransform2D& t,
                                      std::span<const Point2> synth_pts,
                                      std::span<const Point2> real_pts) {
  std::vector<double> nn(synth_pts.size());
  for (std::size_t i = 0; i < synth_pts.size(); ++i) {
    const Point2 q = apply_affine(t, synth_pts[i]);
    double best = std::numeric_limits<double>::infinity();
    for (const Point2& r : real_pts) {
      const double dx = q.x - r.x, dy = q.y - r.y;
      best = std::min(best, dx * dx + dy * dy);
    }
    nn[i] = std::sqrt(best);
  }
  return nn;
}

std::size_t kept_count(std::size_t n_synth, std::size_t n_real,
                       double trim_fraction) {
  const std::size_t k = std::min(n_synth, n_real);
  // The epsilon keeps ceil(0.8 * 5) at 4 despite 0.8 not being representable.
  const auto keep = static_cast<std::size_t>(
      std::ceil((1.0 - trim_fraction) * static_cast<double>(k) - 1e-9));
  return std::clamp<std::size_t>(keep, 1, k);
}

// Indices of the synthetic points whose distances the trimmed score keeps.
std::vector<std::size_t> closest_synth_points(const AffineTransform2D& t,
                                              std::span<const Point2> synth_pts,
                                              std::span<const Point2> real_pts,
                                              double trim_fraction) {
  const std::vector<double> nn = nearest_distances(t, synth_pts, real_pts);
  std::vector<std::size_t> idx(nn.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return nn[a] < nn[b]; });
  idx.resize(kept_count(synth_pts.size(), real_pts.size(), trim_fraction));
  return idx;
}

constexpr std::array<std::array<int, 3>, 6> kBijections = {{
    {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0},
}};

}  // namespace

void validate(const RegistrationConfig& cfg) {
  if (cfg.max_iterations < 1) {
    throw InputError("max_iterations must be at least 1");
  }
  if (!(cfg.trim_fraction >= 0.0 && cfg.trim_fraction <= 1.0)) {
    throw InputError("trim_fraction must lie in [0,1]");
  }
  if (cfg.early_exit_score &&
      !(std::isfinite(*cfg.early_exit_score) && *cfg.early_exit_score >= 0.0)) {
    throw InputError("early_exit_score must be finite and non-negative");
  }
  if (!(cfg.area_ratio_tolerance >= 1.0)) {
    throw InputError("area_ratio_tolerance must be at least 1");
  }
  if (cfg.min_points_for_affine != 3) {
    throw InputError("min_points_for_affine must be 3");
  }
}

double registration_score(const AffineTransform2D& t,
                          std::span<const Point2> synth_pts,
                          std::span<const Point2> real_pts,
                          double trim_fraction) {
  if (synth_pts.empty() || real_pts.empty()) {
    throw InputError("registration_score needs two non-empty point sets");
  }
  if (!(trim_fraction >= 0.0 && trim_fraction <= 1.0)) {
    throw InputError("trim_fraction must lie in [0,1]");
  }
  std::vector<double> nn = nearest_distances(t, synth_pts, real_pts);
  std::sort(nn.begin(), nn.end());
  const std::size_t keep =
      kept_count(synth_pts.size(), real_pts.size(), trim_fraction);
  double sum = 0.0;
  for (std::size_t i = 0; i < keep; ++i) sum += nn[i];
  return sum / static_cast<double>(keep);
}

AffineTransform2D fallback_translation(std::span<const Point2> synth_pts,
                                       std::span<const Point2> real_pts) {
  if (synth_pts.empty() || real_pts.empty()) {
    throw InputError("fallback_translation needs two non-empty point sets");
  }
  Point2 cs, cr;
  for (const Point2& p : synth_pts) {
    cs.x += p.x;
    cs.y += p.y;
  }
  for (const Point2& p : real_pts) {
    cr.x += p.x;
    cr.y += p.y;
  }
  const auto ns = static_cast<double>(synth_pts.size());
  const auto nr = static_cast<double>(real_pts.size());
  return AffineTransform2D::Translation(cr.x / nr - cs.x / ns,
                                        cr.y / nr - cs.y / ns);
}

RegistrationResult register_points(std::span<const Point2> synth_pts,
                                   std::span<const Point2> real_pts,
                                   const RegistrationConfig& cfg) {
  validate(cfg);
  if (synth_pts.empty() || real_pts.empty()) {
    throw InputError("registration needs two non-empty point sets");
  }
  check_finite(synth_pts, "synthetic point set");
  check_finite(real_pts, "real point set");

  RegistrationResult result;
  const auto min_pts = static_cast<std::size_t>(cfg.min_points_for_affine);
  if (synth_pts.size() < min_pts || real_pts.size() < min_pts) {
    result.transform = fallback_translation(synth_pts, real_pts);
    result.score = registration_score(result.transform, synth_pts, real_pts,
                                      cfg.trim_fraction);
    result.used_fallback = true;
    return result;
  }

  const Extent real_ext = bounding_extent(real_pts);
  const Extent synth_ext = bounding_extent(synth_pts);
  const double early_exit = cfg.early_exit_score.value_or(
      kEarlyExitFraction * std::hypot(real_ext.dx, real_ext.dy));
  // Expected |det A|; unknown when either set is flat along an axis.
  const double synth_area = synth_ext.dx * synth_ext.dy;
  const double real_area = real_ext.dx * real_ext.dy;
  const bool check_area = std::isfinite(cfg.area_ratio_tolerance) &&
                          synth_area > 0.0 && real_area > 0.0;
  const double area_ratio = check_area ? real_area / synth_area : 1.0;
  const bool mixed = cfg.sampling == SamplingStrategy::kMixed;
  std::vector<std::vector<std::size_t>> synth_nn, real_nn;
  if (mixed) {
    synth_nn = k_nearest(synth_pts, 2);
    real_nn = k_nearest(real_pts, kLocalNeighbors);
  }

  bool have_best = false;
  double best_score = std::numeric_limits<double>::infinity();
  AffineTransform2D best;
  // Synthetic points that the incumbent places closest to a real point.
  std::vector<std::size_t> inliers;

  const auto try_triples = [&](const std::array<std::size_t, 3>& si,
                               const std::array<std::size_t, 3>& ri) {
    const std::array<Point2, 3> src = {synth_pts[si[0]], synth_pts[si[1]],
                                       synth_pts[si[2]]};
    for (const auto& perm : kBijections) {
      const std::array<Point2, 3> dst = {real_pts[ri[perm[0]]],
                                         real_pts[ri[perm[1]]],
                                         real_pts[ri[perm[2]]]};
      // A collinear destination yields a singular map.
      if (!is_well_posed_triple(dst)) continue;
      const AffineTransform2D h = fit_affine_3pt(src, dst);
      if (!h.is_finite()) continue;
      if (check_area) {
        const double rel = std::abs(h.det()) / area_ratio;
        if (rel > cfg.area_ratio_tolerance || rel * cfg.area_ratio_tolerance < 1.0) {
          continue;
        }
      }
      ++result.hypothesis_count;
      const double s =
          registration_score(h, synth_pts, real_pts, cfg.trim_fraction);
      if (s < best_score) {
        best_score = s;
        best = h;
        have_best = true;
        inliers = closest_synth_points(h, synth_pts, real_pts, cfg.trim_fraction);
      }
    }
  };

  std::mt19937_64 rng(cfg.rng_seed);
  for (int it = 0; it < cfg.max_iterations; ++it) {
    result.iterations_used = it + 1;
    const int kind = mixed ? it % 3 : 0;
    if (kind == 1) {
      // Local: a synthetic point with its two nearest neighbors against a
      // real point with every pair from its neighborhood, which tolerates
      // the neighbor reordering an anisotropic map causes.
      const std::size_t a = draw_index(rng, synth_pts.size());
      const std::size_t b = draw_index(rng, real_pts.size());
      const std::array<std::size_t, 3> si = {a, synth_nn[a][0], synth_nn[a][1]};
      if (!is_well_posed_triple({synth_pts[si[0]], synth_pts[si[1]],
                                 synth_pts[si[2]]})) {
        continue;
      }
      const auto& nb = real_nn[b];
      for (std::size_t j = 0; j < nb.size(); ++j) {
        for (std::size_t l = j + 1; l < nb.size(); ++l) {
          try_triples(si, {b, nb[j], nb[l]});
        }
      }
    } else {
      std::array<std::size_t, 3> si{}, ri{};
      bool guided = false;
      if (kind == 2 && inliers.size() >= 3) {
        // Guided: spread-out triple among the incumbent's inliers, paired
        // with their nearest real points under the incumbent.
        const auto pick = draw_triple(rng, inliers.size());
        for (int k = 0; k < 3; ++k) {
          si[k] = inliers[pick[k]];
          ri[k] = nearest_index(apply_affine(best, synth_pts[si[k]]), real_pts);
        }
        guided = ri[0] != ri[1] && ri[0] != ri[2] && ri[1] != ri[2];
      }
      if (!guided) {
        si = draw_triple(rng, synth_pts.size());
        ri = draw_triple(rng, real_pts.size());
      }
      if (!is_well_posed_triple({synth_pts[si[0]], synth_pts[si[1]],
                                 synth_pts[si[2]]})) {
        continue;
      }
      try_triples(si, ri);
    }
    if (have_best && best_score <= early_exit) break;
  }

  // The centroid translation also competes, so the returned score cannot
  // rise with the budget when early hypotheses were all rejected.
  const AffineTransform2D shift = fallback_translation(synth_pts, real_pts);
  const double shift_score =
      registration_score(shift, synth_pts, real_pts, cfg.trim_fraction);
  if (!have_best || shift_score < best_score) {
    result.transform = shift;
    result.score = shift_score;
    result.used_fallback = true;
    return result;
  }
  result.transform = best;
  result.score = best_score;
  return result;
}

}  // namespace ipd
