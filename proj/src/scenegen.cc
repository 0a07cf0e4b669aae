// SPDX-License-Identifier: Apache-2.0

#include "ipd/scenegen.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "ipd/errors.h"

namespace ipd {
namespace {

double gaussian(std::mt19937_64& rng) {
  // Box-Muller; u1 kept away from 0.
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(v[i - 1], v[std::min(j, i - 1)]);
  }
}

void validate_profile(const DetectorProfile& p, const char* which) {
  if (!(std::isfinite(p.mean_iou) && std::isfinite(p.spread) && p.spread >= 0.0)) {
    throw InputError(std::string(which) + " detector profile must be finite");
  }
  if (!(p.mean_iou - p.spread > 0.0 && p.mean_iou + p.spread < 1.0)) {
    throw InputError(std::string(which) +
                     " detector profile requests an IOU outside (0,1)");
  }
}

double target_iou(const DetectorProfile& p, double u) {
  return p.mean_iou + p.spread * (2.0 * u - 1.0);
}

struct Placed {
  BBox synth;
  BBox real;
};

// True when 3x-expanded boxes overlap; predictions shift by less than one box
// size so separated instances never see a neighbor's prediction.
bool crowded(const BBox& a, const BBox& b) {
  return std::abs(a.cx - b.cx) < 1.5 * (a.w + b.w) &&
         std::abs(a.cy - b.cy) < 1.5 * (a.h + b.h);
}

}  // namespace

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void validate(const SceneSpec& spec) {
  if (spec.n_instances < 0) throw InputError("n_instances must be >= 0");
  if (spec.width_px <= 0 || spec.height_px <= 0) {
    throw InputError("scene frame must have positive dimensions");
  }
  if (!spec.transform.is_finite() || std::abs(spec.transform.det()) < 1e-9) {
    throw InputError("scene transform must be finite and non-singular");
  }
  if (!(std::isfinite(spec.center_noise_sigma) && spec.center_noise_sigma >= 0.0)) {
    throw InputError("center_noise_sigma must be finite and >= 0");
  }
  if (!(spec.dropout_real >= 0.0 && spec.dropout_real < 1.0 &&
        spec.dropout_synth >= 0.0 && spec.dropout_synth < 1.0)) {
    throw InputError("dropout fractions must lie in [0,1)");
  }
  if (!(spec.min_box_px > 0.0 && spec.max_box_px >= spec.min_box_px)) {
    throw InputError("box size range must satisfy 0 < min <= max");
  }
  validate_profile(spec.detector_real, "real");
  validate_profile(spec.detector_synth, "synthetic");
}

BBox perturb_box_along(const BBox& gt, double target, double angle_rad) {
  validate(gt);
  if (!(target > 0.0 && target <= 1.0)) {
    throw InputError("target IOU must lie in (0,1]");
  }
  if (target == 1.0) return gt;
  const double c = std::cos(angle_rad), s = std::sin(angle_rad);
  const auto shifted = [&](double r) {
    BBox b = gt;
    b.cx += r * c;
    b.cy += r * s;
    return b;
  };
  // IOU falls monotonically from 1 at r = 0 to 0 by r = 2 (w + h).
  double lo = 0.0, hi = 2.0 * (gt.w + gt.h);
  for (int i = 0; i < 200 && hi - lo > 1e-12 * (gt.w + gt.h); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (iou(gt, shifted(mid)) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return shifted(0.5 * (lo + hi));
}

BBox perturb_box_to_target_iou(const BBox& gt, double target,
                               std::mt19937_64& rng) {
  const double angle = 2.0 * std::numbers::pi * uniform01(rng);
  return perturb_box_along(gt, target, angle);
}

AffineTransform2D random_well_conditioned_affine(std::uint64_t seed,
                                                 double max_condition,
                                                 int width_px, int height_px) {
  if (!(max_condition >= 1.0)) throw InputError("max_condition must be >= 1");
  std::mt19937_64 rng(seed);
  const double two_pi = 2.0 * std::numbers::pi;
  const double alpha = two_pi * uniform01(rng);
  const double beta = two_pi * uniform01(rng);
  const double s1 = 0.8 + 0.4 * uniform01(rng);
  const double cond = 1.0 + (max_condition - 1.0) * uniform01(rng);
  const double s2 = s1 / cond;
  // A = R(alpha) diag(s1, s2) R(beta)
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  AffineTransform2D t;
  t.a11 = ca * s1 * cb - sa * s2 * sb;
  t.a12 = -ca * s1 * sb - sa * s2 * cb;
  t.a21 = sa * s1 * cb + ca * s2 * sb;
  t.a22 = -sa * s1 * sb + ca * s2 * cb;
  const double cx = 0.5 * width_px, cy = 0.5 * height_px;
  const double ox = 0.05 * width_px * (2.0 * uniform01(rng) - 1.0);
  const double oy = 0.05 * height_px * (2.0 * uniform01(rng) - 1.0);
  t.tx = cx + ox - (t.a11 * cx + t.a12 * cy);
  t.ty = cy + oy - (t.a21 * cx + t.a22 * cy);
  return t;
}

ScenePair generate_scene_pair(const SceneSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.rng_seed);
  const double w = spec.width_px, h = spec.height_px;
  const double size_scale = std::sqrt(std::abs(spec.transform.det()));

  std::vector<Placed> placed;
  constexpr int kAttempts = 2000;
  for (int i = 0; i < spec.n_instances; ++i) {
    bool ok = false;
    for (int attempt = 0; attempt < kAttempts && !ok; ++attempt) {
      Placed p;
      p.synth.w = spec.min_box_px + (spec.max_box_px - spec.min_box_px) * uniform01(rng);
      p.synth.h = spec.min_box_px + (spec.max_box_px - spec.min_box_px) * uniform01(rng);
      p.synth.cx = p.synth.w + (w - 2.0 * p.synth.w) * uniform01(rng);
      p.synth.cy = p.synth.h + (h - 2.0 * p.synth.h) * uniform01(rng);
      const Point2 rc = apply_affine(spec.transform, {p.synth.cx, p.synth.cy});
      p.real = p.synth;
      p.real.cx = rc.x;
      p.real.cy = rc.y;
      p.real.w = p.synth.w * size_scale;
      p.real.h = p.synth.h * size_scale;
      if (p.real.cx < p.real.w || p.real.cx > w - p.real.w ||
          p.real.cy < p.real.h || p.real.cy > h - p.real.h) {
        continue;
      }
      ok = std::none_of(placed.begin(), placed.end(), [&](const Placed& q) {
        return crowded(p.synth, q.synth) || crowded(p.real, q.real);
      });
      if (ok) placed.push_back(p);
    }
    if (!ok) {
      throw InputError("could not place " + std::to_string(spec.n_instances) +
                       " separated instances in a " +
                       std::to_string(spec.width_px) + "x" +
                       std::to_string(spec.height_px) + " frame");
    }
  }

  struct Instance {
    int id;
    bool in_real;
    bool in_synth;
    double difficulty;
  };
  std::vector<Instance> inst;
  for (std::size_t i = 0; i < placed.size(); ++i) {
    Placed& p = placed[i];
    p.real.cx += spec.center_noise_sigma * gaussian(rng);
    p.real.cy += spec.center_noise_sigma * gaussian(rng);
    const bool in_real = uniform01(rng) >= spec.dropout_real;
    const bool in_synth = uniform01(rng) >= spec.dropout_synth;
    inst.push_back({static_cast<int>(i), in_real, in_synth, uniform01(rng)});
  }

  std::vector<int> real_order, synth_order;
  for (const Instance& in : inst) {
    if (in.in_real) real_order.push_back(in.id);
    if (in.in_synth) synth_order.push_back(in.id);
  }
  shuffle(real_order, rng);
  shuffle(synth_order, rng);

  ScenePair out;
  const auto fill = [&](ImageLabels& img, std::vector<double>& realized,
                        const std::vector<int>& order, bool real_side,
                        const std::string& suffix) {
    const DetectorProfile& prof =
        real_side ? spec.detector_real : spec.detector_synth;
    img.image_id = spec.image_id + suffix;
    img.width_px = spec.width_px;
    img.height_px = spec.height_px;
    for (int id : order) {
      const BBox& gt = real_side ? placed[id].real : placed[id].synth;
      BBox pred = perturb_box_to_target_iou(
          gt, target_iou(prof, inst[id].difficulty), rng);
      pred.confidence = 0.5 + 0.5 * uniform01(rng);
      img.gt_boxes.push_back(gt);
      img.pred_boxes.push_back(pred);
      realized.push_back(iou(gt, pred));
    }
  };
  fill(out.real, out.real_iou, real_order, true, "_real");
  fill(out.synth, out.synth_iou, synth_order, false, "_synth");

  std::vector<int> synth_pos(placed.size(), -1);
  for (std::size_t s = 0; s < synth_order.size(); ++s) {
    synth_pos[synth_order[s]] = static_cast<int>(s);
  }
  for (std::size_t r = 0; r < real_order.size(); ++r) {
    const int s = synth_pos[real_order[r]];
    if (s >= 0) out.correspondence.push_back({static_cast<int>(r), s, 0.0});
  }
  return out;
}

double oracle_ipd(const ScenePair& scene) {
  if (scene.correspondence.empty()) return std::nan("");
  double sum = 0.0;
  for (const InstancePair& p : scene.correspondence) {
    sum += std::abs(scene.real_iou[p.real_index] - scene.synth_iou[p.synth_index]);
  }
  return sum / static_cast<double>(scene.correspondence.size());
}

SceneDatasetPaths write_scene_dataset(std::span<const ScenePair> scenes,
                                      const std::filesystem::path& dir,
                                      CoordinateMode mode,
                                      const std::string& real_id,
                                      const std::string& synth_id) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "real");
  fs::create_directories(dir / "synth");
  DatasetManifest real_m, synth_m;
  real_m.dataset_id = real_id;
  synth_m.dataset_id = synth_id;
  real_m.coordinate_mode = synth_m.coordinate_mode = mode;

  const auto write = [&](const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
  };
  const auto emit = [&](const ImageLabels& img, const std::string& sub,
                        DatasetManifest& m) {
    const ImageDims dims{img.width_px, img.height_px};
    const std::string gt_rel = sub + "/" + img.image_id + ".gt.txt";
    const std::string pred_rel = sub + "/" + img.image_id + ".pred.txt";
    write(dir / gt_rel, serialize_label_file(img.gt_boxes, mode, dims));
    write(dir / pred_rel, serialize_label_file(img.pred_boxes, mode, dims));
    m.entries.push_back({img.image_id, gt_rel, pred_rel, img.width_px, img.height_px});
  };
  for (const ScenePair& s : scenes) {
    emit(s.real, "real", real_m);
    emit(s.synth, "synth", synth_m);
    real_m.pairing.push_back({s.real.image_id, s.synth.image_id});
  }
  synth_m.pairing = real_m.pairing;

  SceneDatasetPaths paths{dir / "real_manifest.json", dir / "synth_manifest.json"};
  write_manifest(real_m, paths.real_manifest);
  write_manifest(synth_m, paths.synth_manifest);
  return paths;
}

}  // namespace ipd
