// SPDX-License-Identifier: Apache-2.0
//
// Paired real/synthetic scenes with known correspondences, a known affine
// misalignment and controlled detector quality. Used as the ground-truth
// oracle for registration, matching and IPD tests and for CLI test data.

#ifndef IPD_SCENEGEN_H_
#define IPD_SCENEGEN_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ipd/geometry.h"
#include "ipd/ingestion.h"
#include "ipd/labels.h"
#include "ipd/matching.h"

namespace ipd {

// Per-instance target IOU is mean + spread * (2u - 1), where u is a latent
// difficulty shared by an instance across both domains. Identical profiles
// therefore request identical IOUs for corresponding instances.
struct DetectorProfile {
  double mean_iou = 0.8;
  double spread = 0.0;
};

struct SceneSpec {
  int n_instances = 20;
  int width_px = 1024;
  int height_px = 768;
  // True synthetic -> real map.
  AffineTransform2D transform;
  double center_noise_sigma = 0.0;
  double dropout_real = 0.0;
  double dropout_synth = 0.0;
  DetectorProfile detector_real;
  DetectorProfile detector_synth;
  // Synthetic box side lengths are drawn from [min_box_px, max_box_px].
  double min_box_px = 10.0;
  double max_box_px = 30.0;
  std::uint64_t rng_seed = 0;
  std::string image_id = "img0";
};

// Throws InputError when the spec is invalid, including any detector profile
// that can request an IOU <= 0 or >= 1.
void validate(const SceneSpec& spec);

struct ScenePair {
  ImageLabels real;
  ImageLabels synth;
  // True (real_index, synth_index) pairs of instances visible in both images,
  // sorted by real_index; distance is 0.
  std::vector<InstancePair> correspondence;
  // IOU of each ground-truth box with its own prediction, index-aligned with
  // gt_boxes.
  std::vector<double> real_iou;
  std::vector<double> synth_iou;
};

// Deterministic per seed. Instances are placed so that no prediction overlaps
// a neighbor's ground truth in either frame, which makes each performance
// value equal to the instance's own realized IOU. Throws InputError if the
// frame is too crowded to place n_instances.
ScenePair generate_scene_pair(const SceneSpec& spec);

// Mean |real_iou - synth_iou| over the true correspondences; 0 pairs -> NaN.
double oracle_ipd(const ScenePair& scene);

// Translates `gt` along `angle_rad` until its IOU with the original is within
// 1e-9 of target. Throws InputError when target is outside (0, 1].
BBox perturb_box_along(const BBox& gt, double target_iou, double angle_rad);
BBox perturb_box_to_target_iou(const BBox& gt, double target_iou,
                               std::mt19937_64& rng);

// Random rotation-scale-rotation map with det > 0 and condition number at most
// max_condition, roughly preserving the frame center.
AffineTransform2D random_well_conditioned_affine(std::uint64_t seed,
                                                 double max_condition,
                                                 int width_px, int height_px);

struct SceneDatasetPaths {
  std::filesystem::path real_manifest;
  std::filesystem::path synth_manifest;
};

// Writes label files plus a real and a synthetic manifest, both carrying the
// image pairing, under `dir`.
SceneDatasetPaths write_scene_dataset(std::span<const ScenePair> scenes,
                                      const std::filesystem::path& dir,
                                      CoordinateMode mode,
                                      const std::string& real_id = "real",
                                      const std::string& synth_id = "synth");

// Uniform double in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng);

}  // namespace ipd

#endif  // IPD_SCENEGEN_H_
