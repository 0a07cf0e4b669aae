// SPDX-License-Identifier: Apache-2.0

#include "ipd/pipeline.h"

#include "ipd/errors.h"

namespace ipd {

std::uint64_t stable_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t base, const std::string& real_image_id,
                          const std::string& synth_image_id) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = base ^ stable_hash(real_image_id + '\x1f' + synth_image_id);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ImagePairOutcome register_and_match(const ImageLabels& real,
                                    const ImageLabels& synth,
                                    const PipelineConfig& cfg) {
  ImagePairOutcome out;
  out.real_image_id = real.image_id;
  out.synth_image_id = synth.image_id;
  const std::vector<Point2> real_pts = gt_centers(real);
  const std::vector<Point2> synth_pts = gt_centers(synth);

  const double gate = cfg.gate_distance.value_or(default_gate_distance(real.gt_boxes));
  if (real_pts.empty() || synth_pts.empty()) {
    out.pairing.gate_distance = gate;
    for (int i = 0; i < static_cast<int>(real_pts.size()); ++i) {
      out.pairing.unmatched_real.push_back(i);
    }
    for (int i = 0; i < static_cast<int>(synth_pts.size()); ++i) {
      out.pairing.unmatched_synth.push_back(i);
    }
    return out;
  }
  RegistrationConfig rc = cfg.registration;
  rc.rng_seed = derive_seed(cfg.registration.rng_seed, real.image_id, synth.image_id);
  out.registration = register_points(synth_pts, real_pts, rc);
  out.pairing = match_instances(out.registration.transform, synth_pts, real_pts, gate);
  return out;
}

PipelineOutcome run_pipeline(const Dataset& real, const Dataset& synth,
                             std::span<const ImagePair> pairing,
                             const PipelineConfig& cfg) {
  PipelineOutcome out;
  std::vector<ImageLabels> real_imgs, synth_imgs;
  std::vector<InstancePairing> pairings;
  for (const ImagePair& p : pairing) {
    const ImageLabels* r = real.find(p.real_image_id);
    const ImageLabels* s = synth.find(p.synth_image_id);
    if (r == nullptr) {
      throw InputError("dataset " + real.dataset_id + " has no image " +
                       p.real_image_id);
    }
    if (s == nullptr) {
      throw InputError("dataset " + synth.dataset_id + " has no image " +
                       p.synth_image_id);
    }
    out.image_pairs.push_back(register_and_match(*r, *s, cfg));
    real_imgs.push_back(*r);
    synth_imgs.push_back(*s);
    pairings.push_back(out.image_pairs.back().pairing);
  }
  out.result = evaluate_pair(real_imgs, synth_imgs, pairings, cfg.conf_threshold);
  return out;
}

std::vector<ImagePair> resolve_pairing(const Dataset& real, const Dataset& synth) {
  if (!real.pairing.empty() && !synth.pairing.empty() &&
      real.pairing != synth.pairing) {
    throw InputError("datasets " + real.dataset_id + " and " + synth.dataset_id +
                     " carry different pairing tables");
  }
  const std::vector<ImagePair>& p =
      real.pairing.empty() ? synth.pairing : real.pairing;
  for (const ImagePair& ip : p) {
    if (real.find(ip.real_image_id) == nullptr) {
      throw InputError("pairing references unknown image_id " + ip.real_image_id +
                       " in dataset " + real.dataset_id);
    }
    if (synth.find(ip.synth_image_id) == nullptr) {
      throw InputError("pairing references unknown image_id " +
                       ip.synth_image_id + " in dataset " + synth.dataset_id);
    }
  }
  return p;
}

}  // namespace ipd
