// SPDX-License-Identifier: Apache-2.0
//
// End-to-end evaluation of one real/synthetic dataset pair: per image pair,
// register synthetic onto real centers, match instances, then aggregate IPD.

#ifndef IPD_PIPELINE_H_
#define IPD_PIPELINE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ipd/ingestion.h"
#include "ipd/matching.h"
#include "ipd/metric.h"
#include "ipd/registration.h"

namespace ipd {

struct PipelineConfig {
  RegistrationConfig registration;
  // Unset: default_gate_distance() of each real image.
  std::optional<double> gate_distance;
  double conf_threshold = kDefaultConfThreshold;
};

struct ImagePairOutcome {
  std::string real_image_id;
  std::string synth_image_id;
  RegistrationResult registration;
  InstancePairing pairing;
};

struct PipelineOutcome {
  IpdResult result;
  std::vector<ImagePairOutcome> image_pairs;
};

// FNV-1a 64-bit, stable across platforms.
std::uint64_t stable_hash(const std::string& s);

// Per-image-pair registration seed derived from the run seed.
std::uint64_t derive_seed(std::uint64_t base, const std::string& real_image_id,
                          const std::string& synth_image_id);

// Registers and matches one image pair. Images without ground truth on either
// side yield an empty pairing.
ImagePairOutcome register_and_match(const ImageLabels& real,
                                    const ImageLabels& synth,
                                    const PipelineConfig& cfg);

// Runs every image pair in `pairing` in order. Throws InputError for ids not
// present in the datasets and NoInstancesError when nothing was matched.
PipelineOutcome run_pipeline(const Dataset& real, const Dataset& synth,
                             std::span<const ImagePair> pairing,
                             const PipelineConfig& cfg);

// The pairing table of a real/synthetic dataset pair: whichever manifest
// carries one; both must agree when both do. Throws InputError otherwise.
std::vector<ImagePair> resolve_pairing(const Dataset& real, const Dataset& synth);

}  // namespace ipd

#endif  // IPD_PIPELINE_H_
