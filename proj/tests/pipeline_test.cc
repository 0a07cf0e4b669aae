// SPDX-License-Identifier: Apache-2.0

#include "ipd/pipeline.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "ipd/errors.h"
#include "ipd/scenegen.h"
#include "test_util.h"

namespace ipd {
namespace {

struct Datasets {
  Dataset real;
  Dataset synth;
  std::vector<ScenePair> scenes;
};

Datasets make_datasets(int n_pairs, SceneSpec spec, std::uint64_t seed) {
  Datasets d;
  d.real.dataset_id = "real";
  d.synth.dataset_id = "synth";
  for (int k = 0; k < n_pairs; ++k) {
    spec.image_id = "img" + std::to_string(k);
    spec.rng_seed = seed + static_cast<std::uint64_t>(k);
    spec.transform = random_well_conditioned_affine(seed * 31 + k, 3.0,
                                                    spec.width_px, spec.height_px);
    d.scenes.push_back(generate_scene_pair(spec));
    d.real.images.push_back(d.scenes.back().real);
    d.synth.images.push_back(d.scenes.back().synth);
    d.real.pairing.push_back({d.scenes.back().real.image_id,
                              d.scenes.back().synth.image_id});
  }
  d.synth.pairing = d.real.pairing;
  return d;
}

bool same_pairs(const InstancePairing& got, const std::vector<InstancePair>& truth) {
  std::set<std::pair<int, int>> a, b;
  for (const InstancePair& p : got.pairs) a.insert({p.real_index, p.synth_index});
  for (const InstancePair& p : truth) b.insert({p.real_index, p.synth_index});
  return a == b;
}

TEST(DeriveSeedTest, StableAndDistinct) {
  EXPECT_EQ(stable_hash(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(stable_hash("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(derive_seed(1, "a", "b"), derive_seed(1, "a", "b"));
  EXPECT_NE(derive_seed(1, "a", "b"), derive_seed(2, "a", "b"));
  EXPECT_NE(derive_seed(1, "a", "b"), derive_seed(1, "b", "a"));
  EXPECT_NE(derive_seed(1, "ab", "c"), derive_seed(1, "a", "bc"));
}

TEST(RegisterAndMatchTest, EmptyGroundTruthGivesEmptyPairing) {
  ImageLabels real{"r", 100, 100, {}, {}};
  ImageLabels synth{"s", 100, 100, {BBox{50, 50, 10, 10}}, {}};
  const ImagePairOutcome o = register_and_match(real, synth, {});
  EXPECT_TRUE(o.pairing.pairs.empty());
  EXPECT_EQ(o.pairing.unmatched_synth, std::vector<int>{0});
}

TEST(RunPipelineTest, RecoversOracleIpd) {
  SceneSpec spec;
  spec.n_instances = 25;
  spec.center_noise_sigma = 0.5;
  spec.dropout_real = 0.2;
  spec.dropout_synth = 0.2;
  spec.detector_real = {0.9, 0.0};
  spec.detector_synth = {0.6, 0.0};
  const Datasets d = make_datasets(5, spec, 300);
  const PipelineOutcome out =
      run_pipeline(d.real, d.synth, resolve_pairing(d.real, d.synth), {});
  ASSERT_EQ(out.image_pairs.size(), 5u);
  int pairs = 0;
  double sum = 0.0;
  for (size_t k = 0; k < d.scenes.size(); ++k) {
    EXPECT_TRUE(same_pairs(out.image_pairs[k].pairing, d.scenes[k].correspondence))
        << k;
    pairs += static_cast<int>(d.scenes[k].correspondence.size());
    sum += oracle_ipd(d.scenes[k]) * d.scenes[k].correspondence.size();
  }
  EXPECT_EQ(out.result.instance_count, pairs);
  EXPECT_NEAR(out.result.ipd, sum / pairs, 1e-9);
  EXPECT_NEAR(out.result.ipd, 0.3, 2e-3);
}

TEST(RunPipelineTest, IdenticalProfilesGiveNearZero) {
  SceneSpec spec;
  spec.n_instances = 20;
  spec.center_noise_sigma = 0.5;
  spec.detector_real = spec.detector_synth = {0.75, 0.15};
  const Datasets d = make_datasets(3, spec, 700);
  const PipelineOutcome out =
      run_pipeline(d.real, d.synth, resolve_pairing(d.real, d.synth), {});
  EXPECT_LE(out.result.ipd, 2e-3);
}

TEST(RunPipelineTest, DeterministicAcrossRuns) {
  SceneSpec spec;
  spec.center_noise_sigma = 1.0;
  spec.dropout_synth = 0.3;
  spec.detector_real = {0.7, 0.2};
  spec.detector_synth = {0.5, 0.2};
  const Datasets d = make_datasets(3, spec, 900);
  PipelineConfig cfg;
  cfg.registration.rng_seed = 12;
  const auto pairing = resolve_pairing(d.real, d.synth);
  const PipelineOutcome a = run_pipeline(d.real, d.synth, pairing, cfg);
  const PipelineOutcome b = run_pipeline(d.real, d.synth, pairing, cfg);
  EXPECT_EQ(a.result, b.result);
  for (size_t k = 0; k < a.image_pairs.size(); ++k) {
    EXPECT_EQ(a.image_pairs[k].registration.transform,
              b.image_pairs[k].registration.transform);
    EXPECT_EQ(a.image_pairs[k].pairing.pairs, b.image_pairs[k].pairing.pairs);
  }
}

TEST(RunPipelineTest, UnknownImageIsAnInputError) {
  const Datasets d = make_datasets(1, SceneSpec{}, 1);
  const std::vector<ImagePair> bad = {{"nope", d.synth.images[0].image_id}};
  EXPECT_THROW(run_pipeline(d.real, d.synth, bad, {}), InputError);
}

TEST(ResolvePairingTest, EitherSideOrBothAgreeing) {
  Datasets d = make_datasets(2, SceneSpec{}, 5);
  const auto expected = d.real.pairing;
  EXPECT_EQ(resolve_pairing(d.real, d.synth), expected);
  d.synth.pairing.clear();
  EXPECT_EQ(resolve_pairing(d.real, d.synth), expected);
  d.synth.pairing = expected;
  d.real.pairing.clear();
  EXPECT_EQ(resolve_pairing(d.real, d.synth), expected);
  d.real.pairing = {expected[1], expected[0]};
  EXPECT_THROW(resolve_pairing(d.real, d.synth), InputError);
  d.real.pairing = {{"ghost", expected[0].synth_image_id}};
  d.synth.pairing.clear();
  EXPECT_THROW(resolve_pairing(d.real, d.synth), InputError);
}

}  // namespace
}  // namespace ipd
