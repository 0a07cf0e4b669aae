// SPDX-License-Identifier: Apache-2.0
//
// Single-class average precision, kept as a reference point next to IPD.

#ifndef IPD_BASELINES_H_
#define IPD_BASELINES_H_

#include <span>
#include <vector>

#include "ipd/geometry.h"

namespace ipd {

inline constexpr double kDefaultApIouThreshold = 0.5;

struct PrCurvePoint {
  double recall = 0.0;
  double precision = 0.0;
  double confidence = 0.0;
};

// Precision/recall after each prediction, predictions taken in descending
// confidence over all images (stable on ties: image order, then box order).
// Each prediction claims the unmatched ground truth of highest IOU in its image
// if that IOU reaches iou_threshold; otherwise it is a false positive.
std::vector<PrCurvePoint> pr_curve(std::span<const std::vector<BBox>> gt,
                                   std::span<const std::vector<BBox>> pred,
                                   double iou_threshold = kDefaultApIouThreshold);

// All-point interpolated AP (area under the monotone precision envelope).
// Throws UndefinedApError when there is no ground truth in any image.
double average_precision(std::span<const std::vector<BBox>> gt,
                         std::span<const std::vector<BBox>> pred,
                         double iou_threshold = kDefaultApIouThreshold);

}  // namespace ipd

#endif  // IPD_BASELINES_H_
