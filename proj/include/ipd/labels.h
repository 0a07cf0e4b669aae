// SPDX-License-Identifier: Apache-2.0

#ifndef IPD_LABELS_H_
#define IPD_LABELS_H_

#include <string>
#include <vector>

#include "ipd/geometry.h"

namespace ipd {

// Ground truth and detector output for one image, in pixel units.
struct ImageLabels {
  std::string image_id;
  int width_px = 0;
  int height_px = 0;
  std::vector<BBox> gt_boxes;
  std::vector<BBox> pred_boxes;
};

// Checks box validity, frame bounds (centers within [-0.1, 1.1] of the frame)
// and confidence presence. Throws InputError naming the image.
void validate(const ImageLabels& labels);

std::vector<Point2> gt_centers(const ImageLabels& labels);

}  // namespace ipd

#endif  // IPD_LABELS_H_
