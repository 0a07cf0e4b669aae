// SPDX-License-Identifier: Apache-2.0

#ifndef IPD_MATCHING_H_
#define IPD_MATCHING_H_

#include <span>
#include <utility>
#include <vector>

#include "ipd/geometry.h"

namespace ipd {

struct InstancePair {
  int real_index = 0;
  int synth_index = 0;
  double distance = 0.0;

  friend bool operator==(const InstancePair&, const InstancePair&) = default;
};

// One-to-one correspondences for one image pair. Pairs are sorted by
// real_index; the unmatched lists are sorted ascending.
struct InstancePairing {
  std::vector<InstancePair> pairs;
  std::vector<int> unmatched_real;
  std::vector<int> unmatched_synth;
  double gate_distance = 0.0;
};

// Minimum-total-cost assignment of min(n_rows, n_cols) pairs over a row-major
// cost matrix (Hungarian method with potentials). Returns (row, col) pairs
// sorted by row. Throws InputError on non-finite or negative costs.
std::vector<std::pair<int, int>> assignment_min_cost(std::span<const double> cost,
                                                     int n_rows, int n_cols);

// Optimal assignment between transformed synthetic centers and real centers
// over distances clipped at gate_distance; assigned pairs farther apart than
// gate_distance are then moved to the unmatched lists.
InstancePairing match_instances(const AffineTransform2D& transform,
                                std::span<const Point2> synth_centers,
                                std::span<const Point2> real_centers,
                                double gate_distance);

// Half the median ground-truth box diagonal; 0 for an empty set.
double default_gate_distance(std::span<const BBox> real_gt);

}  // namespace ipd

#endif  // IPD_MATCHING_H_
