// SPDX-License-Identifier: Apache-2.0

#include "ipd/baselines.h"

#include <algorithm>
#include <numeric>

#include "ipd/errors.h"

namespace ipd {
namespace {

struct Ranked {
  std::size_t image;
  std::size_t box;
  double confidence;
};

void check_inputs(std::span<const std::vector<BBox>> gt,
                  std::span<const std::vector<BBox>> pred,
                  double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw InputError("AP IOU threshold must lie in (0,1)");
  }
  if (gt.size() != pred.size()) {
    throw InputError("ground truth and predictions must cover the same images");
  }
  for (const auto& img : pred) {
    for (const BBox& b : img) {
      if (!b.confidence) throw InputError("predicted box without confidence");
    }
  }
}

std::size_t total_gt(std::span<const std::vector<BBox>> gt) {
  std::size_t n = 0;
  for (const auto& img : gt) n += img.size();
  return n;
}

}  // namespace

std::vector<PrCurvePoint> pr_curve(std::span<const std::vector<BBox>> gt,
                                   std::span<const std::vector<BBox>> pred,
                                   double iou_threshold) {
  check_inputs(gt, pred, iou_threshold);
  const std::size_t n_gt = total_gt(gt);
  if (n_gt == 0) throw UndefinedApError("AP is undefined without ground truth");

  std::vector<Ranked> ranked;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < pred[i].size(); ++j) {
      ranked.push_back({i, j, *pred[i][j].confidence});
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Ranked& a, const Ranked& b) {
                     return a.confidence > b.confidence;
                   });

  std::vector<std::vector<char>> claimed(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) claimed[i].assign(gt[i].size(), 0);

  std::vector<PrCurvePoint> curve;
  curve.reserve(ranked.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    const Ranked& r = ranked[k];
    const BBox& p = pred[r.image][r.box];
    double best = -1.0;
    std::size_t best_gt = 0;
    for (std::size_t g = 0; g < gt[r.image].size(); ++g) {
      if (claimed[r.image][g]) continue;
      const double v = iou(gt[r.image][g], p);
      if (v > best) {
        best = v;
        best_gt = g;
      }
    }
    if (best >= iou_threshold) {
      claimed[r.image][best_gt] = 1;
      ++tp;
    }
    curve.push_back({static_cast<double>(tp) / static_cast<double>(n_gt),
                     static_cast<double>(tp) / static_cast<double>(k + 1),
                     r.confidence});
  }
  return curve;
}

double average_precision(std::span<const std::vector<BBox>> gt,
                         std::span<const std::vector<BBox>> pred,
                         double iou_threshold) {
  const std::vector<PrCurvePoint> curve = pr_curve(gt, pred, iou_threshold);
  // VOC-style sentinels: recall 0 and 1 with precision 0.
  std::vector<double> rec{0.0}, prec{0.0};
  for (const PrCurvePoint& p : curve) {
    rec.push_back(p.recall);
    prec.push_back(p.precision);
  }
  rec.push_back(1.0);
  prec.push_back(0.0);
  for (std::size_t i = prec.size() - 1; i > 0; --i) {
    prec[i - 1] = std::max(prec[i - 1], prec[i]);
  }
  double ap = 0.0;
  for (std::size_t i = 1; i < rec.size(); ++i) {
    ap += (rec[i] - rec[i - 1]) * prec[i];
  }
  return std::clamp(ap, 0.0, 1.0);
}

}  // namespace ipd
