// SPDX-License-Identifier: Apache-2.0

#include "ipd/metric.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "ipd/errors.h"

namespace ipd {

IouTable::IouTable(int gt_count, int pred_count)
    : gt_count_(gt_count),
      pred_count_(pred_count),
      values_(static_cast<std::size_t>(gt_count) * pred_count, 0.0) {}

double IouTable::at(int gt, int pred) const {
  return values_[static_cast<std::size_t>(gt) * pred_count_ + pred];
}

double& IouTable::at(int gt, int pred) {
  return values_[static_cast<std::size_t>(gt) * pred_count_ + pred];
}

std::span<const double> IouTable::row(int gt) const {
  return std::span<const double>(values_).subspan(
      static_cast<std::size_t>(gt) * pred_count_, pred_count_);
}

IouTable iou_table(std::span<const BBox> gt, std::span<const BBox> pred) {
  IouTable t(static_cast<int>(gt.size()), static_cast<int>(pred.size()));
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) {
      t.at(static_cast<int>(i), static_cast<int>(j)) = iou(gt[i], pred[j]);
    }
  }
  // Validate gt rows even when there are no predictions.
  for (const BBox& b : gt) validate(b);
  return t;
}

double performance_value(const IouTable& table, int gt_index) {
  if (gt_index < 0 || gt_index >= table.gt_count()) {
    throw InputError("gt_index " + std::to_string(gt_index) +
                     " out of range for table with " +
                     std::to_string(table.gt_count()) + " rows");
  }
  const auto row = table.row(gt_index);
  if (row.empty()) return 0.0;
  return *std::max_element(row.begin(), row.end());
}

IpdResult ipd(std::span<const PerfRecord> records) {
  if (records.empty()) {
    throw NoInstancesError("no matched instance pairs to compute IPD over");
  }
  IpdResult out;
  std::map<std::string, std::size_t> slot;
  std::vector<double> sums;
  double total = 0.0;
  for (const PerfRecord& r : records) {
    if (!(r.p_real >= 0.0 && r.p_real <= 1.0 && r.p_synth >= 0.0 &&
          r.p_synth <= 1.0)) {
      throw InputError("performance values must lie in [0,1]");
    }
    const double d = std::abs(r.p_real - r.p_synth);
    total += d;
    auto [it, inserted] = slot.emplace(r.image_id, out.per_image_breakdown.size());
    if (inserted) {
      out.per_image_breakdown.push_back({r.image_id, 0.0, 0});
      sums.push_back(0.0);
    }
    sums[it->second] += d;
    ++out.per_image_breakdown[it->second].pair_count;
  }
  for (std::size_t i = 0; i < sums.size(); ++i) {
    auto& b = out.per_image_breakdown[i];
    b.ipd_contribution = sums[i] / b.pair_count;
  }
  out.instance_count = static_cast<int>(records.size());
  out.ipd = total / static_cast<double>(records.size());
  return out;
}

namespace {

std::vector<BBox> surviving_predictions(const ImageLabels& img,
                                        double conf_threshold) {
  std::vector<BBox> kept;
  for (const BBox& b : img.pred_boxes) {
    if (b.confidence.value_or(1.0) >= conf_threshold) kept.push_back(b);
  }
  return kept;
}

void check_aligned(std::size_t real, std::size_t synth, std::size_t pairings) {
  if (real != synth || real != pairings) {
    throw InputError("real labels, synthetic labels and pairings must be "
                     "index-aligned (got " + std::to_string(real) + ", " +
                     std::to_string(synth) + ", " + std::to_string(pairings) +
                     ")");
  }
}

}  // namespace

std::vector<PerfRecord> collect_perf_records(
    std::span<const ImageLabels> real_labels,
    std::span<const ImageLabels> synth_labels,
    std::span<const InstancePairing> pairings, double conf_threshold) {
  check_aligned(real_labels.size(), synth_labels.size(), pairings.size());
  std::vector<PerfRecord> records;
  for (std::size_t k = 0; k < real_labels.size(); ++k) {
    const ImageLabels& real = real_labels[k];
    const ImageLabels& synth = synth_labels[k];
    const IouTable t_real =
        iou_table(real.gt_boxes, surviving_predictions(real, conf_threshold));
    const IouTable t_synth =
        iou_table(synth.gt_boxes, surviving_predictions(synth, conf_threshold));
    std::vector<InstancePair> pairs = pairings[k].pairs;
    std::sort(pairs.begin(), pairs.end(),
              [](const InstancePair& a, const InstancePair& b) {
                return a.real_index < b.real_index;
              });
    for (const InstancePair& p : pairs) {
      PerfRecord rec;
      rec.dataset_pair_id = real.image_id + "/" + synth.image_id;
      rec.image_id = real.image_id;
      rec.real_index = p.real_index;
      rec.synth_index = p.synth_index;
      rec.p_real = performance_value(t_real, p.real_index);
      rec.p_synth = performance_value(t_synth, p.synth_index);
      records.push_back(std::move(rec));
    }
  }
  return records;
}

IpdResult evaluate_pair(std::span<const ImageLabels> real_labels,
                        std::span<const ImageLabels> synth_labels,
                        std::span<const InstancePairing> pairings,
                        double conf_threshold) {
  const std::vector<PerfRecord> records =
      collect_perf_records(real_labels, synth_labels, pairings, conf_threshold);
  IpdResult out = ipd(records);
  for (const InstancePairing& p : pairings) {
    out.unmatched_real_total += static_cast<int>(p.unmatched_real.size());
    out.unmatched_synth_total += static_cast<int>(p.unmatched_synth.size());
  }
  out.conf_threshold = conf_threshold;
  return out;
}

CrossValResults::Key CrossValResults::key(const std::string& train,
                                          const std::string& a,
                                          const std::string& b) {
  return a < b ? Key{train, a, b} : Key{train, b, a};
}

void CrossValResults::set(const std::string& train, const std::string& a,
                          const std::string& b, IpdResult result) {
  cells_[key(train, a, b)] = std::move(result);
}

const IpdResult* CrossValResults::find(const std::string& train,
                                       const std::string& a,
                                       const std::string& b) const {
  const auto it = cells_.find(key(train, a, b));
  return it == cells_.end() ? nullptr : &it->second;
}

std::vector<DomainPair> crossval_columns(std::span<const std::string> domains) {
  std::vector<DomainPair> cols;
  const int n = static_cast<int>(domains.size());
  for (int i = n - 1; i >= 0; --i) {
    for (int j = n - 1; j > i; --j) cols.push_back({domains[i], domains[j]});
  }
  return cols;
}

CrossValMatrix cross_validation(std::span<const std::string> domains,
                                const CrossValResults& results) {
  if (domains.size() < 2) {
    throw InputError("cross-validation needs at least two domains");
  }
  if (std::set<std::string>(domains.begin(), domains.end()).size() !=
      domains.size()) {
    throw InputError("cross-validation domains must be distinct");
  }
  CrossValMatrix m;
  m.domains.assign(domains.begin(), domains.end());
  m.columns = crossval_columns(domains);
  for (const std::string& train : m.domains) {
    std::vector<CrossValCell> row;
    for (const DomainPair& pair : m.columns) {
      CrossValCell cell{train, pair, std::nullopt};
      if (pair.contains(train)) {
        const IpdResult* r = results.find(train, pair.a, pair.b);
        if (r == nullptr) {
          throw IncompleteResultsError("missing cross-validation cell: train=" +
                                       train + " eval=" + pair.a + "-" + pair.b);
        }
        cell.result = *r;
      }
      row.push_back(std::move(cell));
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

std::string closest_domain(std::span<const CrossValCell> row,
                           const std::string& reference) {
  std::optional<std::string> best_name;
  double best = std::numeric_limits<double>::infinity();
  for (const CrossValCell& cell : row) {
    if (!cell.result || !cell.eval_pair.contains(reference)) continue;
    const std::string& other =
        cell.eval_pair.a == reference ? cell.eval_pair.b : cell.eval_pair.a;
    const double v = cell.result->ipd;
    if (!best_name || v < best || (v == best && other < *best_name)) {
      best = v;
      best_name = other;
    }
  }
  if (!best_name) {
    throw InputError("no evaluated cell in the row involves domain " + reference);
  }
  return *best_name;
}

}  // namespace ipd
