// SPDX-License-Identifier: Apache-2.0
//
// Instance Performance Difference. For every matched pair of instances the
// performance value in each domain is the best IOU any prediction achieves
// against that instance's ground truth; the IPD is the mean absolute
// difference of those values over all pairs.

#ifndef IPD_METRIC_H_
#define IPD_METRIC_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ipd/geometry.h"
#include "ipd/labels.h"
#include "ipd/matching.h"

namespace ipd {

inline constexpr double kDefaultConfThreshold = 0.25;

// gt_count x pred_count, row-major.
class IouTable {
 public:
  IouTable() = default;
  IouTable(int gt_count, int pred_count);

  int gt_count() const { return gt_count_; }
  int pred_count() const { return pred_count_; }
  double at(int gt, int pred) const;
  double& at(int gt, int pred);
  std::span<const double> row(int gt) const;

 private:
  int gt_count_ = 0;
  int pred_count_ = 0;
  std::vector<double> values_;
};

IouTable iou_table(std::span<const BBox> gt, std::span<const BBox> pred);

// Row maximum; 0 when the table has no predictions.
double performance_value(const IouTable& table, int gt_index);

struct PerfRecord {
  std::string dataset_pair_id;
  std::string image_id;
  int real_index = 0;
  int synth_index = 0;
  double p_real = 0.0;
  double p_synth = 0.0;
};

struct ImageBreakdown {
  std::string image_id;
  double ipd_contribution = 0.0;  // mean |p_real - p_synth| over this image
  int pair_count = 0;

  friend bool operator==(const ImageBreakdown&, const ImageBreakdown&) = default;
};

struct IpdResult {
  double ipd = 0.0;
  int instance_count = 0;
  int unmatched_real_total = 0;
  int unmatched_synth_total = 0;
  std::vector<ImageBreakdown> per_image_breakdown;
  // Prediction confidence cutoff used to build the IOU tables, when known.
  std::optional<double> conf_threshold;

  friend bool operator==(const IpdResult&, const IpdResult&) = default;
};

// Mean absolute difference. Breakdown entries follow first appearance of each
// image_id. Throws NoInstancesError on an empty record list.
IpdResult ipd(std::span<const PerfRecord> records);

// Performance-value records for every matched pair, ordered by image index
// then real_index. Predictions below conf_threshold are dropped first.
std::vector<PerfRecord> collect_perf_records(
    std::span<const ImageLabels> real_labels,
    std::span<const ImageLabels> synth_labels,
    std::span<const InstancePairing> pairings, double conf_threshold);

// Algorithm-level evaluation of index-aligned image pairs. Throws InputError on
// mismatched lengths and NoInstancesError when no pair was matched.
IpdResult evaluate_pair(std::span<const ImageLabels> real_labels,
                        std::span<const ImageLabels> synth_labels,
                        std::span<const InstancePairing> pairings,
                        double conf_threshold = kDefaultConfThreshold);

// Unordered pair of domain names, stored in the caller's domain order.
struct DomainPair {
  std::string a;
  std::string b;

  bool contains(const std::string& d) const { return a == d || b == d; }
  friend bool operator==(const DomainPair&, const DomainPair&) = default;
};

struct CrossValCell {
  std::string train_domain;
  DomainPair eval_pair;
  // Absent iff train_domain is not a member of eval_pair.
  std::optional<IpdResult> result;

  std::optional<double> ipd() const {
    return result ? std::optional<double>(result->ipd) : std::nullopt;
  }
};

// Rows are training domains, columns unordered domain pairs. Columns run in
// reverse lexicographic order of the domain index pairs, which for three
// domains puts each row's blank cell on the diagonal.
struct CrossValMatrix {
  std::vector<std::string> domains;
  std::vector<DomainPair> columns;
  std::vector<std::vector<CrossValCell>> rows;
};

// Results keyed by training domain and unordered evaluation pair.
class CrossValResults {
 public:
  void set(const std::string& train, const std::string& a, const std::string& b,
           IpdResult result);
  const IpdResult* find(const std::string& train, const std::string& a,
                        const std::string& b) const;
  bool empty() const { return cells_.empty(); }

 private:
  using Key = std::tuple<std::string, std::string, std::string>;
  static Key key(const std::string& train, const std::string& a,
                 const std::string& b);
  std::map<Key, IpdResult> cells_;
};

std::vector<DomainPair> crossval_columns(std::span<const std::string> domains);

// Throws IncompleteResultsError naming the first missing (train, pair) cell,
// InputError on fewer than two or duplicate domains.
CrossValMatrix cross_validation(std::span<const std::string> domains,
                                const CrossValResults& results);

// Non-training member of the lowest-IPD pair containing `reference`; ties go
// to the lexicographically smaller name.
std::string closest_domain(std::span<const CrossValCell> row,
                           const std::string& reference);

}  // namespace ipd

#endif  // IPD_METRIC_H_
