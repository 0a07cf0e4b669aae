// SPDX-License-Identifier: Apache-2.0
//
// Report serialization: CSV (RFC 4180 quoting), JSON (sorted keys, full
// provenance) and Markdown tables in the train-by-pair cross-validation layout.

#ifndef IPD_REPORT_H_
#define IPD_REPORT_H_

#include <optional>
#include <string>

#include "ipd/metric.h"
#include "ipd/registration.h"

namespace ipd {

enum class ReportFormat { kCsv, kJson, kMarkdown };

std::string to_string(ReportFormat format);
ReportFormat report_format_from_string(const std::string& s);

// Settings a reported number depends on.
struct ReportProvenance {
  RegistrationConfig registration;
  double conf_threshold = kDefaultConfThreshold;
  // Unset: half the median ground-truth diagonal of each real image.
  std::optional<double> gate_distance;
  std::string real_dataset;
  std::string synth_dataset;

  friend bool operator==(const ReportProvenance& a, const ReportProvenance& b);
};

// Column label for an unordered pair, e.g. "‖Real − Hapke‖".
std::string pair_label(const DomainPair& pair);

// Fixed 4-decimal rendering used by the tables.
std::string format_ipd(double v);

// Throws IncompleteResultsError when a cell whose pair contains the training
// domain has no result, InputError on an empty domain list.
std::string write_crossval_report(const CrossValMatrix& matrix,
                                  ReportFormat format,
                                  const ReportProvenance& provenance = {});

std::string write_ipd_report(const IpdResult& result, ReportFormat format,
                             const ReportProvenance& provenance = {});

struct CrossValReport {
  CrossValMatrix matrix;
  ReportProvenance provenance;
};

struct IpdReport {
  IpdResult result;
  ReportProvenance provenance;
};

// Inverses of the JSON writers. Throw InputError on malformed documents.
CrossValReport crossval_report_from_json(const std::string& text);
IpdReport ipd_report_from_json(const std::string& text);

}  // namespace ipd

#endif  // IPD_REPORT_H_
