// SPDX-License-Identifier: Apache-2.0

#include "ipd/report.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "ipd/errors.h"
#include "json.hpp"

namespace ipd {

using json = nlohmann::json;

bool operator==(const ReportProvenance& a, const ReportProvenance& b) {
  const auto& ra = a.registration;
  const auto& rb = b.registration;
  return ra.max_iterations == rb.max_iterations &&
         ra.early_exit_score == rb.early_exit_score &&
         ra.rng_seed == rb.rng_seed &&
         ra.min_points_for_affine == rb.min_points_for_affine &&
         ra.trim_fraction == rb.trim_fraction && ra.sampling == rb.sampling &&
         ra.area_ratio_tolerance == rb.area_ratio_tolerance &&
         a.conf_threshold == b.conf_threshold &&
         a.gate_distance == b.gate_distance && a.real_dataset == b.real_dataset &&
         a.synth_dataset == b.synth_dataset;
}

std::string to_string(ReportFormat format) {
  switch (format) {
    case ReportFormat::kCsv:
      return "csv";
    case ReportFormat::kJson:
      return "json";
    case ReportFormat::kMarkdown:
      return "markdown";
  }
  return "json";
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "json") return ReportFormat::kJson;
  if (s == "markdown" || s == "md") return ReportFormat::kMarkdown;
  throw InputError("unknown report format '" + s +
                   "' (expected csv, json or markdown)");
}

std::string pair_label(const DomainPair& pair) {
  return "‖" + pair.a + " − " + pair.b + "‖";
}

std::string format_ipd(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

namespace {

// Shortest representation that parses back to the same double.
std::string exact(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

const char* sampling_name(SamplingStrategy s) {
  return s == SamplingStrategy::kUniform ? "uniform" : "mixed";
}

json to_json(const ReportProvenance& p) {
  const RegistrationConfig& r = p.registration;
  json reg = {{"max_iterations", r.max_iterations},
              {"rng_seed", r.rng_seed},
              {"min_points_for_affine", r.min_points_for_affine},
              {"trim_fraction", r.trim_fraction},
              {"sampling", sampling_name(r.sampling)}};
  reg["early_exit_score"] =
      r.early_exit_score ? json(*r.early_exit_score) : json(nullptr);
  // Null means the area check is disabled.
  reg["area_ratio_tolerance"] = std::isfinite(r.area_ratio_tolerance)
                                    ? json(r.area_ratio_tolerance)
                                    : json(nullptr);
  json j = {{"registration", reg},
            {"conf_threshold", p.conf_threshold},
            {"real_dataset", p.real_dataset},
            {"synth_dataset", p.synth_dataset}};
  j["gate_distance"] = p.gate_distance ? json(*p.gate_distance) : json(nullptr);
  j["gate_rule"] = p.gate_distance ? "fixed" : "half_median_gt_diagonal";
  return j;
}

ReportProvenance provenance_from_json(const json& j) {
  ReportProvenance p;
  const json& reg = j.at("registration");
  p.registration.max_iterations = reg.at("max_iterations").get<int>();
  p.registration.rng_seed = reg.at("rng_seed").get<std::uint64_t>();
  p.registration.min_points_for_affine =
      reg.at("min_points_for_affine").get<int>();
  p.registration.trim_fraction = reg.at("trim_fraction").get<double>();
  p.registration.sampling = reg.at("sampling").get<std::string>() == "uniform"
                                ? SamplingStrategy::kUniform
                                : SamplingStrategy::kMixed;
  if (!reg.at("early_exit_score").is_null()) {
    p.registration.early_exit_score = reg.at("early_exit_score").get<double>();
  }
  const json& area = reg.at("area_ratio_tolerance");
  p.registration.area_ratio_tolerance =
      area.is_null() ? std::numeric_limits<double>::infinity() : area.get<double>();
  p.conf_threshold = j.at("conf_threshold").get<double>();
  if (!j.at("gate_distance").is_null()) {
    p.gate_distance = j.at("gate_distance").get<double>();
  }
  p.real_dataset = j.at("real_dataset").get<std::string>();
  p.synth_dataset = j.at("synth_dataset").get<std::string>();
  return p;
}

json to_json(const IpdResult& r) {
  json breakdown = json::array();
  for (const ImageBreakdown& b : r.per_image_breakdown) {
    breakdown.push_back({{"image_id", b.image_id},
                         {"ipd_contribution", b.ipd_contribution},
                         {"pair_count", b.pair_count}});
  }
  json j = {{"ipd", r.ipd},
            {"instance_count", r.instance_count},
            {"unmatched_real_total", r.unmatched_real_total},
            {"unmatched_synth_total", r.unmatched_synth_total},
            {"per_image_breakdown", breakdown}};
  j["conf_threshold"] = r.conf_threshold ? json(*r.conf_threshold) : json(nullptr);
  return j;
}

IpdResult ipd_result_from_json(const json& j) {
  IpdResult r;
  r.ipd = j.at("ipd").get<double>();
  r.instance_count = j.at("instance_count").get<int>();
  r.unmatched_real_total = j.at("unmatched_real_total").get<int>();
  r.unmatched_synth_total = j.at("unmatched_synth_total").get<int>();
  for (const json& b : j.at("per_image_breakdown")) {
    r.per_image_breakdown.push_back({b.at("image_id").get<std::string>(),
                                     b.at("ipd_contribution").get<double>(),
                                     b.at("pair_count").get<int>()});
  }
  if (!j.at("conf_threshold").is_null()) {
    r.conf_threshold = j.at("conf_threshold").get<double>();
  }
  return r;
}

void check_complete(const CrossValMatrix& m) {
  if (m.domains.empty()) throw InputError("cannot render an empty domain list");
  if (m.rows.size() != m.domains.size()) {
    throw IncompleteResultsError("cross-validation matrix is missing rows");
  }
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    if (m.rows[i].size() != m.columns.size()) {
      throw IncompleteResultsError("cross-validation row " + m.domains[i] +
                                   " is missing cells");
    }
    for (const CrossValCell& c : m.rows[i]) {
      if (c.eval_pair.contains(c.train_domain) && !c.result) {
        throw IncompleteResultsError(
            "missing cross-validation cell: train=" + c.train_domain +
            " eval=" + c.eval_pair.a + "-" + c.eval_pair.b);
      }
    }
  }
}

std::string crossval_markdown(const CrossValMatrix& m) {
  std::ostringstream os;
  os << "| Train\\Eval |";
  for (const DomainPair& p : m.columns) os << ' ' << pair_label(p) << " |";
  os << "\n|---|";
  for (std::size_t i = 0; i < m.columns.size(); ++i) os << "---|";
  os << '\n';
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    std::optional<double> row_min;
    for (const CrossValCell& c : m.rows[i]) {
      if (c.result && (!row_min || c.result->ipd < *row_min)) {
        row_min = c.result->ipd;
      }
    }
    os << "| " << m.domains[i] << " |";
    for (const CrossValCell& c : m.rows[i]) {
      if (!c.result) {
        os << " - |";
      } else if (c.result->ipd == *row_min) {
        os << " **" << format_ipd(c.result->ipd) << "** |";
      } else {
        os << ' ' << format_ipd(c.result->ipd) << " |";
      }
    }
    os << '\n';
  }
  return os.str();
}

std::string crossval_csv(const CrossValMatrix& m) {
  std::ostringstream os;
  os << "train,eval_a,eval_b,ipd,instance_count,unmatched_real_total,"
        "unmatched_synth_total\r\n";
  for (const auto& row : m.rows) {
    for (const CrossValCell& c : row) {
      os << csv_field(c.train_domain) << ',' << csv_field(c.eval_pair.a) << ','
         << csv_field(c.eval_pair.b) << ',';
      if (c.result) {
        os << exact(c.result->ipd) << ',' << c.result->instance_count << ','
           << c.result->unmatched_real_total << ','
           << c.result->unmatched_synth_total;
      } else {
        os << ",,,";
      }
      os << "\r\n";
    }
  }
  return os.str();
}

json crossval_json(const CrossValMatrix& m, const ReportProvenance& p) {
  json cols = json::array();
  for (const DomainPair& c : m.columns) cols.push_back({{"a", c.a}, {"b", c.b}});
  json cells = json::array();
  for (const auto& row : m.rows) {
    for (const CrossValCell& c : row) {
      json cell = {{"train", c.train_domain},
                   {"a", c.eval_pair.a},
                   {"b", c.eval_pair.b}};
      cell["result"] = c.result ? to_json(*c.result) : json(nullptr);
      cells.push_back(cell);
    }
  }
  return {{"domains", m.domains},
          {"columns", cols},
          {"cells", cells},
          {"provenance", to_json(p)}};
}

}  // namespace

std::string write_crossval_report(const CrossValMatrix& matrix,
                                  ReportFormat format,
                                  const ReportProvenance& provenance) {
  check_complete(matrix);
  switch (format) {
    case ReportFormat::kMarkdown:
      return crossval_markdown(matrix);
    case ReportFormat::kCsv:
      return crossval_csv(matrix);
    case ReportFormat::kJson:
      break;
  }
  return crossval_json(matrix, provenance).dump(2) + "\n";
}

std::string write_ipd_report(const IpdResult& result, ReportFormat format,
                             const ReportProvenance& provenance) {
  switch (format) {
    case ReportFormat::kMarkdown: {
      std::ostringstream os;
      char head[64];
      std::snprintf(head, sizeof(head), "%.6f", result.ipd);
      os << "**IPD " << head << "** (" << result.instance_count
         << " instance pairs; unmatched real " << result.unmatched_real_total
         << ", unmatched synthetic " << result.unmatched_synth_total << ")\n\n";
      os << "| Image | Pairs | IPD |\n|---|---|---|\n";
      for (const ImageBreakdown& b : result.per_image_breakdown) {
        os << "| " << b.image_id << " | " << b.pair_count << " | "
           << format_ipd(b.ipd_contribution) << " |\n";
      }
      return os.str();
    }
    case ReportFormat::kCsv: {
      std::ostringstream os;
      os << "image_id,pair_count,ipd\r\n";
      for (const ImageBreakdown& b : result.per_image_breakdown) {
        os << csv_field(b.image_id) << ',' << b.pair_count << ','
           << exact(b.ipd_contribution) << "\r\n";
      }
      os << "(all)," << result.instance_count << ',' << exact(result.ipd)
         << "\r\n";
      return os.str();
    }
    case ReportFormat::kJson:
      break;
  }
  const json j = {{"result", to_json(result)}, {"provenance", to_json(provenance)}};
  return j.dump(2) + "\n";
}

CrossValReport crossval_report_from_json(const std::string& text) {
  CrossValReport out;
  try {
    const json j = json::parse(text);
    CrossValMatrix& m = out.matrix;
    m.domains = j.at("domains").get<std::vector<std::string>>();
    for (const json& c : j.at("columns")) {
      m.columns.push_back({c.at("a").get<std::string>(), c.at("b").get<std::string>()});
    }
    const json& cells = j.at("cells");
    if (cells.size() != m.domains.size() * m.columns.size()) {
      throw InputError("cell count does not match the matrix shape");
    }
    std::size_t k = 0;
    for (std::size_t i = 0; i < m.domains.size(); ++i) {
      std::vector<CrossValCell> row;
      for (std::size_t c = 0; c < m.columns.size(); ++c, ++k) {
        const json& cell = cells[k];
        CrossValCell parsed{cell.at("train").get<std::string>(),
                            {cell.at("a").get<std::string>(),
                             cell.at("b").get<std::string>()},
                            std::nullopt};
        if (!cell.at("result").is_null()) {
          parsed.result = ipd_result_from_json(cell.at("result"));
        }
        row.push_back(std::move(parsed));
      }
      m.rows.push_back(std::move(row));
    }
    out.provenance = provenance_from_json(j.at("provenance"));
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed cross-validation report: ") + e.what());
  }
  return out;
}

IpdReport ipd_report_from_json(const std::string& text) {
  IpdReport out;
  try {
    const json j = json::parse(text);
    out.result = ipd_result_from_json(j.at("result"));
    out.provenance = provenance_from_json(j.at("provenance"));
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed IPD report: ") + e.what());
  }
  return out;
}

}  // namespace ipd
