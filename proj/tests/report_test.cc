// SPDX-License-Identifier: Apache-2.0

#include "ipd/report.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "ipd/errors.h"
#include "test_util.h"

namespace ipd {
namespace {

using testing::read_text;
using testing::uniform;

IpdResult value(double v) {
  IpdResult r;
  r.ipd = v;
  r.instance_count = 1;
  return r;
}

CrossValMatrix table_matrix() {
  CrossValResults r;
  r.set("Real", "Real", "Hapke", value(0.3152));
  r.set("Real", "Real", "Principled", value(0.2256));
  r.set("Principled", "Principled", "Hapke", value(0.0511));
  r.set("Principled", "Real", "Principled", value(0.3808));
  r.set("Hapke", "Principled", "Hapke", value(0.0261));
  r.set("Hapke", "Real", "Hapke", value(0.4638));
  const std::vector<std::string> domains = {"Real", "Principled", "Hapke"};
  return cross_validation(domains, r);
}

TEST(PairLabelTest, UsesNormBars) {
  EXPECT_EQ(pair_label({"Real", "Hapke"}), "‖Real − Hapke‖");
  EXPECT_EQ(format_ipd(0.22559), "0.2256");
  EXPECT_EQ(format_ipd(0.0), "0.0000");
}

TEST(CrossvalReportTest, MarkdownMatchesGoldenTable) {
  const std::string golden = read_text(IPD_GOLDEN_DIR "/crossval_table.md");
  ASSERT_FALSE(golden.empty());
  EXPECT_EQ(write_crossval_report(table_matrix(), ReportFormat::kMarkdown), golden);
}

TEST(CrossvalReportTest, EmptyOrIncompleteMatrixIsRejected) {
  EXPECT_THROW(write_crossval_report({}, ReportFormat::kMarkdown), InputError);
  CrossValMatrix m = table_matrix();
  m.rows[1][2].result.reset();
  EXPECT_THROW(write_crossval_report(m, ReportFormat::kMarkdown),
               IncompleteResultsError);
  m = table_matrix();
  m.rows.pop_back();
  EXPECT_THROW(write_crossval_report(m, ReportFormat::kCsv), IncompleteResultsError);
}

TEST(CrossvalReportTest, CsvFlattensCells) {
  const std::string csv = write_crossval_report(table_matrix(), ReportFormat::kCsv);
  EXPECT_EQ(csv.rfind("train,eval_a,eval_b,ipd,", 0), 0u);
  EXPECT_NE(csv.find("\r\nReal,Principled,Hapke,,,,\r\n"), std::string::npos);
  EXPECT_NE(csv.find("\r\nReal,Real,Principled,0.2256"), std::string::npos);
  int lines = 0;
  for (size_t pos = 0; (pos = csv.find("\r\n", pos)) != std::string::npos; pos += 2) {
    ++lines;
  }
  EXPECT_EQ(lines, 10);
}

TEST(CrossvalReportTest, CsvQuotesSpecialCharacters) {
  CrossValResults r;
  r.set("a,b", "a,b", "say \"hi\"", value(0.5));
  r.set("say \"hi\"", "a,b", "say \"hi\"", value(0.25));
  const std::vector<std::string> domains = {"a,b", "say \"hi\""};
  const std::string csv =
      write_crossval_report(cross_validation(domains, r), ReportFormat::kCsv);
  EXPECT_NE(csv.find("\"a,b\",\"a,b\",\"say \"\"hi\"\"\",0.5"), std::string::npos)
      << csv;
}

ReportProvenance random_provenance(std::mt19937_64& rng) {
  ReportProvenance p;
  p.registration.max_iterations = 1 + static_cast<int>(rng() % 5000);
  p.registration.rng_seed = rng();
  p.registration.trim_fraction = uniform(rng, 0, 0.5);
  p.registration.sampling =
      rng() % 2 ? SamplingStrategy::kMixed : SamplingStrategy::kUniform;
  if (rng() % 2) p.registration.early_exit_score = uniform(rng, 0, 1);
  p.registration.area_ratio_tolerance =
      rng() % 3 ? uniform(rng, 1, 50) : std::numeric_limits<double>::infinity();
  p.conf_threshold = uniform(rng, 0, 1);
  if (rng() % 2) p.gate_distance = uniform(rng, 0.1, 100);
  p.real_dataset = "real" + std::to_string(rng() % 100);
  p.synth_dataset = "syn\"th\n" + std::to_string(rng() % 100);
  return p;
}

IpdResult random_result(std::mt19937_64& rng) {
  IpdResult r;
  r.ipd = uniform(rng, 0, 1);
  r.instance_count = static_cast<int>(rng() % 1000);
  r.unmatched_real_total = static_cast<int>(rng() % 50);
  r.unmatched_synth_total = static_cast<int>(rng() % 50);
  for (int i = static_cast<int>(rng() % 4); i > 0; --i) {
    r.per_image_breakdown.push_back(
        {"img_" + std::to_string(rng()), uniform(rng, 0, 1),
         static_cast<int>(rng() % 30)});
  }
  if (rng() % 2) r.conf_threshold = uniform(rng, 0, 1);
  return r;
}

TEST(JsonReportTest, IpdRoundTripIsExact) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const IpdResult r = random_result(rng);
    const ReportProvenance p = random_provenance(rng);
    const IpdReport back =
        ipd_report_from_json(write_ipd_report(r, ReportFormat::kJson, p));
    EXPECT_EQ(back.result, r);
    EXPECT_EQ(back.provenance, p);
  }
}

TEST(JsonReportTest, CrossvalRoundTripIsExact) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    std::vector<std::string> domains;
    for (int i = 0; i < n; ++i) domains.push_back("D" + std::to_string(i));
    CrossValResults results;
    for (const DomainPair& c : crossval_columns(domains)) {
      results.set(c.a, c.a, c.b, random_result(rng));
      results.set(c.b, c.a, c.b, random_result(rng));
    }
    const CrossValMatrix m = cross_validation(domains, results);
    const ReportProvenance p = random_provenance(rng);
    const CrossValReport back =
        crossval_report_from_json(write_crossval_report(m, ReportFormat::kJson, p));
    EXPECT_EQ(back.provenance, p);
    ASSERT_EQ(back.matrix.domains, m.domains);
    ASSERT_EQ(back.matrix.columns, m.columns);
    ASSERT_EQ(back.matrix.rows.size(), m.rows.size());
    for (size_t i = 0; i < m.rows.size(); ++i) {
      ASSERT_EQ(back.matrix.rows[i].size(), m.rows[i].size());
      for (size_t c = 0; c < m.rows[i].size(); ++c) {
        EXPECT_EQ(back.matrix.rows[i][c].train_domain, m.rows[i][c].train_domain);
        EXPECT_EQ(back.matrix.rows[i][c].eval_pair, m.rows[i][c].eval_pair);
        EXPECT_EQ(back.matrix.rows[i][c].result, m.rows[i][c].result);
      }
    }
  }
}

TEST(JsonReportTest, MalformedInputIsAnInputError) {
  EXPECT_THROW(ipd_report_from_json("{}"), InputError);
  EXPECT_THROW(crossval_report_from_json("[1, 2"), InputError);
}

TEST(IpdReportTest, MarkdownAndCsvShapes) {
  IpdResult r;
  r.ipd = 0.125;
  r.instance_count = 3;
  r.per_image_breakdown = {{"x", 0.125, 3}};
  const std::string md = write_ipd_report(r, ReportFormat::kMarkdown);
  EXPECT_EQ(md.rfind("**IPD 0.125000**", 0), 0u) << md;
  EXPECT_NE(md.find("| x | 3 | 0.1250 |"), std::string::npos) << md;
  const std::string csv = write_ipd_report(r, ReportFormat::kCsv);
  EXPECT_EQ(csv, "image_id,pair_count,ipd\r\nx,3,0.125\r\n(all),3,0.125\r\n");
}

TEST(ReportFormatTest, Parsing) {
  EXPECT_EQ(report_format_from_string("md"), ReportFormat::kMarkdown);
  EXPECT_EQ(report_format_from_string("markdown"), ReportFormat::kMarkdown);
  EXPECT_EQ(report_format_from_string("csv"), ReportFormat::kCsv);
  EXPECT_EQ(report_format_from_string("json"), ReportFormat::kJson);
  EXPECT_THROW(report_format_from_string("xml"), InputError);
}

}  // namespace
}  // namespace ipd
