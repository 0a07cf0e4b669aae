// SPDX-License-Identifier: Apache-2.0

#include "ipd/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ipd/errors.h"
#include "ipd/ingestion.h"
#include "ipd/matching.h"
#include "ipd/metric.h"
#include "ipd/pipeline.h"
#include "ipd/registration.h"
#include "ipd/report.h"
#include "ipd/scenegen.h"
#include "json.hpp"

namespace ipd::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct CommonOptions {
  std::uint64_t seed = 0;
  int max_iterations = 2000;
  double trim = 0.2;
  std::optional<double> early_exit;
  std::string sampling = "mixed";
  std::optional<double> gate;
  double conf_threshold = kDefaultConfThreshold;
  std::string format = "json";
  std::string out_path;
  bool verbose = false;

  PipelineConfig pipeline() const {
    PipelineConfig cfg;
    cfg.registration.rng_seed = seed;
    cfg.registration.max_iterations = max_iterations;
    cfg.registration.trim_fraction = trim;
    cfg.registration.early_exit_score = early_exit;
    if (sampling == "uniform") {
      cfg.registration.sampling = SamplingStrategy::kUniform;
    } else if (sampling == "mixed") {
      cfg.registration.sampling = SamplingStrategy::kMixed;
    } else {
      throw InputError("unknown sampling strategy '" + sampling + "'");
    }
    validate(cfg.registration);
    if (gate && !(*gate > 0.0)) throw InputError("--gate must be positive");
    if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) {
      throw InputError("--conf-threshold must lie in [0,1]");
    }
    cfg.gate_distance = gate;
    cfg.conf_threshold = conf_threshold;
    return cfg;
  }

  ReportProvenance provenance(const std::string& real_ds,
                              const std::string& synth_ds) const {
    const PipelineConfig cfg = pipeline();
    ReportProvenance p;
    p.registration = cfg.registration;
    p.conf_threshold = cfg.conf_threshold;
    p.gate_distance = cfg.gate_distance;
    p.real_dataset = real_ds;
    p.synth_dataset = synth_ds;
    return p;
  }
};

void add_registration_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--seed", o.seed, "Base RNG seed")->capture_default_str();
  cmd->add_option("--max-iterations", o.max_iterations, "RANSAC iteration budget")
      ->capture_default_str();
  cmd->add_option("--trim", o.trim, "Trim fraction of the registration score")
      ->capture_default_str();
  cmd->add_option("--early-exit", o.early_exit,
                  "Stop once the score reaches this value "
                  "(default 1e-3 x real scene diagonal)");
  cmd->add_option("--sampling", o.sampling, "Triple sampling: mixed or uniform")
      ->capture_default_str();
  cmd->add_option("--gate", o.gate,
                  "Match gate distance in px (default half the median GT "
                  "diagonal of each real image)");
}

void add_output_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--format", o.format, "csv, json or markdown")
      ->capture_default_str();
  cmd->add_option("--out", o.out_path, "Report path (default: standard output)");
  cmd->add_flag("-v,--verbose", o.verbose, "Per-image diagnostics on stderr");
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << text;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string transform_str(const AffineTransform2D& t) {
  return "[" + fixed(t.a11, 6) + " " + fixed(t.a12, 6) + " " + fixed(t.tx, 6) +
         "; " + fixed(t.a21, 6) + " " + fixed(t.a22, 6) + " " + fixed(t.ty, 6) +
         "]";
}

PipelineOutcome evaluate_manifests(const fs::path& real_path,
                                   const fs::path& synth_path,
                                   const PipelineConfig& cfg, Dataset* real_out,
                                   Dataset* synth_out) {
  const Dataset real = load_dataset(read_manifest(real_path), PairingSide::kReal);
  const Dataset synth =
      load_dataset(read_manifest(synth_path), PairingSide::kSynth);
  const std::vector<ImagePair> pairing = resolve_pairing(real, synth);
  PipelineOutcome outcome = run_pipeline(real, synth, pairing, cfg);
  if (real_out) *real_out = real;
  if (synth_out) *synth_out = synth;
  return outcome;
}

int cmd_ipd(const std::string& real_path, const std::string& synth_path,
            const CommonOptions& o, std::ostream& out, std::ostream& err) {
  const PipelineConfig cfg = o.pipeline();
  const ReportFormat format = report_format_from_string(o.format);
  Dataset real, synth;
  const PipelineOutcome outcome =
      evaluate_manifests(real_path, synth_path, cfg, &real, &synth);
  if (o.verbose) {
    for (const ImagePairOutcome& p : outcome.image_pairs) {
      err << p.real_image_id << " <- " << p.synth_image_id << ": score "
          << fixed(p.registration.score, 4) << ", " << p.pairing.pairs.size()
          << " pairs, unmatched real " << p.pairing.unmatched_real.size()
          << ", unmatched synth " << p.pairing.unmatched_synth.size()
          << (p.registration.used_fallback ? " (translation fallback)" : "")
          << '\n';
    }
  }
  out << "IPD " << fixed(outcome.result.ipd, 6) << '\n';
  emit(write_ipd_report(outcome.result, format,
                        o.provenance(real.dataset_id, synth.dataset_id)),
       o.out_path, out);
  return kExitOk;
}

int cmd_crossval(const std::string& spec_path, const CommonOptions& o,
                 std::ostream& out, std::ostream& err) {
  const ReportFormat format = report_format_from_string(o.format);
  std::ifstream in(spec_path, std::ios::binary);
  if (!in) throw InputError("cannot read " + spec_path);
  json spec;
  try {
    spec = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(spec_path + ": " + e.what());
  }
  const fs::path base = fs::path(spec_path).parent_path();

  std::vector<std::string> domains;
  CrossValResults results;
  try {
    domains = spec.at("domains").get<std::vector<std::string>>();
    for (const json& cell : spec.at("cells")) {
      const std::string train = cell.at("train").get<std::string>();
      const auto pair = cell.at("pair").get<std::vector<std::string>>();
      if (pair.size() != 2) {
        throw InputError(spec_path + ": cell pair must name two domains");
      }
      IpdResult r;
      if (cell.contains("ipd")) {
        r.ipd = cell.at("ipd").get<double>();
      } else if (cell.contains("manifests")) {
        const auto m = cell.at("manifests").get<std::vector<std::string>>();
        if (m.size() != 2) {
          throw InputError(spec_path + ": cell manifests must name two files");
        }
        r = evaluate_manifests(base / m[0], base / m[1], o.pipeline(), nullptr,
                               nullptr)
                .result;
        if (o.verbose) {
          err << "train=" << train << " " << pair[0] << "-" << pair[1]
              << ": IPD " << fixed(r.ipd, 6) << '\n';
        }
      } else {
        throw InputError(spec_path + ": cell for train=" + train +
                         " needs either 'ipd' or 'manifests'");
      }
      results.set(train, pair[0], pair[1], r);
    }
  } catch (const json::exception& e) {
    throw InputError(spec_path + ": " + e.what());
  }
  const CrossValMatrix matrix = cross_validation(domains, results);
  emit(write_crossval_report(matrix, format, o.provenance("", "")), o.out_path,
       out);
  return kExitOk;
}

struct RegisterOptions {
  std::string coords = "pixel";
  int width = 0;
  int height = 0;
};

std::vector<BBox> read_gt(const std::string& path, const RegisterOptions& r) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::vector<BBox> boxes = parse_label_file(
      ss.str(), coordinate_mode_from_string(r.coords), {r.width, r.height}, path);
  // Detector files may be passed too; only the box geometry is used.
  for (BBox& b : boxes) b.confidence.reset();
  return boxes;
}

int cmd_register(const std::string& real_path, const std::string& synth_path,
                 const CommonOptions& o, const RegisterOptions& r,
                 std::ostream& out, std::ostream& err) {
  const PipelineConfig cfg = o.pipeline();
  const std::vector<BBox> real_gt = read_gt(real_path, r);
  const std::vector<BBox> synth_gt = read_gt(synth_path, r);
  if (real_gt.empty() || synth_gt.empty()) {
    throw InputError("register needs at least one box in each label file");
  }
  std::vector<Point2> real_pts, synth_pts;
  for (const BBox& b : real_gt) real_pts.push_back(bbox_center(b));
  for (const BBox& b : synth_gt) synth_pts.push_back(bbox_center(b));

  const RegistrationResult reg = register_points(synth_pts, real_pts, cfg.registration);
  if (reg.used_fallback) {
    err << "warning: registration fell back to the centroid translation\n";
  }
  const double gate = cfg.gate_distance.value_or(default_gate_distance(real_gt));
  const InstancePairing before =
      match_instances(AffineTransform2D::Identity(), synth_pts, real_pts, gate);
  const InstancePairing after =
      match_instances(reg.transform, synth_pts, real_pts, gate);
  const double score_before = registration_score(
      AffineTransform2D::Identity(), synth_pts, real_pts, cfg.registration.trim_fraction);

  std::ostringstream os;
  os << "transform " << transform_str(reg.transform) << '\n';
  os << "score_before " << fixed(score_before, 6) << '\n';
  os << "score " << fixed(reg.score, 6) << '\n';
  os << "iterations " << reg.iterations_used << '\n';
  os << "hypotheses " << reg.hypothesis_count << '\n';
  os << "fallback " << (reg.used_fallback ? "yes" : "no") << '\n';
  os << "gate " << fixed(gate, 6) << '\n';
  os << "pairs_before " << before.pairs.size() << '\n';
  os << "pairs_after " << after.pairs.size() << '\n';
  os << "real_index synth_index distance\n";
  for (const InstancePair& p : after.pairs) {
    os << p.real_index << ' ' << p.synth_index << ' ' << fixed(p.distance, 6)
       << '\n';
  }
  os << "unmatched_real";
  for (int i : after.unmatched_real) os << ' ' << i;
  os << "\nunmatched_synth";
  for (int i : after.unmatched_synth) os << ' ' << i;
  os << '\n';
  emit(os.str(), o.out_path, out);
  return kExitOk;
}

struct ScenegenOptions {
  std::string out_dir;
  std::string spec_path;
  int pairs = 1;
  int instances = 20;
  int width = 1024;
  int height = 768;
  double noise = 0.0;
  double dropout_real = 0.0;
  double dropout_synth = 0.0;
  double real_iou = 0.8;
  double real_spread = 0.0;
  double synth_iou = 0.8;
  double synth_spread = 0.0;
  double min_box = 10.0;
  double max_box = 30.0;
  std::vector<double> transform;
  std::optional<double> max_condition;
  std::string coords = "normalized";
  std::uint64_t seed = 0;
};

// Flags given on the command line win over the spec file.
void apply_spec_file(ScenegenOptions& s, const CLI::App& cmd) {
  if (s.spec_path.empty()) return;
  std::ifstream in(s.spec_path, std::ios::binary);
  if (!in) throw InputError("cannot read " + s.spec_path);
  json j;
  try {
    j = json::parse(in);
    const auto take = [&](const char* key, const char* flag, auto& field) {
      if (j.contains(key) && cmd.count(flag) == 0) {
        field = j.at(key).get<std::decay_t<decltype(field)>>();
      }
    };
    take("pairs", "--pairs", s.pairs);
    take("n_instances", "--instances", s.instances);
    take("width_px", "--width", s.width);
    take("height_px", "--height", s.height);
    take("center_noise_sigma", "--noise", s.noise);
    take("dropout_real", "--dropout-real", s.dropout_real);
    take("dropout_synth", "--dropout-synth", s.dropout_synth);
    take("real_iou", "--real-iou", s.real_iou);
    take("real_spread", "--real-spread", s.real_spread);
    take("synth_iou", "--synth-iou", s.synth_iou);
    take("synth_spread", "--synth-spread", s.synth_spread);
    take("min_box_px", "--min-box", s.min_box);
    take("max_box_px", "--max-box", s.max_box);
    take("transform", "--transform", s.transform);
    take("coordinate_mode", "--coords", s.coords);
    take("rng_seed", "--seed", s.seed);
    if (j.contains("max_condition") && cmd.count("--max-condition") == 0) {
      s.max_condition = j.at("max_condition").get<double>();
    }
  } catch (const json::exception& e) {
    throw InputError(s.spec_path + ": " + e.what());
  }
}

int cmd_scenegen(const ScenegenOptions& s, std::ostream& out) {
  if (s.out_dir.empty()) throw InputError("scenegen needs --out-dir");
  if (s.pairs < 0) throw InputError("--pairs must be >= 0");
  if (!s.transform.empty() && s.transform.size() != 6) {
    throw InputError("--transform takes six values a11,a12,a21,a22,tx,ty");
  }
  const CoordinateMode mode = coordinate_mode_from_string(s.coords);
  std::vector<ScenePair> scenes;
  for (int k = 0; k < s.pairs; ++k) {
    SceneSpec spec;
    spec.n_instances = s.instances;
    spec.width_px = s.width;
    spec.height_px = s.height;
    spec.center_noise_sigma = s.noise;
    spec.dropout_real = s.dropout_real;
    spec.dropout_synth = s.dropout_synth;
    spec.detector_real = {s.real_iou, s.real_spread};
    spec.detector_synth = {s.synth_iou, s.synth_spread};
    spec.min_box_px = s.min_box;
    spec.max_box_px = s.max_box;
    spec.image_id = "img" + std::to_string(k);
    spec.rng_seed = derive_seed(s.seed, "scene", spec.image_id);
    if (!s.transform.empty()) {
      const auto& t = s.transform;
      spec.transform = {t[0], t[1], t[2], t[3], t[4], t[5]};
    } else if (s.max_condition) {
      spec.transform = random_well_conditioned_affine(
          derive_seed(s.seed, "transform", spec.image_id), *s.max_condition,
          s.width, s.height);
    }
    scenes.push_back(generate_scene_pair(spec));
  }
  const SceneDatasetPaths paths = write_scene_dataset(scenes, s.out_dir, mode);

  json oracle = {{"scenes", json::array()}};
  double sum = 0.0;
  int count = 0;
  for (const ScenePair& sc : scenes) {
    json corr = json::array();
    for (const InstancePair& p : sc.correspondence) {
      corr.push_back({p.real_index, p.synth_index});
      sum += std::abs(sc.real_iou[p.real_index] - sc.synth_iou[p.synth_index]);
      ++count;
    }
    oracle["scenes"].push_back({{"real_image_id", sc.real.image_id},
                                {"synth_image_id", sc.synth.image_id},
                                {"correspondence", corr},
                                {"real_iou", sc.real_iou},
                                {"synth_iou", sc.synth_iou}});
  }
  oracle["pair_count"] = count;
  oracle["oracle_ipd"] = count > 0 ? json(sum / count) : json(nullptr);
  const fs::path oracle_path = fs::path(s.out_dir) / "oracle.json";
  std::ofstream(oracle_path, std::ios::binary) << oracle.dump(2) << '\n';

  out << "real manifest " << paths.real_manifest.string() << '\n';
  out << "synth manifest " << paths.synth_manifest.string() << '\n';
  out << "oracle " << oracle_path.string() << '\n';
  if (count > 0) out << "oracle IPD " << fixed(sum / count, 6) << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Instance Performance Difference toolkit", "ipd_tool"};
  app.require_subcommand(1);

  CommonOptions ipd_opts, cv_opts, reg_opts;
  std::string real_manifest, synth_manifest, crossval_spec, real_labels,
      synth_labels;
  RegisterOptions reg_files;
  ScenegenOptions gen;

  CLI::App* ipd_cmd =
      app.add_subcommand("ipd", "IPD between a real and a synthetic dataset");
  ipd_cmd->add_option("real_manifest", real_manifest)->required();
  ipd_cmd->add_option("synth_manifest", synth_manifest)->required();
  add_registration_flags(ipd_cmd, ipd_opts);
  ipd_cmd->add_option("--conf-threshold", ipd_opts.conf_threshold,
                      "Drop predictions below this confidence")
      ->capture_default_str();
  add_output_flags(ipd_cmd, ipd_opts);

  CLI::App* cv_cmd = app.add_subcommand(
      "crossval", "Cross-validation table from precomputed or computable cells");
  cv_cmd->add_option("spec", crossval_spec, "Cross-validation JSON")->required();
  add_registration_flags(cv_cmd, cv_opts);
  cv_opts.format = "markdown";
  cv_cmd->add_option("--conf-threshold", cv_opts.conf_threshold)
      ->capture_default_str();
  add_output_flags(cv_cmd, cv_opts);

  CLI::App* reg_cmd = app.add_subcommand(
      "register", "Register one image pair and print its correspondences");
  reg_cmd->add_option("real_labels", real_labels)->required();
  reg_cmd->add_option("synth_labels", synth_labels)->required();
  reg_cmd->add_option("--coords", reg_files.coords, "pixel or normalized")
      ->capture_default_str();
  reg_cmd->add_option("--width", reg_files.width, "Image width for normalized labels");
  reg_cmd->add_option("--height", reg_files.height,
                      "Image height for normalized labels");
  add_registration_flags(reg_cmd, reg_opts);
  reg_cmd->add_option("--out", reg_opts.out_path);

  CLI::App* gen_cmd =
      app.add_subcommand("scenegen", "Write synthetic paired test datasets");
  gen_cmd->add_option("--out-dir", gen.out_dir)->required();
  gen_cmd->add_option("--spec", gen.spec_path, "SceneSpec JSON file");
  gen_cmd->add_option("--pairs", gen.pairs)->capture_default_str();
  gen_cmd->add_option("--instances", gen.instances)->capture_default_str();
  gen_cmd->add_option("--width", gen.width)->capture_default_str();
  gen_cmd->add_option("--height", gen.height)->capture_default_str();
  gen_cmd->add_option("--noise", gen.noise, "Real center noise sigma (px)")
      ->capture_default_str();
  gen_cmd->add_option("--dropout-real", gen.dropout_real)->capture_default_str();
  gen_cmd->add_option("--dropout-synth", gen.dropout_synth)->capture_default_str();
  gen_cmd->add_option("--real-iou", gen.real_iou)->capture_default_str();
  gen_cmd->add_option("--real-spread", gen.real_spread)->capture_default_str();
  gen_cmd->add_option("--synth-iou", gen.synth_iou)->capture_default_str();
  gen_cmd->add_option("--synth-spread", gen.synth_spread)->capture_default_str();
  gen_cmd->add_option("--min-box", gen.min_box)->capture_default_str();
  gen_cmd->add_option("--max-box", gen.max_box)->capture_default_str();
  gen_cmd->add_option("--transform", gen.transform, "a11,a12,a21,a22,tx,ty")
      ->delimiter(',');
  gen_cmd->add_option("--max-condition", gen.max_condition,
                      "Random affine per pair with this condition bound");
  gen_cmd->add_option("--coords", gen.coords)->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (ipd_cmd->parsed()) {
      return cmd_ipd(real_manifest, synth_manifest, ipd_opts, out, err);
    }
    if (cv_cmd->parsed()) return cmd_crossval(crossval_spec, cv_opts, out, err);
    if (reg_cmd->parsed()) {
      return cmd_register(real_labels, synth_labels, reg_opts, reg_files, out, err);
    }
    if (gen_cmd->parsed()) {
      apply_spec_file(gen, *gen_cmd);
      return cmd_scenegen(gen, out);
    }
  } catch (const NoInstancesError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNoPairs;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace ipd::cli
