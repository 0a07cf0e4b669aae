// SPDX-License-Identifier: Apache-2.0

#include "ipd/ingestion.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ipd/errors.h"
#include "json.hpp"

namespace ipd {

using json = nlohmann::json;

void validate(const ImageLabels& labels) {
  if (labels.width_px <= 0 || labels.height_px <= 0) {
    throw InputError("image " + labels.image_id +
                     ": frame dimensions must be positive");
  }
  const double w = labels.width_px, h = labels.height_px;
  const auto check = [&](const BBox& b, bool is_pred, std::size_t i) {
    const std::string where = "image " + labels.image_id + ", " +
                              (is_pred ? "prediction " : "ground truth ") +
                              std::to_string(i);
    try {
      validate(b);
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
    if (b.cx < -0.1 * w || b.cx > 1.1 * w || b.cy < -0.1 * h || b.cy > 1.1 * h) {
      throw InputError(where + ": center lies outside the image frame");
    }
    if (is_pred != b.confidence.has_value()) {
      throw InputError(where + (is_pred ? ": prediction lacks a confidence"
                                        : ": ground truth carries a confidence"));
    }
  };
  for (std::size_t i = 0; i < labels.gt_boxes.size(); ++i) {
    check(labels.gt_boxes[i], false, i);
  }
  for (std::size_t i = 0; i < labels.pred_boxes.size(); ++i) {
    check(labels.pred_boxes[i], true, i);
  }
}

std::vector<Point2> gt_centers(const ImageLabels& labels) {
  std::vector<Point2> out;
  out.reserve(labels.gt_boxes.size());
  for (const BBox& b : labels.gt_boxes) out.push_back(bbox_center(b));
  return out;
}

std::string to_string(CoordinateMode mode) {
  return mode == CoordinateMode::kNormalized ? "normalized" : "pixel";
}

CoordinateMode coordinate_mode_from_string(const std::string& s) {
  if (s == "normalized") return CoordinateMode::kNormalized;
  if (s == "pixel") return CoordinateMode::kPixel;
  throw InputError("unknown coordinate mode '" + s +
                   "' (expected normalized or pixel)");
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view tok, T& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

}  // namespace

std::vector<BBox> parse_label_file(std::string_view content, CoordinateMode mode,
                                   ImageDims dims, const std::string& source) {
  if (mode == CoordinateMode::kNormalized &&
      (dims.width_px <= 0 || dims.height_px <= 0)) {
    throw InputError(source + ": normalized labels need positive image dims");
  }
  const double sx = mode == CoordinateMode::kNormalized ? dims.width_px : 1.0;
  const double sy = mode == CoordinateMode::kNormalized ? dims.height_px : 1.0;

  std::vector<BBox> boxes;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const auto fields = split_ws(line);
    if (fields.empty() || fields.front().front() == '#') {
      if (end == content.size()) break;
      continue;
    }
    if (fields.size() != 5 && fields.size() != 6) {
      throw ParseError(source, line_no,
                       "expected 5 or 6 fields, got " +
                           std::to_string(fields.size()));
    }
    BBox b;
    if (!parse_number(fields[0], b.class_id)) {
      throw ParseError(source, line_no,
                       "class id '" + std::string(fields[0]) + "' is not an integer");
    }
    double v[5] = {};
    for (std::size_t k = 1; k < fields.size(); ++k) {
      if (!parse_number(fields[k], v[k - 1]) || !std::isfinite(v[k - 1])) {
        throw ParseError(source, line_no,
                         "field " + std::to_string(k + 1) + " '" +
                             std::string(fields[k]) + "' is not a finite number");
      }
    }
    if (v[2] <= 0.0 || v[3] <= 0.0) {
      throw ParseError(source, line_no, "box width and height must be positive");
    }
    b.cx = v[0] * sx;
    b.cy = v[1] * sy;
    b.w = v[2] * sx;
    b.h = v[3] * sy;
    if (fields.size() == 6) {
      if (v[4] < 0.0 || v[4] > 1.0) {
        throw ParseError(source, line_no, "confidence must lie in [0,1]");
      }
      b.confidence = v[4];
    }
    boxes.push_back(b);
    if (end == content.size()) break;
  }
  return boxes;
}

std::string serialize_label_file(const std::vector<BBox>& boxes,
                                 CoordinateMode mode, ImageDims dims) {
  const double sx = mode == CoordinateMode::kNormalized ? dims.width_px : 1.0;
  const double sy = mode == CoordinateMode::kNormalized ? dims.height_px : 1.0;
  std::ostringstream os;
  os.precision(17);
  for (const BBox& b : boxes) {
    os << b.class_id << ' ' << b.cx / sx << ' ' << b.cy / sy << ' ' << b.w / sx
       << ' ' << b.h / sy;
    if (b.confidence) os << ' ' << *b.confidence;
    os << '\n';
  }
  return os.str();
}

std::string manifest_to_json(const DatasetManifest& manifest) {
  json j;
  j["dataset_id"] = manifest.dataset_id;
  j["coordinate_mode"] = to_string(manifest.coordinate_mode);
  j["entries"] = json::array();
  for (const ManifestEntry& e : manifest.entries) {
    j["entries"].push_back({{"image_id", e.image_id},
                            {"gt_label_path", e.gt_label_path},
                            {"pred_label_path", e.pred_label_path},
                            {"width_px", e.width_px},
                            {"height_px", e.height_px}});
  }
  j["pairing"] = json::array();
  for (const ImagePair& p : manifest.pairing) {
    j["pairing"].push_back(
        {{"real_image_id", p.real_image_id}, {"synth_image_id", p.synth_image_id}});
  }
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text,
                                   const std::filesystem::path& base_dir) {
  DatasetManifest m;
  m.base_dir = base_dir;
  try {
    const json j = json::parse(text);
    m.dataset_id = j.at("dataset_id").get<std::string>();
    m.coordinate_mode =
        coordinate_mode_from_string(j.at("coordinate_mode").get<std::string>());
    for (const json& e : j.at("entries")) {
      ManifestEntry entry;
      entry.image_id = e.at("image_id").get<std::string>();
      entry.gt_label_path = e.at("gt_label_path").get<std::string>();
      entry.pred_label_path = e.at("pred_label_path").get<std::string>();
      entry.width_px = e.at("width_px").get<int>();
      entry.height_px = e.at("height_px").get<int>();
      m.entries.push_back(std::move(entry));
    }
    if (j.contains("pairing")) {
      for (const json& p : j.at("pairing")) {
        m.pairing.push_back({p.at("real_image_id").get<std::string>(),
                             p.at("synth_image_id").get<std::string>()});
      }
    }
  } catch (const json::exception& e) {
    throw LoadError(std::string("malformed manifest: ") + e.what());
  } catch (const InputError& e) {
    throw LoadError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot read file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

DatasetManifest read_manifest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return manifest_from_json(text, path.parent_path());
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

void write_manifest(const DatasetManifest& manifest,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << manifest_to_json(manifest);
}

const ImageLabels* Dataset::find(const std::string& image_id) const {
  for (const ImageLabels& img : images) {
    if (img.image_id == image_id) return &img;
  }
  return nullptr;
}

Dataset load_dataset(const DatasetManifest& manifest, PairingSide side) {
  Dataset ds;
  ds.dataset_id = manifest.dataset_id;
  std::set<std::string> ids;
  for (const ManifestEntry& e : manifest.entries) {
    if (!ids.insert(e.image_id).second) {
      throw LoadError("dataset " + manifest.dataset_id +
                      ": duplicate image_id " + e.image_id);
    }
    const ImageDims dims{e.width_px, e.height_px};
    if (e.width_px <= 0 || e.height_px <= 0) {
      throw LoadError("dataset " + manifest.dataset_id + ", image " +
                      e.image_id + ": frame dimensions must be positive");
    }
    const auto load = [&](const std::string& rel, bool is_pred) {
      const std::filesystem::path path = manifest.base_dir / rel;
      std::vector<BBox> boxes = parse_label_file(
          read_file(path), manifest.coordinate_mode, dims, path.string());
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        if (boxes[i].confidence.has_value() != is_pred) {
          throw LoadError(path.string() + ": box " + std::to_string(i) +
                          (is_pred ? " has no confidence field"
                                   : " carries a confidence field"));
        }
      }
      return boxes;
    };
    ImageLabels img;
    img.image_id = e.image_id;
    img.width_px = e.width_px;
    img.height_px = e.height_px;
    img.gt_boxes = load(e.gt_label_path, false);
    img.pred_boxes = load(e.pred_label_path, true);
    try {
      validate(img);
    } catch (const LoadError&) {
      throw;
    } catch (const InputError& err) {
      throw LoadError("dataset " + manifest.dataset_id + ": " + err.what());
    }
    ds.images.push_back(std::move(img));
  }

  std::set<std::string> seen_real, seen_synth;
  for (const ImagePair& p : manifest.pairing) {
    const std::string& own =
        side == PairingSide::kReal ? p.real_image_id : p.synth_image_id;
    if (!ids.contains(own)) {
      throw LoadError("dataset " + manifest.dataset_id +
                      ": pairing references unknown image_id " + own);
    }
    if (!seen_real.insert(p.real_image_id).second) {
      throw LoadError("dataset " + manifest.dataset_id +
                      ": image_id " + p.real_image_id +
                      " appears twice on the real side of the pairing");
    }
    if (!seen_synth.insert(p.synth_image_id).second) {
      throw LoadError("dataset " + manifest.dataset_id +
                      ": image_id " + p.synth_image_id +
                      " appears twice on the synthetic side of the pairing");
    }
  }
  ds.pairing = manifest.pairing;
  return ds;
}

}  // namespace ipd
