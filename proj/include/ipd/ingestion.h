// SPDX-License-Identifier: Apache-2.0
//
// Label files and dataset manifests.
//
// A label file holds one box per line: `class_id cx cy w h [confidence]`,
// whitespace separated. Five fields mark a ground-truth box, six a prediction.
// Blank lines and lines starting with `#` are ignored.
//
// A manifest is a JSON document:
//
//   {
//     "dataset_id": "field-real",
//     "coordinate_mode": "normalized" | "pixel",
//     "entries": [{"image_id": ..., "gt_label_path": ..., "pred_label_path": ...,
//                  "width_px": ..., "height_px": ...}, ...],
//     "pairing": [{"real_image_id": ..., "synth_image_id": ...}, ...]
//   }
//
// Label paths are resolved relative to the manifest's directory.

#ifndef IPD_INGESTION_H_
#define IPD_INGESTION_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ipd/geometry.h"
#include "ipd/labels.h"

namespace ipd {

enum class CoordinateMode { kNormalized, kPixel };

std::string to_string(CoordinateMode mode);
CoordinateMode coordinate_mode_from_string(const std::string& s);

struct ImageDims {
  int width_px = 0;
  int height_px = 0;
};

// Throws ParseError carrying `source` and the 1-based line number.
std::vector<BBox> parse_label_file(std::string_view content, CoordinateMode mode,
                                   ImageDims dims,
                                   const std::string& source = "<labels>");

// Inverse of parse_label_file at full double precision.
std::string serialize_label_file(const std::vector<BBox>& boxes,
                                 CoordinateMode mode, ImageDims dims);

struct ManifestEntry {
  std::string image_id;
  std::string gt_label_path;
  std::string pred_label_path;
  int width_px = 0;
  int height_px = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct ImagePair {
  std::string real_image_id;
  std::string synth_image_id;

  friend bool operator==(const ImagePair&, const ImagePair&) = default;
};

struct DatasetManifest {
  std::string dataset_id;
  CoordinateMode coordinate_mode = CoordinateMode::kPixel;
  std::vector<ManifestEntry> entries;
  std::vector<ImagePair> pairing;
  // Directory label paths are relative to; not serialized.
  std::filesystem::path base_dir;

  bool operator==(const DatasetManifest& o) const {
    return dataset_id == o.dataset_id && coordinate_mode == o.coordinate_mode &&
           entries == o.entries && pairing == o.pairing;
  }
};

// Which side of the pairing table a dataset plays.
enum class PairingSide { kReal, kSynth };

std::string manifest_to_json(const DatasetManifest& manifest);
// Throws LoadError on malformed JSON or missing fields.
DatasetManifest manifest_from_json(const std::string& text,
                                   const std::filesystem::path& base_dir = {});
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest,
                    const std::filesystem::path& path);

struct Dataset {
  std::string dataset_id;
  std::vector<ImageLabels> images;
  std::vector<ImagePair> pairing;

  // Null when no image has this id.
  const ImageLabels* find(const std::string& image_id) const;
};

// Reads and validates every label file. The pairing's ids on `side` must be
// declared entries, and no id may repeat on either side. Any failure throws
// LoadError (or ParseError for a bad line) and nothing is returned.
Dataset load_dataset(const DatasetManifest& manifest, PairingSide side);

}  // namespace ipd

#endif  // IPD_INGESTION_H_
