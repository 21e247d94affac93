#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "aviary/flocksynth.hpp"
#include "aviary/image.hpp"

namespace aviary {

enum class CorpusTask { Formations, Alignments, FlockSize, Cascade, Unified };
const char* to_string(CorpusTask t);
CorpusTask corpus_task_from_string(const std::string& s);

/// Generation parameters for one synthetic corpus. defaults_for() fills in
/// per-task canvas/sprite/count ranges; every field can be overridden before
/// calling generate_corpus, and the whole struct round-trips through JSON so
/// runs are reproducible from their echoed config.
struct CorpusConfig {
  CorpusTask task = CorpusTask::Formations;
  int per_class = 120;
  std::uint64_t seed = 0;
  std::string out_dir;

  int canvas = 384;
  int sprite_px = 40;
  double sprite_scale_min = 0.8;
  double sprite_scale_max = 1.1;
  int count_min = 9;
  int count_max = 12;
  double spacing_min = 18.0;
  double spacing_max = 24.0;
  double jitter_factor = 0.15;  // jitter std-dev = factor * spacing
  // Formation classes are defined relative to the travel direction, so the
  // camera is assumed roughly track-aligned: headings are drawn in a band
  // around +x (wrapped into [0, 360)). An unbounded range would alias
  // V/InvertedV, Column/Front and J/InvertedJ into each other.
  double heading_min_deg = -12.0;
  double heading_max_deg = 12.0;

  // side-view task
  double slope_min = 5.0;
  double slope_max = 9.0;

  // flock-size task: cluster spread scales with sqrt(count / 12)
  double size_base_spacing = 10.0;

  // cascade/unified aircraft class
  int aircraft_sprite_px = 64;
  double aircraft_scale_min = 1.2;
  double aircraft_scale_max = 1.8;

  std::array<double, 3> sky = {0.42, 0.65, 0.87};
  double train_frac = 0.8;
  double val_frac = 0.1;
  FormationGeometry geometry;

  // Optional RGBA sprite PNG replacing the procedurally drawn bird.
  std::string sprite_png;
};

CorpusConfig defaults_for(CorpusTask task);

nlohmann::ordered_json corpus_config_to_json(const CorpusConfig& cfg);
CorpusConfig corpus_config_from_json(const nlohmann::json& j);

/// One corpus image and its labels. Fields that do not apply to the task are
/// left empty (count 0 for aircraft rows).
struct ManifestRow {
  std::string path;  // relative to the manifest's directory
  std::string formation;
  std::string alignment;
  std::string coarse;      // "bird" / "aircraft" (cascade & unified tasks)
  std::string size_label;  // synthetic size group (cascade task)
  std::string species;     // formation name or "Aircraft" (cascade & unified)
  std::string size_bin;
  int count = 0;
  std::string split;  // "train" / "val" / "test"
};

struct Manifest {
  std::vector<ManifestRow> rows;
  std::uint64_t seed = 0;
  nlohmann::ordered_json config_echo;
  std::string root_dir;  // directory holding manifest.json; filled on load
};

/// Renders every image of the corpus to out_dir/images/, writes
/// out_dir/manifest.json and echoes the defining sprite PNGs next to it.
/// Deterministic: the same config and seed give byte-identical output.
Manifest generate_corpus(const CorpusConfig& cfg);

void save_manifest(const Manifest& manifest, const std::string& path);
Manifest load_manifest(const std::string& path);

/// The class label a manifest row carries for a given task.
std::string task_label(const ManifestRow& row, CorpusTask task);

/// Canonical class list for a task.
std::vector<std::string> task_classes(CorpusTask task);

/// Rows of one split ("train"/"val"/"test"); empty split selects all rows.
std::vector<const ManifestRow*> rows_of_split(const Manifest& m, const std::string& split);

/// Loads the image behind a row (path resolved against the manifest root).
Image load_row_image(const Manifest& m, const ManifestRow& row);

/// The synthetic size grouping used by the cascade task: every formation
/// belongs to exactly one of the three groups.
std::string cascade_size_group(FormationKind kind);
std::vector<std::string> cascade_species_of_group(const std::string& group);

}  // namespace aviary
