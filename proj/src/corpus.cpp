#include "aviary/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "aviary/errors.hpp"
#include "aviary/parallel.hpp"
#include "aviary/png_io.hpp"
#include "aviary/rng.hpp"

namespace fs = std::filesystem;

namespace aviary {

const char* to_string(CorpusTask t) {
  switch (t) {
    case CorpusTask::Formations: return "formations";
    case CorpusTask::Alignments: return "alignments";
    case CorpusTask::FlockSize: return "flock_size";
    case CorpusTask::Cascade: return "cascade";
    case CorpusTask::Unified: return "unified";
  }
  return "?";
}

CorpusTask corpus_task_from_string(const std::string& s) {
  if (s == "formations") return CorpusTask::Formations;
  if (s == "alignments") return CorpusTask::Alignments;
  if (s == "flock_size") return CorpusTask::FlockSize;
  if (s == "cascade") return CorpusTask::Cascade;
  if (s == "unified") return CorpusTask::Unified;
  throw ValidationError("unknown corpus task '" + s + "'");
}

CorpusConfig defaults_for(CorpusTask task) {
  CorpusConfig cfg;
  cfg.task = task;
  switch (task) {
    case CorpusTask::Formations:
    case CorpusTask::Cascade:
    case CorpusTask::Unified:
      break;  // struct defaults
    case CorpusTask::Alignments:
      cfg.count_min = 6;
      cfg.count_max = 10;
      cfg.spacing_min = 22.0;
      cfg.spacing_max = 30.0;
      cfg.sprite_scale_min = 0.9;
      cfg.sprite_scale_max = 1.1;
      break;
    case CorpusTask::FlockSize:
      cfg.sprite_scale_min = 0.40;
      cfg.sprite_scale_max = 0.50;
      cfg.heading_min_deg = 0.0;  // isotropic clusters; heading free
      cfg.heading_max_deg = 360.0;
      break;
  }
  return cfg;
}

nlohmann::ordered_json corpus_config_to_json(const CorpusConfig& cfg) {
  nlohmann::ordered_json j;
  j["task"] = to_string(cfg.task);
  j["per_class"] = cfg.per_class;
  j["seed"] = cfg.seed;
  j["canvas"] = cfg.canvas;
  j["sprite_px"] = cfg.sprite_px;
  j["sprite_scale_min"] = cfg.sprite_scale_min;
  j["sprite_scale_max"] = cfg.sprite_scale_max;
  j["count_min"] = cfg.count_min;
  j["count_max"] = cfg.count_max;
  j["spacing_min"] = cfg.spacing_min;
  j["spacing_max"] = cfg.spacing_max;
  j["jitter_factor"] = cfg.jitter_factor;
  j["heading_min_deg"] = cfg.heading_min_deg;
  j["heading_max_deg"] = cfg.heading_max_deg;
  j["slope_min"] = cfg.slope_min;
  j["slope_max"] = cfg.slope_max;
  j["size_base_spacing"] = cfg.size_base_spacing;
  j["aircraft_sprite_px"] = cfg.aircraft_sprite_px;
  j["aircraft_scale_min"] = cfg.aircraft_scale_min;
  j["aircraft_scale_max"] = cfg.aircraft_scale_max;
  j["sky"] = {cfg.sky[0], cfg.sky[1], cfg.sky[2]};
  j["train_frac"] = cfg.train_frac;
  j["val_frac"] = cfg.val_frac;
  if (!cfg.sprite_png.empty()) j["sprite_png"] = cfg.sprite_png;
  j["geometry"] = {{"arm_angle_deg", cfg.geometry.arm_angle_deg},
                   {"j_short_arm_ratio", cfg.geometry.j_short_arm_ratio},
                   {"branch_fraction", cfg.geometry.branch_fraction},
                   {"branch_angle_deg", cfg.geometry.branch_angle_deg},
                   {"cluster_sigma_factor", cfg.geometry.cluster_sigma_factor},
                   {"cluster_minor_factor", cfg.geometry.cluster_minor_factor}};
  return j;
}

CorpusConfig corpus_config_from_json(const nlohmann::json& j) {
  CorpusConfig cfg = defaults_for(corpus_task_from_string(j.at("task").get<std::string>()));
  auto get = [&](const char* key, auto& target) {
    if (j.contains(key)) target = j.at(key).get<std::decay_t<decltype(target)>>();
  };
  get("per_class", cfg.per_class);
  get("seed", cfg.seed);
  get("canvas", cfg.canvas);
  get("sprite_px", cfg.sprite_px);
  get("sprite_scale_min", cfg.sprite_scale_min);
  get("sprite_scale_max", cfg.sprite_scale_max);
  get("count_min", cfg.count_min);
  get("count_max", cfg.count_max);
  get("spacing_min", cfg.spacing_min);
  get("spacing_max", cfg.spacing_max);
  get("jitter_factor", cfg.jitter_factor);
  get("heading_min_deg", cfg.heading_min_deg);
  get("heading_max_deg", cfg.heading_max_deg);
  get("slope_min", cfg.slope_min);
  get("slope_max", cfg.slope_max);
  get("size_base_spacing", cfg.size_base_spacing);
  get("aircraft_sprite_px", cfg.aircraft_sprite_px);
  get("aircraft_scale_min", cfg.aircraft_scale_min);
  get("aircraft_scale_max", cfg.aircraft_scale_max);
  get("train_frac", cfg.train_frac);
  get("val_frac", cfg.val_frac);
  get("sprite_png", cfg.sprite_png);
  if (j.contains("sky")) {
    for (int i = 0; i < 3; ++i) cfg.sky[i] = j.at("sky").at(i).get<double>();
  }
  if (j.contains("geometry")) {
    const auto& g = j.at("geometry");
    auto getg = [&](const char* key, double& target) {
      if (g.contains(key)) target = g.at(key).get<double>();
    };
    getg("arm_angle_deg", cfg.geometry.arm_angle_deg);
    getg("j_short_arm_ratio", cfg.geometry.j_short_arm_ratio);
    getg("branch_fraction", cfg.geometry.branch_fraction);
    getg("branch_angle_deg", cfg.geometry.branch_angle_deg);
    getg("cluster_sigma_factor", cfg.geometry.cluster_sigma_factor);
    getg("cluster_minor_factor", cfg.geometry.cluster_minor_factor);
  }
  return cfg;
}

std::string cascade_size_group(FormationKind kind) {
  switch (kind) {
    case FormationKind::GlobularCluster:
    case FormationKind::FrontCluster:
    case FormationKind::ExtendedCluster:
    case FormationKind::ClosedLine:
      return "small";
    case FormationKind::Column:
    case FormationKind::Front:
    case FormationKind::Echelon:
    case FormationKind::J:
      return "medium";
    case FormationKind::V:
    case FormationKind::InvertedV:
    case FormationKind::InvertedJ:
    case FormationKind::BranchedV:
      return "large";
  }
  return "?";
}

std::vector<std::string> cascade_species_of_group(const std::string& group) {
  std::vector<std::string> out;
  for (int i = 0; i < kFormationCount; ++i) {
    const auto kind = static_cast<FormationKind>(i);
    if (cascade_size_group(kind) == group) out.emplace_back(to_string(kind));
  }
  return out;
}

std::string task_label(const ManifestRow& row, CorpusTask task) {
  switch (task) {
    case CorpusTask::Formations: return row.formation;
    case CorpusTask::Alignments: return row.alignment;
    case CorpusTask::FlockSize: return row.size_bin;
    case CorpusTask::Cascade:
    case CorpusTask::Unified: return row.species;
  }
  return {};
}

std::vector<std::string> task_classes(CorpusTask task) {
  switch (task) {
    case CorpusTask::Formations: return formation_names();
    case CorpusTask::Alignments: return alignment_names();
    case CorpusTask::FlockSize: return size_bin_names();
    case CorpusTask::Cascade:
    case CorpusTask::Unified: {
      auto names = formation_names();
      names.emplace_back("Aircraft");
      return names;
    }
  }
  return {};
}

std::vector<const ManifestRow*> rows_of_split(const Manifest& m, const std::string& split) {
  std::vector<const ManifestRow*> out;
  for (const auto& row : m.rows) {
    if (split.empty() || row.split == split) out.push_back(&row);
  }
  return out;
}

Image load_row_image(const Manifest& m, const ManifestRow& row) {
  const fs::path p = fs::path(m.root_dir) / row.path;
  return load_png(p.string());
}

namespace {

/// Per-class split labels: seeded shuffle, then round(train_frac*n) train and
/// round(val_frac*n) val, remainder test.
std::vector<std::string> split_labels(int n, double train_frac, double val_frac,
                                      std::uint64_t seed, std::uint64_t class_stream) {
  const int n_train = static_cast<int>(std::lround(train_frac * n));
  const int n_val = static_cast<int>(std::lround(val_frac * n));
  if (n_train + n_val > n) {
    throw ValidationError("generate_corpus: train/val fractions exceed the class size");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  SeededRng rng(seed, 0x5713A0 + class_stream);
  rng.shuffle(order);
  std::vector<std::string> labels(n);
  for (int i = 0; i < n; ++i) {
    if (i < n_train) labels[order[i]] = "train";
    else if (i < n_train + n_val) labels[order[i]] = "val";
    else labels[order[i]] = "test";
  }
  return labels;
}

struct PlannedImage {
  ManifestRow row;
  FlockSpec spec;                 // bottom-view tasks
  VerticalAlignment alignment{};  // side view
  double side_spacing = 0, side_slope = 0, side_jitter = 0, side_scale = 1.0;
  std::uint64_t side_seed = 0;
  int side_count = 0;
  bool is_aircraft = false;
  double aircraft_scale = 1.0;
  double aircraft_heading = 0.0;
  double aircraft_off_x = 0.0, aircraft_off_y = 0.0;
};

std::string zero_pad(int v, int width) {
  std::string s = std::to_string(v);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

std::string sanitize(const std::string& label) {
  std::string out = label;
  for (char& c : out) {
    if (c == '/' || c == ' ') c = '_';
  }
  return out;
}

double wrap_heading(double deg) {
  double h = std::fmod(deg, 360.0);
  if (h < 0.0) h += 360.0;
  return h >= 360.0 ? 0.0 : h;
}

}  // namespace

Manifest generate_corpus(const CorpusConfig& cfg) {
  if (cfg.per_class < 1) throw ValidationError("generate_corpus: per_class must be >= 1");
  if (cfg.out_dir.empty()) throw ValidationError("generate_corpus: out_dir is required");
  if (cfg.count_min < 2 || cfg.count_max < cfg.count_min) {
    throw ValidationError("generate_corpus: invalid count range");
  }
  if (cfg.train_frac < 0 || cfg.val_frac < 0 || cfg.train_frac + cfg.val_frac > 1.0) {
    throw ValidationError("generate_corpus: invalid split fractions");
  }

  std::error_code ec;
  fs::create_directories(fs::path(cfg.out_dir) / "images", ec);
  if (ec) throw IoError("generate_corpus: cannot create '" + cfg.out_dir + "': " + ec.message());

  const auto classes = task_classes(cfg.task);
  RenderOptions options;
  options.sky = cfg.sky;
  options.geometry = cfg.geometry;

  // Plan all rows first (deterministic order: class-major, index-minor).
  std::vector<PlannedImage> plan;
  plan.reserve(classes.size() * static_cast<std::size_t>(cfg.per_class));
  for (std::size_t ci = 0; ci < classes.size(); ++ci) {
    const std::string& cls = classes[ci];
    const auto splits = split_labels(cfg.per_class, cfg.train_frac, cfg.val_frac, cfg.seed, ci);
    for (int i = 0; i < cfg.per_class; ++i) {
      SeededRng rng(cfg.seed, (static_cast<std::uint64_t>(ci) << 24) | static_cast<std::uint64_t>(i));
      PlannedImage p;
      p.row.split = splits[i];
      p.row.path = "images/" + sanitize(cls) + "_" + zero_pad(i, 4) + ".png";

      switch (cfg.task) {
        case CorpusTask::Formations:
        case CorpusTask::Cascade:
        case CorpusTask::Unified: {
          if (cls == "Aircraft") {
            p.is_aircraft = true;
            p.aircraft_scale = rng.uniform(cfg.aircraft_scale_min, cfg.aircraft_scale_max);
            p.aircraft_heading =
                wrap_heading(rng.uniform(cfg.heading_min_deg, cfg.heading_max_deg));
            p.aircraft_off_x = rng.uniform(-0.1, 0.1) * cfg.canvas;
            p.aircraft_off_y = rng.uniform(-0.1, 0.1) * cfg.canvas;
            p.row.coarse = "aircraft";
            p.row.species = "Aircraft";
          } else {
            const auto kind = formation_from_string(cls);
            p.spec.kind = kind;
            p.spec.count = static_cast<int>(rng.uniform_int(cfg.count_min, cfg.count_max));
            p.spec.spacing = rng.uniform(cfg.spacing_min, cfg.spacing_max);
            p.spec.jitter = cfg.jitter_factor * p.spec.spacing;
            p.spec.heading_deg =
                wrap_heading(rng.uniform(cfg.heading_min_deg, cfg.heading_max_deg));
            p.spec.sprite_scale = rng.uniform(cfg.sprite_scale_min, cfg.sprite_scale_max);
            p.spec.seed = rng.next_u64();
            p.row.formation = cls;
            p.row.count = p.spec.count;
            if (p.spec.count >= 5 && p.spec.count <= 100) {
              p.row.size_bin = to_string(bin_flock_size(p.spec.count));
            }
            if (cfg.task != CorpusTask::Formations) {
              p.row.coarse = "bird";
              p.row.species = cls;
              p.row.size_label = cascade_size_group(kind);
            }
          }
          break;
        }
        case CorpusTask::Alignments: {
          p.alignment = alignment_from_string(cls);
          p.side_count = static_cast<int>(rng.uniform_int(cfg.count_min, cfg.count_max));
          p.side_spacing = rng.uniform(cfg.spacing_min, cfg.spacing_max);
          p.side_slope = rng.uniform(cfg.slope_min, cfg.slope_max);
          p.side_jitter = cfg.jitter_factor * p.side_spacing;
          p.side_scale = rng.uniform(cfg.sprite_scale_min, cfg.sprite_scale_max);
          p.side_seed = rng.next_u64();
          p.row.alignment = cls;
          p.row.formation = "Column";
          p.row.count = p.side_count;
          break;
        }
        case CorpusTask::FlockSize: {
          const auto bin = size_bin_from_string(cls);
          int lo = 5, hi = 20;
          switch (bin) {
            case FlockSizeBin::B5_20: lo = 5; hi = 20; break;
            case FlockSizeBin::B21_40: lo = 21; hi = 40; break;
            case FlockSizeBin::B41_60: lo = 41; hi = 60; break;
            case FlockSizeBin::B61_80: lo = 61; hi = 80; break;
            case FlockSizeBin::B81_100: lo = 81; hi = 100; break;
          }
          p.spec.kind = FormationKind::GlobularCluster;
          p.spec.count = static_cast<int>(rng.uniform_int(lo, hi));
          // constant bird density: spread grows with sqrt(count)
          p.spec.spacing = cfg.size_base_spacing * std::sqrt(p.spec.count / 12.0);
          p.spec.jitter = cfg.jitter_factor * p.spec.spacing;
          p.spec.heading_deg =
              wrap_heading(rng.uniform(cfg.heading_min_deg, cfg.heading_max_deg));
          p.spec.sprite_scale = rng.uniform(cfg.sprite_scale_min, cfg.sprite_scale_max);
          p.spec.seed = rng.next_u64();
          p.row.formation = to_string(p.spec.kind);
          p.row.count = p.spec.count;
          p.row.size_bin = cls;
          break;
        }
      }
      plan.push_back(std::move(p));
    }
  }

  // Shared sprites, echoed next to the manifest for provenance. A user PNG
  // with alpha replaces the procedural bird for both views.
  const Sprite bottom_sprite =
      cfg.sprite_png.empty() ? make_bottom_view_sprite(cfg.sprite_px) : load_sprite(cfg.sprite_png);
  const Sprite side_sprite =
      cfg.sprite_png.empty() ? make_side_view_sprite(cfg.sprite_px) : load_sprite(cfg.sprite_png);
  const Sprite aircraft_sprite = make_aircraft_sprite(cfg.aircraft_sprite_px);
  fs::create_directories(fs::path(cfg.out_dir) / "sprites", ec);
  if (cfg.task == CorpusTask::Alignments) {
    save_png_rgba(side_sprite.color, side_sprite.alpha,
                  (fs::path(cfg.out_dir) / "sprites" / "side_view.png").string());
  } else {
    save_png_rgba(bottom_sprite.color, bottom_sprite.alpha,
                  (fs::path(cfg.out_dir) / "sprites" / "bottom_view.png").string());
  }
  if (cfg.task == CorpusTask::Cascade || cfg.task == CorpusTask::Unified) {
    save_png_rgba(aircraft_sprite.color, aircraft_sprite.alpha,
                  (fs::path(cfg.out_dir) / "sprites" / "aircraft.png").string());
  }

  parallel_for(plan.size(), [&](std::size_t idx) {
    const PlannedImage& p = plan[idx];
    Image img;
    if (p.is_aircraft) {
      Image canvas(cfg.canvas, cfg.canvas, 3);
      for (int y = 0; y < cfg.canvas; ++y) {
        for (int x = 0; x < cfg.canvas; ++x) {
          canvas.at(y, x, 0) = cfg.sky[0];
          canvas.at(y, x, 1) = cfg.sky[1];
          canvas.at(y, x, 2) = cfg.sky[2];
        }
      }
      const double cx = cfg.canvas * 0.5 + p.aircraft_off_x;
      const double cy = cfg.canvas * 0.5 + p.aircraft_off_y;
      composite_sprite(canvas, aircraft_sprite, cx, cy, p.aircraft_heading, p.aircraft_scale);
      img = std::move(canvas);
    } else if (cfg.task == CorpusTask::Alignments) {
      img = render_side_view(p.alignment, p.side_count, p.side_spacing, p.side_slope, side_sprite,
                             cfg.canvas, cfg.canvas, p.side_jitter, p.side_seed, p.side_scale,
                             options)
                .image;
    } else {
      img = render_bottom_view(p.spec, bottom_sprite, cfg.canvas, cfg.canvas, options).image;
    }
    save_png(img, (fs::path(cfg.out_dir) / p.row.path).string());
  });

  Manifest manifest;
  manifest.seed = cfg.seed;
  manifest.config_echo = corpus_config_to_json(cfg);
  manifest.root_dir = cfg.out_dir;
  manifest.rows.reserve(plan.size());
  for (auto& p : plan) manifest.rows.push_back(std::move(p.row));

  save_manifest(manifest, (fs::path(cfg.out_dir) / "manifest.json").string());
  return manifest;
}

void save_manifest(const Manifest& manifest, const std::string& path) {
  nlohmann::ordered_json j;
  auto& images = j["images"];
  images = nlohmann::ordered_json::array();
  for (const auto& row : manifest.rows) {
    nlohmann::ordered_json r;
    r["path"] = row.path;
    if (!row.formation.empty()) r["formation"] = row.formation;
    if (!row.alignment.empty()) r["alignment"] = row.alignment;
    if (!row.coarse.empty()) r["coarse"] = row.coarse;
    if (!row.size_label.empty()) r["size_label"] = row.size_label;
    if (!row.species.empty()) r["species"] = row.species;
    if (row.count > 0) r["count"] = row.count;
    if (!row.size_bin.empty()) r["size_bin"] = row.size_bin;
    r["split"] = row.split;
    images.push_back(std::move(r));
  }
  j["seed"] = manifest.seed;
  j["config"] = manifest.config_echo;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_manifest: cannot write '" + path + "'");
  out << j.dump(1) << '\n';
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_manifest: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError("load_manifest: '" + path + "' is not valid JSON: " + e.what());
  }
  Manifest m;
  m.root_dir = fs::path(path).parent_path().string();
  if (m.root_dir.empty()) m.root_dir = ".";
  if (j.contains("seed")) m.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("config")) m.config_echo = j.at("config");
  if (!j.contains("images")) throw ValidationError("load_manifest: missing 'images' array");
  for (const auto& r : j.at("images")) {
    ManifestRow row;
    row.path = r.at("path").get<std::string>();
    auto gets = [&](const char* key, std::string& target) {
      if (r.contains(key)) target = r.at(key).get<std::string>();
    };
    gets("formation", row.formation);
    gets("alignment", row.alignment);
    gets("coarse", row.coarse);
    gets("size_label", row.size_label);
    gets("species", row.species);
    gets("size_bin", row.size_bin);
    if (r.contains("count")) row.count = r.at("count").get<int>();
    row.split = r.at("split").get<std::string>();
    m.rows.push_back(std::move(row));
  }
  return m;
}

}  // namespace aviary
