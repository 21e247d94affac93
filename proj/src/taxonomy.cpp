#include "aviary/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "aviary/errors.hpp"

namespace aviary {

const char* to_string(SizeClass c) {
  switch (c) {
    case SizeClass::Small: return "small";
    case SizeClass::Medium: return "medium";
    case SizeClass::Large: return "large";
  }
  return "?";
}

SizeClass size_class_from_string(const std::string& s) {
  if (s == "small" || s == "Small") return SizeClass::Small;
  if (s == "medium" || s == "Medium") return SizeClass::Medium;
  if (s == "large" || s == "Large") return SizeClass::Large;
  throw ValidationError("unknown size class '" + s + "'");
}

SizeClass size_class_of(double weight_min, double weight_max, const SizeThresholds& t) {
  if (weight_min <= 0.0 || weight_max <= 0.0) {
    throw std::invalid_argument("size_class_of: weights must be positive");
  }
  if (weight_min > weight_max) {
    throw std::invalid_argument("size_class_of: weight_min must not exceed weight_max");
  }
  if (!(0.0 < t.small_max && t.small_max < t.medium_max && t.medium_max < t.large_max)) {
    throw std::invalid_argument("size_class_of: thresholds must satisfy 0 < small < medium < large");
  }

  if (weight_min == weight_max) {
    if (weight_min <= t.small_max) return SizeClass::Small;
    if (weight_min <= t.medium_max) return SizeClass::Medium;
    return SizeClass::Large;
  }

  const double small_overlap = std::max(0.0, std::min(weight_max, t.small_max) - weight_min);
  const double medium_overlap =
      std::max(0.0, std::min(weight_max, t.medium_max) - std::max(weight_min, t.small_max));
  const double large_overlap = std::max(0.0, weight_max - std::max(weight_min, t.medium_max));

  // Scan Small -> Large with >=, so equal overlaps land on the larger class.
  SizeClass best = SizeClass::Small;
  double best_overlap = small_overlap;
  if (medium_overlap >= best_overlap) { best = SizeClass::Medium; best_overlap = medium_overlap; }
  if (large_overlap >= best_overlap) { best = SizeClass::Large; }
  return best;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::vector<SpeciesRecord> load_species_table(const std::string& path, const SizeThresholds& t) {
  std::ifstream in(path);
  if (!in) throw IoError("load_species_table: cannot open '" + path + "'");

  std::vector<SpeciesRecord> records;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;  // first non-empty line is the header
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 7) {
      throw ValidationError("load_species_table: line " + std::to_string(line_no) +
                            " has " + std::to_string(fields.size()) + " fields, expected 7");
    }
    SpeciesRecord rec;
    rec.name = fields[0];
    try {
      rec.weight_min_g = std::stod(fields[1]);
      rec.weight_max_g = std::stod(fields[2]);
      rec.strike_count = std::stol(fields[3]);
    } catch (const std::exception&) {
      throw ValidationError("load_species_table: line " + std::to_string(line_no) +
                            " ('" + rec.name + "'): numeric field failed to parse");
    }
    const SizeClass recorded = size_class_from_string(fields[4]);
    rec.merged_into = fields[5];
    rec.excluded = (fields[6] == "1" || fields[6] == "true" || fields[6] == "yes");

    rec.assigned_class = size_class_of(rec.weight_min_g, rec.weight_max_g, t);
    if (rec.assigned_class != recorded) {
      throw ValidationError("load_species_table: line " + std::to_string(line_no) + " ('" +
                            rec.name + "'): recorded class '" + fields[4] +
                            "' disagrees with computed class '" +
                            to_string(rec.assigned_class) + "'");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace aviary
