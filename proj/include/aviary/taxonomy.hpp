#pragma once

#include <string>
#include <vector>

namespace aviary {

/// Radar-style size category. Ordered: Small < Medium < Large.
enum class SizeClass { Small, Medium, Large };

const char* to_string(SizeClass c);
SizeClass size_class_from_string(const std::string& s);

/// Gram thresholds separating the size classes. Upper bounds are inclusive
/// (70 g is Small, 71 g is Medium); anything above large_max is still Large.
struct SizeThresholds {
  double small_max = 70.0;
  double medium_max = 800.0;
  double large_max = 1700.0;
};

/// One row of the species table.
struct SpeciesRecord {
  std::string name;
  double weight_min_g = 0.0;
  double weight_max_g = 0.0;
  long strike_count = 0;
  SizeClass assigned_class = SizeClass::Small;
  std::string merged_into;  // empty when the species stands alone
  bool excluded = false;    // dropped from classifier corpora for lack of data
};

/// Classifies a species weight range [weight_min, weight_max] in grams.
/// The class whose gram interval covers the largest share of the range wins;
/// weight above large_max counts toward Large; equal overlaps resolve to the
/// larger class. A degenerate range (min == max) is classified by the point.
SizeClass size_class_of(double weight_min, double weight_max,
                        const SizeThresholds& t = SizeThresholds{});

/// Loads the species CSV (header: name,weight_min_g,weight_max_g,strikes,
/// class,merged_into,excluded). Every row's class column is cross-checked
/// against size_class_of; a mismatch raises ValidationError naming the row.
std::vector<SpeciesRecord> load_species_table(const std::string& path,
                                              const SizeThresholds& t = SizeThresholds{});

}  // namespace aviary
