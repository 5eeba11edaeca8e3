#pragma once

#include "synth/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace synth {

/// Categorical labels stored as codes into a sorted class list.
struct Labels {
  std::vector<std::string> classes;
  std::vector<int> codes;

  Index size() const { return static_cast<Index>(codes.size()); }
  /// n x classes.size() indicator matrix.
  Matrix one_hot() const;
  static Labels from_strings(const std::vector<std::string>& raw);
};

/// One modality: a numeric sample x feature table, optionally with a
/// categorical label that is fitted as a block of one-hot columns.
struct Dataset {
  std::string name;
  Matrix values;
  std::vector<std::string> feature_names;
  std::optional<Labels> label;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }

  /// Throws DataError/ShapeError when an invariant is broken: non-finite
  /// values, name count mismatch, duplicate names, label length mismatch.
  void validate() const;

  /// values with the one-hot label block appended (if any).
  Matrix design_matrix() const;
  /// feature_names followed by "<label>=<class>" indicator names.
  std::vector<std::string> design_names() const;

  Dataset select_rows(const std::vector<Index>& rows) const;
  Index column_index(const std::string& feature) const;
};

/// Name of the indicator column for one class.
std::string one_hot_name(const std::string& cls);

}  // namespace synth
