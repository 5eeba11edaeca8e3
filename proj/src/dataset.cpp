#include "synth/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace synth {

std::string one_hot_name(const std::string& cls) { return "label=" + cls; }

Matrix Labels::one_hot() const {
  Matrix m = Matrix::Zero(size(), static_cast<Index>(classes.size()));
  for (Index i = 0; i < size(); ++i) m(i, codes[static_cast<std::size_t>(i)]) = 1.0;
  return m;
}

Labels Labels::from_strings(const std::vector<std::string>& raw) {
  Labels out;
  std::set<std::string> unique(raw.begin(), raw.end());
  out.classes.assign(unique.begin(), unique.end());
  out.codes.reserve(raw.size());
  for (const auto& r : raw) {
    auto it = std::lower_bound(out.classes.begin(), out.classes.end(), r);
    out.codes.push_back(static_cast<int>(it - out.classes.begin()));
  }
  return out;
}

void Dataset::validate() const {
  if (static_cast<Index>(feature_names.size()) != values.cols()) {
    throw ShapeError("dataset", name + ": " + std::to_string(feature_names.size()) +
                                    " feature names for " + std::to_string(values.cols()) + " columns");
  }
  std::set<std::string> seen;
  for (const auto& f : feature_names) {
    if (!seen.insert(f).second) throw DataError("dataset", name + ": duplicate feature name '" + f + "'");
  }
  for (Index j = 0; j < values.cols(); ++j) {
    for (Index i = 0; i < values.rows(); ++i) {
      if (!std::isfinite(values(i, j))) {
        throw DataError("dataset", name + ": non-finite value at row " + std::to_string(i) +
                                       ", column " + feature_names[static_cast<std::size_t>(j)]);
      }
    }
  }
  if (label) {
    if (label->size() != values.rows()) {
      throw ShapeError("dataset", name + ": label length " + std::to_string(label->size()) +
                                      " does not match " + std::to_string(values.rows()) + " rows");
    }
    for (int c : label->codes) {
      if (c < 0 || c >= static_cast<int>(label->classes.size())) {
        throw DataError("dataset", name + ": label code out of range");
      }
    }
  }
}

Matrix Dataset::design_matrix() const {
  if (!label) return values;
  Matrix out(values.rows(), values.cols() + static_cast<Index>(label->classes.size()));
  out << values, label->one_hot();
  return out;
}

std::vector<std::string> Dataset::design_names() const {
  std::vector<std::string> names = feature_names;
  if (label) {
    for (const auto& c : label->classes) names.push_back(one_hot_name(c));
  }
  return names;
}

Dataset Dataset::select_rows(const std::vector<Index>& rows) const {
  Dataset out;
  out.name = name;
  out.feature_names = feature_names;
  out.values.resize(static_cast<Index>(rows.size()), values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.values.row(static_cast<Index>(i)) = values.row(rows[i]);
  if (label) {
    Labels l;
    l.classes = label->classes;
    for (Index r : rows) l.codes.push_back(label->codes[static_cast<std::size_t>(r)]);
    out.label = std::move(l);
  }
  return out;
}

Index Dataset::column_index(const std::string& feature) const {
  auto it = std::find(feature_names.begin(), feature_names.end(), feature);
  if (it == feature_names.end()) throw ShapeError("dataset", name + ": no column named '" + feature + "'");
  return static_cast<Index>(it - feature_names.begin());
}

}  // namespace synth
