#pragma once

#include "synth/dataset.hpp"
#include "synth/generator.hpp"
#include "synth/stats.hpp"
#include "synth/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace synth {

struct EvalReport {
  std::string metric_name;  // "mad" or "pearson"
  std::vector<double> real_scores;
  std::vector<double> synthetic_scores;
  TTestResult test;
  std::string direction;  // "synthetic", "real" or "tie": which pipeline scored better
};

/// Builds a report from paired score vectors; `lower_is_better` for MAD.
EvalReport make_report(std::string metric, std::vector<double> real,
                       std::vector<double> synthetic, bool lower_is_better);

struct CompareConfig {
  int repeats = 20;
  double split_fraction = 0.7;
  double synthetic_multiplier = 10.0;
  int folds = 5;
  std::vector<double> lambda_grid;  // empty: default_lambda_grid()
  bool identity_synthesis = false;  // null control: synthetic = real train
  std::uint64_t seed = 0;
};

struct ComparisonReport {
  EvalReport mad;
  EvalReport pearson;
};

/// Called once per repeat with the split and the synthetic training table.
using SplitSink = std::function<void(int repeat, const Dataset& train, const Dataset& test,
                                     const Dataset& synthetic)>;

/// Train/test row split, stratified by label when present.
std::pair<std::vector<Index>, std::vector<Index>> train_test_split(const Dataset& data,
                                                                   double train_fraction,
                                                                   std::uint64_t seed);

ComparisonReport compare_real_vs_synthetic(const Dataset& real, const std::string& target_column,
                                           const SynthesisConfig& synth,
                                           const CompareConfig& config,
                                           const SplitSink& sink = {});

struct DiffTestResult {
  Vector statistics;  // Welch t per feature, NaN when both groups are constant
  std::string group_a;
  std::string group_b;
};

DiffTestResult diff_feature_test(const Matrix& group_a, const Matrix& group_b,
                                 std::string name_a = "a", std::string name_b = "b");

/// Pearson correlation of the two statistic vectors over features finite in both.
double difftest_similarity(const DiffTestResult& real, const DiffTestResult& synthetic);

}  // namespace synth
