#include "synth/evaluation.hpp"

#include "synth/kernels.hpp"
#include "synth/regression.hpp"
#include "synth/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace synth {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<Index> all_except(Index count, Index skip) {
  std::vector<Index> cols;
  for (Index j = 0; j < count; ++j) {
    if (j != skip) cols.push_back(j);
  }
  return cols;
}

}  // namespace

EvalReport make_report(std::string metric, std::vector<double> real, std::vector<double> synthetic,
                       bool lower_is_better) {
  if (real.size() != synthetic.size() || real.size() < 2) {
    throw ConfigError("eval_report", "score vectors must have equal length of at least 2");
  }
  EvalReport r;
  r.metric_name = std::move(metric);
  r.test = welch_t_test(real, synthetic);
  const double mr = mean_of(real);
  const double ms = mean_of(synthetic);
  if (mr == ms) {
    r.direction = "tie";
  } else {
    r.direction = ((ms < mr) == lower_is_better) ? "synthetic" : "real";
  }
  r.real_scores = std::move(real);
  r.synthetic_scores = std::move(synthetic);
  return r;
}

std::pair<std::vector<Index>, std::vector<Index>> train_test_split(const Dataset& data, double train_fraction,
                                                                   std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_test_split", "split fraction must lie in (0, 1)");
  }
  std::vector<std::vector<Index>> strata;
  if (data.label) {
    strata.resize(data.label->classes.size());
    for (Index i = 0; i < data.rows(); ++i) strata[static_cast<std::size_t>(data.label->codes[static_cast<std::size_t>(i)])].push_back(i);
  } else {
    strata.emplace_back(static_cast<std::size_t>(data.rows()));
    std::iota(strata.front().begin(), strata.front().end(), Index{0});
  }
  Rng rng(seed);
  std::vector<Index> train, test;
  for (auto& rows : strata) {
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows.size())));
    train.insert(train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.insert(test.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  }
  if (train.size() < 2 || test.size() < 2) {
    throw DataError("train_test_split", "split leaves fewer than 2 rows on one side");
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

ComparisonReport compare_real_vs_synthetic(const Dataset& real, const std::string& target_column,
                                           const SynthesisConfig& synth, const CompareConfig& config,
                                           const SplitSink& sink) {
  if (config.repeats < 2) throw ConfigError("compare_real_vs_synthetic", "repeats must be at least 2");
  if (!(config.synthetic_multiplier > 0.0)) {
    throw ConfigError("compare_real_vs_synthetic", "synthetic multiplier must be positive");
  }
  real.validate();
  const Index target = real.column_index(target_column);
  if (real.cols() < 2) throw ConfigError("compare_real_vs_synthetic", "need at least one feature besides the target");
  const std::vector<Index> features = all_except(real.cols(), target);
  const std::vector<double> grid = config.lambda_grid.empty() ? default_lambda_grid() : config.lambda_grid;

  std::vector<double> mad_real, mad_synth, cor_real, cor_synth;
  for (int r = 0; r < config.repeats; ++r) {
    const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
    const auto [train_rows, test_rows] = train_test_split(real, config.split_fraction, derive_seed(seed, "split"));
    const Dataset train = real.select_rows(train_rows);
    const Dataset test = real.select_rows(test_rows);

    Dataset synthetic;
    if (config.identity_synthesis) {
      synthetic = train;
    } else {
      const auto count = static_cast<Index>(std::llround(config.synthetic_multiplier * static_cast<double>(train.rows())));
      synthetic = synthesize_dataset(train, synth, count, derive_seed(seed, "synthesize"));
    }

    const std::uint64_t reg_seed = derive_seed(seed, "regressor");
    const Matrix x_test = test.values(Eigen::all, features);
    const Vector y_test = test.values.col(target);
    auto score = [&](const Dataset& fit_on, std::vector<double>& mads, std::vector<double>& cors) {
      const LinearRegressor reg = fit_linear_regressor(fit_on.values(Eigen::all, features), fit_on.values.col(target),
                                                       grid, config.folds, reg_seed);
      const Vector pred = reg.predict(x_test);
      mads.push_back(mad(as_span(pred), as_span(y_test)));
      cors.push_back(pearson(as_span(pred), as_span(y_test)));
    };
    score(train, mad_real, cor_real);
    score(synthetic, mad_synth, cor_synth);
    if (sink) sink(r, train, test, synthetic);
  }
  return ComparisonReport{make_report("mad", mad_real, mad_synth, true),
                          make_report("pearson", cor_real, cor_synth, false)};
}

DiffTestResult diff_feature_test(const Matrix& group_a, const Matrix& group_b, std::string name_a,
                                 std::string name_b) {
  return DiffTestResult{kernels::columnwise_welch_t(group_a, group_b), std::move(name_a), std::move(name_b)};
}

double difftest_similarity(const DiffTestResult& real, const DiffTestResult& synthetic) {
  if (real.statistics.size() != synthetic.statistics.size()) {
    throw ShapeError("difftest_similarity", "statistic vectors have different feature counts");
  }
  if (real.group_a != synthetic.group_a || real.group_b != synthetic.group_b) {
    throw ConfigError("difftest_similarity", "results compare different group pairs");
  }
  std::vector<double> x, y;
  for (Index j = 0; j < real.statistics.size(); ++j) {
    if (std::isfinite(real.statistics(j)) && std::isfinite(synthetic.statistics(j))) {
      x.push_back(real.statistics(j));
      y.push_back(synthetic.statistics(j));
    }
  }
  if (x.size() < 2) throw DataError("difftest_similarity", "fewer than 2 comparable features");
  return pearson(x, y);
}

}  // namespace synth
