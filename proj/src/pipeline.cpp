#include "synth/pipeline.hpp"

#include "synth/evaluation.hpp"
#include "synth/generator.hpp"
#include "synth/io.hpp"
#include "synth/rng.hpp"
#include "synth/types.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace synth {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct HelpRequested {
  std::string text;
};

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json report_to_json(const EvalReport& r) {
  return json{{"metric", r.metric_name},
              {"real_scores", r.real_scores},
              {"synthetic_scores", r.synthetic_scores},
              {"t", finite_or_null(r.test.t)},
              {"df", finite_or_null(r.test.df)},
              {"p", r.test.p},
              {"log10_p", finite_or_null(r.test.log10_p)},
              {"direction", r.direction}};
}

SynthesisConfig synthesis_config(const RunConfig& c) {
  SynthesisConfig s;
  s.fit.k_s = c.k_s;
  s.fit.k_f = c.k_f;
  s.fit.max_sweeps = c.sweeps;
  s.fit.rel_tol = c.rel_tol;
  s.fit.ridge = c.ridge;
  s.fit.standardize = c.standardize;
  s.sampler = parse_sampler_kind(c.sampler.empty() ? "gmm" : c.sampler);
  s.gmm.components = c.components;
  s.gmm.max_iters = c.gmm_iters;
  s.gmm.tol = c.gmm_tol;
  s.gmm.reg = c.cov_reg;
  s.geometry.centroids = c.centroids;
  s.geometry.neighbors = c.neighbors;
  s.geometry.reg = c.cov_reg;
  return s;
}

std::string pick_modality(const RunConfig& c, const EncodingModel& model) {
  if (c.modality) {
    (void)model.modality(*c.modality);
    return *c.modality;
  }
  return model.modalities.front().name;
}

std::vector<std::string> read_comments(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      out.push_back(line.substr(2));
    } else if (!line.empty() && line.front() != '#') {
      break;
    }
  }
  return out;
}

bool header_has(const fs::path& path, const std::string& column) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      if (cell == column) return true;
    }
    return false;
  }
  return false;
}

Dataset load_with_optional_label(const fs::path& path) {
  return load_csv(path, header_has(path, "label") ? std::optional<std::string>("label") : std::nullopt);
}

Matrix select_columns(const Dataset& ds, const std::vector<std::string>& names) {
  Matrix out(ds.rows(), static_cast<Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) out.col(static_cast<Index>(j)) = ds.values.col(ds.column_index(names[j]));
  return out;
}

void run_fit(const RunConfig& c, std::ostream& log) {
  std::vector<Dataset> data;
  for (std::size_t i = 0; i < c.data.size(); ++i) {
    data.push_back(load_csv(c.data[i], i == 0 ? c.label_column : std::nullopt));
  }
  const SynthesisConfig s = synthesis_config(c);
  FitConfig fit = s.fit;
  fit.seed = derive_seed(c.seed, "fit");

  ModelDocument doc;
  doc.model = fit_encoding(data, fit);
  const std::string modality = pick_modality(c, doc.model);
  const Matrix latent = doc.model.modality(modality).alpha.transpose();
  doc.sampler = fit_sampler(latent, s, derive_seed(c.seed, "sampler"));
  doc.run_config = c.to_json();
  save_model(c.out, doc);
  log << "fit: " << doc.model.modalities.size() << " modalities, " << doc.model.sweeps << " sweeps, loss "
      << format_double(doc.model.loss_trace.back()) << (doc.model.converged ? " (converged)" : "") << ", sampler "
      << sampler_kind(*doc.sampler) << " -> " << c.out << " [" << doc.content_hash << "]\n";
}

void run_sample(const RunConfig& c, std::ostream& log) {
  const ModelDocument doc = load_model(c.model);
  const EncodingModel& model = doc.model;
  const std::string modality = pick_modality(c, model);
  const ModalityFit& fit = model.modality(modality);

  LatentSampler sampler;
  const bool stored_matches = doc.sampler && (c.sampler.empty() || c.sampler == sampler_kind(*doc.sampler));
  if (stored_matches) {
    sampler = *doc.sampler;
  } else {
    sampler = fit_sampler(fit.alpha.transpose(), synthesis_config(c), derive_seed(c.seed, "sampler"));
  }
  const std::uint64_t draw_seed = derive_seed(c.seed, "sample");
  const Matrix latent = sample_latent(sampler, c.count, draw_seed);
  SyntheticBatch batch = make_batch(latent, model, Provenance{sampler_kind(sampler), c.seed, doc.content_hash});
  if (c.clamp) {
    for (const auto& m : model.modalities) clamp_columns(batch.decoded.at(m.name), m.observed_min, m.observed_max);
  }
  if (fit.label) batch = assign_labels(std::move(batch), model, modality);

  const Index numeric = fit.label ? fit.label->offset : fit.n_features();
  const std::vector<std::string> names(fit.feature_names.begin(), fit.feature_names.begin() + numeric);
  const std::vector<std::string> comments{
      "provenance: " + batch.provenance.sampler + "," + std::to_string(c.seed) + "," + doc.content_hash,
      "config: " + c.to_json().dump()};
  write_csv(c.out, names, batch.decoded.at(modality).leftCols(numeric), batch.labels, comments);
  log << "sample: " << c.count << " rows from " << batch.provenance.sampler << " -> " << c.out << '\n';
}

void run_balance(const RunConfig& c, std::ostream& log) {
  const Dataset ds = load_csv(c.input, std::string("label"));
  const std::vector<Index> keep = balance_indices(ds.label->codes, ds.label->classes, c.per_class, derive_seed(c.seed, "balance"));
  const Dataset out = ds.select_rows(keep);
  std::vector<std::string> comments = read_comments(c.input);
  comments.push_back("balance: per_class=" + std::to_string(c.per_class) + ",seed=" + std::to_string(c.seed));
  write_csv(c.out, out.feature_names, out.values, out.label, comments);
  log << "balance: " << keep.size() << " rows -> " << c.out << '\n';
}

void run_eval(const RunConfig& c, std::ostream& log) {
  const Dataset real = load_csv(c.data.front(), c.label_column);
  const SynthesisConfig s = synthesis_config(c);
  CompareConfig cc;
  cc.repeats = c.repeats;
  cc.split_fraction = c.split;
  cc.synthetic_multiplier = c.multiplier;
  cc.folds = c.folds;
  cc.lambda_grid = c.lambda_grid;
  cc.identity_synthesis = c.identity;
  cc.seed = derive_seed(c.seed, "eval");

  SplitSink sink;
  if (!c.export_splits.empty()) {
    fs::create_directories(c.export_splits);
    sink = [&](int r, const Dataset& train, const Dataset& test, const Dataset& synthetic) {
      char stem[32];
      std::snprintf(stem, sizeof(stem), "repeat_%03d", r);
      const fs::path dir(c.export_splits);
      const std::vector<std::string> comments{"config: " + c.to_json().dump()};
      write_csv(dir / (std::string(stem) + "_train.csv"), train.feature_names, train.values, train.label, comments);
      write_csv(dir / (std::string(stem) + "_test.csv"), test.feature_names, test.values, test.label, comments);
      write_csv(dir / (std::string(stem) + "_synthetic.csv"), synthetic.feature_names, synthetic.values,
                synthetic.label, comments);
    };
  }
  const ComparisonReport report = compare_real_vs_synthetic(real, c.target, s, cc, sink);
  const json doc{{"command", "eval"},
                 {"seed", c.seed},
                 {"config", c.to_json()},
                 {"metrics", {{"mad", report_to_json(report.mad)}, {"pearson", report_to_json(report.pearson)}}},
                 {"notes",
                  {{"regressor", "cross-validated ridge linear model"},
                   {"test", "two-sided Welch t-test across repeats"}}}};
  write_text_file(c.out, doc.dump(1) + "\n");
  log << "eval: MAD t = " << format_double(report.mad.test.t) << ", p = " << format_double(report.mad.test.p)
      << ", better: " << report.mad.direction << " -> " << c.out << '\n';
}

void run_difftest(const RunConfig& c, std::ostream& log) {
  const Dataset ra = load_with_optional_label(c.real[0]);
  const Dataset rb = load_with_optional_label(c.real[1]);
  const Dataset sa = load_with_optional_label(c.synthetic[0]);
  const Dataset sb = load_with_optional_label(c.synthetic[1]);
  const std::vector<std::string>& names = ra.feature_names;
  const DiffTestResult real = diff_feature_test(select_columns(ra, names), select_columns(rb, names), "group_a", "group_b");
  const DiffTestResult synth = diff_feature_test(select_columns(sa, names), select_columns(sb, names), "group_a", "group_b");
  const double similarity = difftest_similarity(real, synth);
  json excluded = json::array();
  json real_stats = json::array();
  json synth_stats = json::array();
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto jj = static_cast<Index>(j);
    real_stats.push_back(finite_or_null(real.statistics(jj)));
    synth_stats.push_back(finite_or_null(synth.statistics(jj)));
    if (!std::isfinite(real.statistics(jj)) || !std::isfinite(synth.statistics(jj))) excluded.push_back(names[j]);
  }
  const json doc{{"command", "difftest"},
                 {"seed", c.seed},
                 {"config", c.to_json()},
                 {"statistic", "welch_t"},
                 {"features", names},
                 {"real", real_stats},
                 {"synthetic", synth_stats},
                 {"excluded_features", excluded},
                 {"similarity", similarity}};
  write_text_file(c.out, doc.dump(1) + "\n");
  log << "difftest: similarity " << similarity << " over " << names.size() - excluded.size() << " features -> " << c.out << '\n';
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("command_line", message);
}

}  // namespace

const char* to_string(Command command) {
  switch (command) {
    case Command::fit: return "fit";
    case Command::sample: return "sample";
    case Command::balance: return "balance";
    case Command::eval: return "eval";
    case Command::difftest: return "difftest";
  }
  return "?";
}

void RunConfig::validate() const {
  require(k_s >= 1 && k_f >= 1, "--k-s and --k-f must be positive");
  require(sweeps >= 1, "--sweeps must be positive");
  require(rel_tol > 0.0, "--rel-tol must be positive");
  require(ridge >= 0.0 && std::isfinite(ridge), "--ridge must be non-negative");
  require(sampler.empty() || sampler == "gmm" || sampler == "geometry", "--sampler must be gmm or geometry");
  require(components >= 1, "--components must be positive");
  require(gmm_iters >= 1, "--gmm-iters must be positive");
  require(gmm_tol > 0.0, "--gmm-tol must be positive");
  require(centroids >= 0, "--centroids must be non-negative (0 = default)");
  require(neighbors == 0 || neighbors >= 2, "--neighbors must be at least 2 (0 = default)");
  require(cov_reg >= 0.0, "--cov-reg must be non-negative");
  require(!out.empty(), "--out is required");
  switch (command) {
    case Command::fit:
      require(!data.empty(), "fit needs --data");
      break;
    case Command::sample:
      require(!model.empty(), "sample needs --model");
      require(count >= 1, "--count must be positive");
      break;
    case Command::balance:
      require(!input.empty(), "balance needs --in");
      require(per_class >= 1, "--per-class must be positive");
      break;
    case Command::eval:
      require(data.size() == 1, "eval needs exactly one --data file");
      require(!target.empty(), "eval needs --target");
      require(repeats >= 2, "--repeats must be at least 2");
      require(split > 0.0 && split < 1.0, "--split must lie in (0, 1)");
      require(multiplier > 0.0, "--multiplier must be positive");
      require(folds >= 2, "--folds must be at least 2");
      for (double l : lambda_grid) require(l >= 0.0 && std::isfinite(l), "--lambda-grid values must be non-negative");
      break;
    case Command::difftest:
      require(real.size() == 2 && synthetic.size() == 2, "difftest needs two --real and two --synthetic files");
      break;
  }
}

json RunConfig::to_json() const {
  json j{{"command", to_string(command)}, {"seed", seed}, {"out", out}};
  switch (command) {
    case Command::fit:
    case Command::eval:
      j["data"] = data;
      j["k_s"] = k_s;
      j["k_f"] = k_f;
      j["sweeps"] = sweeps;
      j["rel_tol"] = rel_tol;
      j["ridge"] = ridge;
      j["standardize"] = standardize;
      j["sampler"] = sampler.empty() ? "gmm" : sampler;
      j["components"] = components;
      j["gmm_iters"] = gmm_iters;
      j["gmm_tol"] = gmm_tol;
      j["centroids"] = centroids;
      j["neighbors"] = neighbors;
      j["cov_reg"] = cov_reg;
      j["label_column"] = label_column ? json(*label_column) : json(nullptr);
      if (command == Command::eval) {
        j["target"] = target;
        j["repeats"] = repeats;
        j["split"] = split;
        j["multiplier"] = multiplier;
        j["folds"] = folds;
        j["lambda_grid"] = lambda_grid;
        j["identity"] = identity;
        j["export_splits"] = export_splits;
      }
      break;
    case Command::sample:
      j["model"] = model;
      j["count"] = count;
      j["sampler"] = sampler.empty() ? json(nullptr) : json(sampler);
      j["clamp"] = clamp;
      j["modality"] = modality ? json(*modality) : json(nullptr);
      break;
    case Command::balance:
      j["in"] = input;
      j["per_class"] = per_class;
      break;
    case Command::difftest:
      j["real"] = real;
      j["synthetic"] = synthetic;
      break;
  }
  return j;
}

RunConfig parse_command_line(const std::vector<std::string>& args) {
  RunConfig c;
  if (const char* env = std::getenv("SYNTH_SEED")) {
    try {
      c.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError("command_line", "SYNTH_SEED is not an unsigned integer");
    }
  }

  CLI::App app{"Shared-code linear encoding: fit, synthesize, balance and evaluate tabular data", "synth"};
  app.require_subcommand(1);
  std::string label_column, modality;

  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", c.seed, "Root seed (default: $SYNTH_SEED or 0)"); };
  auto add_fit = [&](CLI::App* sub) {
    sub->add_option("--k-s", c.k_s, "Latent sample dimension");
    sub->add_option("--k-f", c.k_f, "Latent feature dimension");
    sub->add_option("--sweeps", c.sweeps, "Maximum coordinate-descent sweeps");
    sub->add_option("--rel-tol", c.rel_tol, "Relative loss change that stops the fit");
    sub->add_option("--ridge", c.ridge, "Relative ridge added to every solve");
    sub->add_flag("!--no-standardize", c.standardize, "Center only; skip column scaling");
  };
  auto add_sampler = [&](CLI::App* sub) {
    sub->add_option("--sampler", c.sampler, "Latent sampler: gmm or geometry");
    sub->add_option("--components", c.components, "GMM components");
    sub->add_option("--gmm-iters", c.gmm_iters, "Maximum EM iterations");
    sub->add_option("--gmm-tol", c.gmm_tol, "Relative log-likelihood change that stops EM");
    sub->add_option("--centroids", c.centroids, "Geometry sampler centroids (0 = min(n, max(50, n/2)))");
    sub->add_option("--neighbors", c.neighbors, "Geometry sampler K (0 = min(10, n))");
    sub->add_option("--cov-reg", c.cov_reg, "Relative covariance regularization floor");
  };

  auto* fit = app.add_subcommand("fit", "Fit the encoding and a latent sampler; write a model JSON");
  fit->add_option("--data", c.data, "Input CSV, one per modality")->required()->delimiter(',');
  fit->add_option("--label-column", label_column, "Categorical column of the first modality");
  fit->add_option("--modality", modality, "Modality whose latent rows train the sampler");
  fit->add_option("--out", c.out, "Model JSON")->required();
  add_fit(fit);
  add_sampler(fit);
  add_seed(fit);

  auto* sample = app.add_subcommand("sample", "Draw synthetic rows from a fitted model");
  sample->add_option("--model", c.model, "Model JSON")->required();
  sample->add_option("--count", c.count, "Number of synthetic rows");
  sample->add_option("--modality", modality, "Modality to write (default: first)");
  sample->add_flag("--clamp", c.clamp, "Clamp decoded values to the training range");
  sample->add_option("--out", c.out, "Output CSV")->required();
  add_sampler(sample);
  add_seed(sample);

  auto* balance = app.add_subcommand("balance", "Pick an equal number of rows per class from a labelled CSV");
  balance->add_option("--in", c.input, "Labelled CSV (e.g. from sample)")->required();
  balance->add_option("--per-class", c.per_class, "Rows per class")->required();
  balance->add_option("--out", c.out, "Output CSV")->required();
  add_seed(balance);

  auto* eval = app.add_subcommand("eval", "Compare regression trained on real vs synthetic rows");
  eval->add_option("--data", c.data, "Input CSV")->required();
  eval->add_option("--target", c.target, "Numeric target column")->required();
  eval->add_option("--label-column", label_column, "Categorical column used to stratify splits");
  eval->add_option("--repeats", c.repeats, "Number of train/test repeats");
  eval->add_option("--split", c.split, "Training fraction");
  eval->add_option("--multiplier", c.multiplier, "Synthetic rows per real training row");
  eval->add_option("--folds", c.folds, "Cross-validation folds for lambda");
  eval->add_option("--lambda-grid", c.lambda_grid, "Ridge lambdas (standardized design)")->delimiter(',');
  eval->add_flag("--identity", c.identity, "Null control: use the real training rows as the synthetic set");
  eval->add_option("--export-splits", c.export_splits, "Directory for per-repeat train/test/synthetic CSVs");
  eval->add_option("--out", c.out, "Report JSON")->required();
  add_fit(eval);
  add_sampler(eval);
  add_seed(eval);

  auto* difftest = app.add_subcommand("difftest", "Correlate per-feature Welch statistics of real and synthetic groups");
  difftest->add_option("--real", c.real, "Real group CSVs a,b")->required()->delimiter(',');
  difftest->add_option("--synthetic", c.synthetic, "Synthetic group CSVs a,b")->required()->delimiter(',');
  difftest->add_option("--out", c.out, "Report JSON")->required();
  add_seed(difftest);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw ConfigError("command_line", e.what());
  }

  if (fit->parsed()) c.command = Command::fit;
  else if (sample->parsed()) c.command = Command::sample;
  else if (balance->parsed()) c.command = Command::balance;
  else if (eval->parsed()) c.command = Command::eval;
  else c.command = Command::difftest;
  if (!label_column.empty()) c.label_column = label_column;
  if (!modality.empty()) c.modality = modality;
  c.validate();
  return c;
}

int run_pipeline(const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    config.validate();
    switch (config.command) {
      case Command::fit: run_fit(config, log); break;
      case Command::sample: run_sample(config, log); break;
      case Command::balance: run_balance(config, log); break;
      case Command::eval: run_eval(config, log); break;
      case Command::difftest: run_difftest(config, log); break;
    }
    return 0;
  } catch (const Error& e) {
    err << json{{"error", {{"command", to_string(config.command)}, {"operation", e.operation()}, {"message", e.what()}}}}.dump()
        << '\n';
  } catch (const std::exception& e) {
    err << json{{"error", {{"command", to_string(config.command)}, {"operation", "unknown"}, {"message", e.what()}}}}.dump()
        << '\n';
  }
  return 1;
}

int run_cli(const std::vector<std::string>& args, std::ostream& log, std::ostream& err) {
  RunConfig config;
  try {
    config = parse_command_line(args);
  } catch (const HelpRequested& h) {
    log << h.text;
    return 0;
  } catch (const Error& e) {
    err << json{{"error", {{"command", nullptr}, {"operation", e.operation()}, {"message", e.what()}}}}.dump() << '\n';
    return 2;
  }
  return run_pipeline(config, log, err);
}

}  // namespace synth
