#include "synth/io.hpp"

#include "synth/rng.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace synth {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool is_comment_or_blank(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t.front() == '#';
}

std::vector<double> to_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector vector_from_json(const json& j, const std::string& field) {
  const auto values = j.get<std::vector<double>>();
  Vector v(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Index>(i)) = values[i];
  (void)field;
  return v;
}

json sampler_to_json(const LatentSampler& sampler) {
  if (const auto* g = std::get_if<GmmModel>(&sampler)) {
    Matrix means(g->components(), g->dim());
    json covs = json::array();
    for (Index k = 0; k < g->components(); ++k) {
      means.row(k) = g->means[static_cast<std::size_t>(k)].transpose();
      covs.push_back(matrix_to_json(g->covariances[static_cast<std::size_t>(k)]));
    }
    return json{{"kind", "gmm"},
                {"weights", to_vector(g->weights)},
                {"means", matrix_to_json(means)},
                {"covariances", covs},
                {"cov_floor", g->cov_floor},
                {"log_likelihood_trace", g->log_likelihood_trace},
                {"reseeds", g->reseeds}};
  }
  const auto& s = std::get<GeometrySampler>(sampler);
  Matrix means(s.size(), s.dim());
  json covs = json::array();
  for (Index k = 0; k < s.size(); ++k) {
    means.row(k) = s.local_means[static_cast<std::size_t>(k)].transpose();
    covs.push_back(matrix_to_json(s.local_covariances[static_cast<std::size_t>(k)]));
  }
  std::vector<std::int64_t> rows(s.centroid_rows.begin(), s.centroid_rows.end());
  return json{{"kind", "geometry"},
              {"neighbors", s.neighbors},
              {"reg", s.reg},
              {"centroid_rows", rows},
              {"centroids", matrix_to_json(s.centroids)},
              {"local_means", matrix_to_json(means)},
              {"local_covariances", covs}};
}

LatentSampler sampler_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "gmm") {
    GmmModel g;
    g.weights = vector_from_json(j.at("weights"), "weights");
    const Matrix means = matrix_from_json(j.at("means"), "sampler.means");
    if (means.rows() != g.weights.size()) throw ParseError("load_model", "gmm means/weights disagree");
    for (Index k = 0; k < means.rows(); ++k) g.means.push_back(means.row(k).transpose());
    for (const auto& c : j.at("covariances")) g.covariances.push_back(matrix_from_json(c, "sampler.covariances"));
    if (static_cast<Index>(g.covariances.size()) != g.weights.size()) throw ParseError("load_model", "gmm covariances/weights disagree");
    g.cov_floor = j.at("cov_floor").get<double>();
    g.log_likelihood_trace = j.at("log_likelihood_trace").get<std::vector<double>>();
    g.reseeds = j.at("reseeds").get<int>();
    return g;
  }
  if (kind == "geometry") {
    GeometrySampler s;
    s.neighbors = j.at("neighbors").get<Index>();
    s.reg = j.at("reg").get<double>();
    for (auto r : j.at("centroid_rows").get<std::vector<std::int64_t>>()) s.centroid_rows.push_back(static_cast<Index>(r));
    s.centroids = matrix_from_json(j.at("centroids"), "sampler.centroids");
    const Matrix means = matrix_from_json(j.at("local_means"), "sampler.local_means");
    for (Index k = 0; k < means.rows(); ++k) s.local_means.push_back(means.row(k).transpose());
    for (const auto& c : j.at("local_covariances")) s.local_covariances.push_back(matrix_from_json(c, "sampler.local_covariances"));
    if (s.local_covariances.size() != s.local_means.size()) throw ParseError("load_model", "geometry means/covariances disagree");
    return s;
  }
  throw ParseError("load_model", "unknown sampler kind '" + kind + "'");
}

}  // namespace

Dataset parse_csv(std::istream& in, const std::string& source, const std::optional<std::string>& label_column) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    header = split_fields(line);
    break;
  }
  if (header.empty()) throw ParseError("load_csv", source + ": missing header row");
  std::set<std::string> seen;
  for (const auto& h : header) {
    if (h.empty()) throw ParseError("load_csv", source + ": empty column name in header");
    if (!seen.insert(h).second) throw ParseError("load_csv", source + ": duplicate header '" + h + "'");
  }
  std::ptrdiff_t label_pos = -1;
  if (label_column) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (header[j] == *label_column) label_pos = static_cast<std::ptrdiff_t>(j);
    }
    if (label_pos < 0) throw ParseError("load_csv", source + ": label column '" + *label_column + "' not found");
  }

  Dataset ds;
  ds.name = std::filesystem::path(source).stem().string();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (static_cast<std::ptrdiff_t>(j) != label_pos) ds.feature_names.push_back(header[j]);
  }
  std::vector<double> cells;
  std::vector<std::string> raw_labels;
  Index rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError("load_csv", source + ": row " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                       " fields, header has " + std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (static_cast<std::ptrdiff_t>(j) == label_pos) {
        raw_labels.push_back(fields[j]);
        continue;
      }
      const std::string& f = fields[j];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      const std::string where = source + ": row " + std::to_string(line_no) + ", column " + header[j];
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
        throw ParseError("load_csv", where + ": cannot parse '" + f + "' as a number");
      }
      if (!std::isfinite(v)) throw ParseError("load_csv", where + ": non-finite value '" + f + "'");
      cells.push_back(v);
    }
    ++rows;
  }
  const auto cols = static_cast<Index>(ds.feature_names.size());
  ds.values.resize(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) ds.values(i, j) = cells[static_cast<std::size_t>(i * cols + j)];
  if (label_pos >= 0) ds.label = Labels::from_strings(raw_labels);
  ds.validate();
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_csv", "cannot open '" + path.string() + "'");
  return parse_csv(in, path.string(), label_column);
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const std::vector<std::string>& names, const Matrix& values,
               const std::optional<Labels>& labels, const std::vector<std::string>& comments) {
  if (static_cast<Index>(names.size()) != values.cols()) throw ShapeError("write_csv", "name count does not match columns");
  if (labels && labels->size() != values.rows()) throw ShapeError("write_csv", "label count does not match rows");
  for (const auto& c : comments) out << "# " << c << '\n';
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  if (labels) out << (names.empty() ? "" : ",") << "label";
  out << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << format_double(values(i, j));
    if (labels) {
      out << (values.cols() ? "," : "") << labels->classes[static_cast<std::size_t>(labels->codes[static_cast<std::size_t>(i)])];
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& names, const Matrix& values,
               const std::optional<Labels>& labels, const std::vector<std::string>& comments) {
  std::ostringstream buf;
  write_csv(buf, names, values, labels, comments);
  write_text_file(path, buf.str());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("write", "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw ParseError("write", "failed writing '" + path.string() + "'");
}

json matrix_to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const json& j, const std::string& field) {
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols) {
    throw ParseError("load_model", field + ": data length does not match rows x cols");
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index c = 0; c < cols; ++c) m(i, c) = data[static_cast<std::size_t>(i * cols + c)];
  return m;
}

json model_to_json(const ModelDocument& doc) {
  const EncodingModel& m = doc.model;
  json modalities = json::array();
  for (const auto& f : m.modalities) {
    json label = nullptr;
    if (f.label) label = json{{"classes", f.label->classes}, {"offset", f.label->offset}};
    modalities.push_back(json{{"name", f.name},
                              {"feature_names", f.feature_names},
                              {"alpha", matrix_to_json(f.alpha)},
                              {"beta", matrix_to_json(f.beta)},
                              {"intercept", to_vector(f.intercept)},
                              {"column_scale", to_vector(f.column_scale)},
                              {"observed_min", to_vector(f.observed_min)},
                              {"observed_max", to_vector(f.observed_max)},
                              {"loss_trace", f.loss_trace},
                              {"final_loss", f.final_loss},
                              {"label", label}});
  }
  const FitConfig& c = m.config;
  return json{{"format", kModelFormatName},
              {"format_version", kModelFormatVersion},
              {"config",
               {{"k_s", c.k_s},
                {"k_f", c.k_f},
                {"max_sweeps", c.max_sweeps},
                {"rel_tol", c.rel_tol},
                {"ridge", c.ridge},
                {"standardize", c.standardize},
                {"seed", c.seed}}},
              {"fit", {{"sweeps", m.sweeps}, {"converged", m.converged}, {"loss_trace", m.loss_trace}}},
              {"code", matrix_to_json(m.code)},
              {"modalities", modalities},
              {"sampler", doc.sampler ? sampler_to_json(*doc.sampler) : json(nullptr)},
              {"run_config", doc.run_config}};
}

std::string content_hash(const json& doc_without_hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(doc_without_hash.dump())));
  return buf;
}

std::string serialize_model(ModelDocument& doc) {
  json j = model_to_json(doc);
  doc.content_hash = content_hash(j);
  j["content_hash"] = doc.content_hash;
  return j.dump(1) + "\n";
}

ModelDocument deserialize_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("load_model", std::string("malformed model document: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != kModelFormatName) {
      throw ParseError("load_model", "not a synth model document");
    }
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw ParseError("load_model", "format_version " + std::to_string(version) + " is not supported (expected " +
                                         std::to_string(kModelFormatVersion) + ")");
    }
    const std::string stored = j.at("content_hash").get<std::string>();
    j.erase("content_hash");
    if (content_hash(j) != stored) throw ParseError("load_model", "content hash mismatch; the file was modified");

    ModelDocument doc;
    doc.content_hash = stored;
    EncodingModel& m = doc.model;
    const json& c = j.at("config");
    m.config.k_s = c.at("k_s").get<Index>();
    m.config.k_f = c.at("k_f").get<Index>();
    m.config.max_sweeps = c.at("max_sweeps").get<int>();
    m.config.rel_tol = c.at("rel_tol").get<double>();
    m.config.ridge = c.at("ridge").get<double>();
    m.config.standardize = c.at("standardize").get<bool>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    const json& fit = j.at("fit");
    m.sweeps = fit.at("sweeps").get<int>();
    m.converged = fit.at("converged").get<bool>();
    m.loss_trace = fit.at("loss_trace").get<std::vector<double>>();
    m.code = matrix_from_json(j.at("code"), "code");
    for (const auto& jm : j.at("modalities")) {
      ModalityFit f;
      f.name = jm.at("name").get<std::string>();
      f.feature_names = jm.at("feature_names").get<std::vector<std::string>>();
      f.alpha = matrix_from_json(jm.at("alpha"), f.name + ".alpha");
      f.beta = matrix_from_json(jm.at("beta"), f.name + ".beta");
      f.intercept = vector_from_json(jm.at("intercept"), "intercept");
      f.column_scale = vector_from_json(jm.at("column_scale"), "column_scale");
      f.observed_min = vector_from_json(jm.at("observed_min"), "observed_min");
      f.observed_max = vector_from_json(jm.at("observed_max"), "observed_max");
      f.loss_trace = jm.at("loss_trace").get<std::vector<double>>();
      f.final_loss = jm.at("final_loss").get<double>();
      if (!jm.at("label").is_null()) {
        f.label = LabelBlock{jm.at("label").at("classes").get<std::vector<std::string>>(),
                             jm.at("label").at("offset").get<Index>()};
      }
      const Index p = f.beta.rows();
      const bool ok = f.alpha.rows() == m.code.rows() && f.beta.cols() == m.code.cols() &&
                      f.intercept.size() == p && f.column_scale.size() == p && f.observed_min.size() == p &&
                      f.observed_max.size() == p && static_cast<Index>(f.feature_names.size()) == p &&
                      (m.modalities.empty() || f.alpha.cols() == m.modalities.front().alpha.cols());
      if (!ok) throw ParseError("load_model", "modality '" + f.name + "' has inconsistent shapes");
      m.modalities.push_back(std::move(f));
    }
    if (m.modalities.empty()) throw ParseError("load_model", "model has no modalities");
    if (!j.at("sampler").is_null()) doc.sampler = sampler_from_json(j.at("sampler"));
    doc.run_config = j.at("run_config");
    return doc;
  } catch (const json::exception& e) {
    throw ParseError("load_model", std::string("model document does not match the schema: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, ModelDocument& doc) { write_text_file(path, serialize_model(doc)); }

ModelDocument load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("load_model", "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace synth
