#pragma once

#include "synth/dataset.hpp"
#include "synth/encoder.hpp"
#include "synth/latent_sampler.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace synth {

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kModelFormatName = "synth-encoding-model";

/// Comma-separated table with a header row. Lines starting with '#' are
/// comments. The label column, when named, is read as categorical text.
Dataset parse_csv(std::istream& in, const std::string& source,
                  const std::optional<std::string>& label_column);
Dataset load_csv(const std::filesystem::path& path,
                 const std::optional<std::string>& label_column);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

/// Writes `values` under `names`, plus a trailing "label" column when labels
/// are given. Each comment line is written as "# <line>" before the header.
void write_csv(std::ostream& out, const std::vector<std::string>& names, const Matrix& values,
               const std::optional<Labels>& labels, const std::vector<std::string>& comments);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
               const Matrix& values, const std::optional<Labels>& labels,
               const std::vector<std::string>& comments);

/// {"rows": r, "cols": c, "data": [row-major values]}
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& field);

/// A persisted model: the encoding, an optional fitted latent sampler, and
/// the configuration echo of the command that produced it.
struct ModelDocument {
  EncodingModel model;
  std::optional<LatentSampler> sampler;
  nlohmann::json run_config = nlohmann::json::object();
  std::string content_hash;  // filled by save/load
};

/// Document without the "content_hash" field.
nlohmann::json model_to_json(const ModelDocument& doc);
/// Hash of the canonical dump of a document without its "content_hash".
std::string content_hash(const nlohmann::json& doc_without_hash);

std::string serialize_model(ModelDocument& doc);
ModelDocument deserialize_model(const std::string& text);
void save_model(const std::filesystem::path& path, ModelDocument& doc);
ModelDocument load_model(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace synth
