#pragma once

// CSV ingestion and atomic output, plus JSON forms of supports, fitted
// models and synthetic ground truth.

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sparcs/linalg.hpp"
#include "sparcs/screening.hpp"
#include "sparcs/simgen.hpp"
#include "sparcs/two_stage.hpp"

namespace sparcs::io {

using json = nlohmann::json;

/// Numeric CSV. The first line is a header when any of its fields is not a
/// number. Throws ParseError on ragged rows or bad cells, IoError when the
/// file cannot be read.
DataMatrix read_csv(const std::filesystem::path& path);

/// Single-column CSV (header optional) as a vector.
Eigen::VectorXd read_vector_csv(const std::filesystem::path& path);

/// Removes the response column, chosen by name or else by 0-based index.
std::pair<DataMatrix, Eigen::VectorXd> split_response(const DataMatrix& data, const std::string& column);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

std::string to_csv(const DataMatrix& data);
std::string vector_to_csv(const std::string& header, const Eigen::VectorXd& v);

/// Writes to a sibling temp file and renames it over path.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
void write_json_atomic(const std::filesystem::path& path, const json& value);

json read_json(const std::filesystem::path& path);

json to_json(const SupportSet& support, const DataMatrix* source = nullptr);
SupportSet support_from_json(const json& j);

json to_json(const TwoStageModel& model);
TwoStageModel model_from_json(const json& j);

json to_json(const GroundTruth& truth);
json to_json(const CovarianceSpec& spec);

}  // namespace sparcs::io
