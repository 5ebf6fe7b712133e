#include "sparcs/io.hpp"

#include <unistd.h>

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "sparcs/error.hpp"

namespace sparcs::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

DataMatrix read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::vector<std::string> names;
  std::vector<double> cells;
  std::size_t width = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (first) {
      first = false;
      width = fields.size();
      double tmp = 0.0;
      bool header = false;
      for (auto f : fields) header = header || !parse_number(f, tmp);
      if (header) {
        for (auto f : fields) names.emplace_back(f);
        continue;
      }
    }
    if (fields.size() != width) {
      fail(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                      std::to_string(width) + " fields, found " + std::to_string(fields.size()));
    }
    for (auto f : fields) {
      double v = 0.0;
      if (!parse_number(f, v)) {
        fail(ErrorCode::ParseError,
             path.string() + ":" + std::to_string(line_no) + ": not a number: '" + std::string(f) + "'");
      }
      cells.push_back(v);
    }
    ++rows;
  }
  if (in.bad()) fail(ErrorCode::IoError, "read error on '" + path.string() + "'");
  Eigen::MatrixXd values(static_cast<Index>(rows), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < width; ++j)
      values(static_cast<Index>(i), static_cast<Index>(j)) = cells[i * width + j];
  return DataMatrix(std::move(values), std::move(names));
}

Eigen::VectorXd read_vector_csv(const std::filesystem::path& path) {
  const DataMatrix d = read_csv(path);
  if (d.p() != 1) fail(ErrorCode::DimensionMismatch, "'" + path.string() + "' must have exactly one column");
  return d.values.col(0);
}

std::pair<DataMatrix, Eigen::VectorXd> split_response(const DataMatrix& data, const std::string& column) {
  std::optional<Index> idx = data.find_column(column);
  if (!idx) {
    Index parsed = -1;
    const auto [ptr, ec] = std::from_chars(column.data(), column.data() + column.size(), parsed);
    if (ec == std::errc() && ptr == column.data() + column.size() && parsed >= 0 && parsed < data.p()) idx = parsed;
  }
  if (!idx) fail(ErrorCode::DimensionMismatch, "no response column '" + column + "'");
  std::vector<Index> keep;
  for (Index j = 0; j < data.p(); ++j)
    if (j != *idx) keep.push_back(j);
  return {data.select_columns(keep), data.values.col(*idx)};
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) fail(ErrorCode::IoError, "number formatting failed");
  return std::string(buf, ptr);
}

std::string to_csv(const DataMatrix& data) {
  std::string out;
  for (Index j = 0; j < data.p(); ++j) {
    if (j) out += ',';
    out += data.column_name(j);
  }
  out += '\n';
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.p(); ++j) {
      if (j) out += ',';
      out += format_double(data.values(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string vector_to_csv(const std::string& header, const Eigen::VectorXd& v) {
  std::string out = header + '\n';
  for (Index i = 0; i < v.size(); ++i) out += format_double(v(i)) + '\n';
  return out;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::IoError, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::IoError, "cannot rename onto '" + path.string() + "'");
  }
}

void write_json_atomic(const std::filesystem::path& path, const json& value) {
  write_text_atomic(path, value.dump(2) + "\n");
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

json to_json(const SupportSet& support, const DataMatrix* source) {
  json entries = json::array();
  for (const auto& e : support.entries) {
    json item = {{"index", e.index}, {"score", e.score}};
    if (source != nullptr) item["name"] = source->column_name(e.index);
    entries.push_back(std::move(item));
  }
  json j = {{"method", std::string(to_string(support.method))}, {"size", support.size()}, {"entries", entries}};
  j["threshold"] = support.threshold_used ? json(*support.threshold_used) : json(nullptr);
  return j;
}

SupportSet support_from_json(const json& j) {
  try {
    SupportSet s;
    s.method = parse_screening_method(j.at("method").get<std::string>());
    for (const auto& e : j.at("entries")) s.entries.push_back({e.at("index").get<Index>(), e.at("score").get<double>()});
    if (j.contains("threshold") && !j["threshold"].is_null()) s.threshold_used = j["threshold"].get<double>();
    return s;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("support JSON: ") + e.what());
  }
}

json to_json(const TwoStageModel& model) {
  json coefs = json::array();
  for (Index i = 0; i < model.coefficients.size(); ++i) coefs.push_back(model.coefficients(i));
  return {
      {"support", to_json(model.support)},
      {"variables", model.variable_names},
      {"coefficients", coefs},
      {"intercept", model.intercept},
      {"metadata",
       {{"method", std::string(to_string(model.method))},
        {"n_stage1", model.n_stage1},
        {"t_total", model.t_total},
        {"reuse_stage1", model.reuse_stage1},
        {"ridge", model.ridge},
        {"train_rmse", model.train_rmse},
        {"train_residual_mean", model.train_residual_mean}}},
  };
}

TwoStageModel model_from_json(const json& j) {
  try {
    TwoStageModel m;
    m.support = support_from_json(j.at("support"));
    m.variable_names = j.at("variables").get<std::vector<std::string>>();
    const auto coefs = j.at("coefficients").get<std::vector<double>>();
    m.coefficients = Eigen::Map<const Eigen::VectorXd>(coefs.data(), static_cast<Index>(coefs.size()));
    m.intercept = j.at("intercept").get<double>();
    const json& meta = j.at("metadata");
    m.method = parse_screening_method(meta.at("method").get<std::string>());
    m.n_stage1 = meta.at("n_stage1").get<Index>();
    m.t_total = meta.at("t_total").get<Index>();
    m.reuse_stage1 = meta.at("reuse_stage1").get<bool>();
    m.ridge = meta.at("ridge").get<bool>();
    m.train_rmse = meta.value("train_rmse", 0.0);
    m.train_residual_mean = meta.value("train_residual_mean", 0.0);
    if (static_cast<std::size_t>(m.coefficients.size()) != m.support.size()) {
      fail(ErrorCode::ParseError, "model JSON: coefficient count differs from support size");
    }
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("model JSON: ") + e.what());
  }
}

json to_json(const GroundTruth& truth) {
  json coefs = json::array();
  for (Index i : truth.support) coefs.push_back(truth.a(i));
  return {{"p", truth.a.size()}, {"support", truth.support}, {"coefficients", coefs}, {"noise_var", truth.noise_var}};
}

json to_json(const CovarianceSpec& spec) {
  return {{"p", spec.p},
          {"block_size", spec.block_size},
          {"block_corr", spec.block_corr},
          {"decay_base", spec.decay_base},
          {"decay_scale", spec.decay_scale}};
}

}  // namespace sparcs::io
