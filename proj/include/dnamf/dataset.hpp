#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dnamf/errors.hpp"
#include "dnamf/kernels.hpp"

namespace dnamf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kNestedTol = 1e-12;

struct FidelityLevel {
  double t = 0.0;
  MatrixXd X;
  VectorXd y;

  Eigen::Index size() const { return X.rows(); }
};

namespace detail {

inline bool rows_equal(const MatrixXd& A, Eigen::Index i, const MatrixXd& B, Eigen::Index k,
                       double tol) {
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    if (std::abs(A(i, j) - B(k, j)) > tol) return false;
  return true;
}

}  // namespace detail

class MultiFidelityData {
 public:
  MultiFidelityData() = default;

  // Sorts levels by decreasing t and validates. Throws ConfigError on invalid input.
  explicit MultiFidelityData(std::vector<FidelityLevel> levels) : levels_(std::move(levels)) {
    if (levels_.size() < 2) throw ConfigError("at least two fidelity levels are required");
    std::stable_sort(levels_.begin(), levels_.end(),
                     [](const FidelityLevel& a, const FidelityLevel& b) { return a.t > b.t; });
    d_ = levels_.front().X.cols();
    if (d_ < 1) throw ConfigError("input dimension must be at least 1");
    for (std::size_t l = 0; l < levels_.size(); ++l) {
      const auto& lv = levels_[l];
      if (!std::isfinite(lv.t) || lv.t <= 0.0)
        throw ConfigError("tuning values must be finite and positive");
      if (l > 0 && lv.t == levels_[l - 1].t) throw ConfigError("duplicate tuning value");
      if (lv.X.cols() != d_) throw ConfigError("levels have different input dimensions");
      if (lv.X.rows() < 1) throw ConfigError("every level needs at least one design point");
      if (lv.y.size() != lv.X.rows()) throw ConfigError("design and output sizes differ");
      if (!lv.X.allFinite() || !lv.y.allFinite()) throw ConfigError("non-finite data");
      for (Eigen::Index i = 0; i < lv.X.rows(); ++i)
        for (Eigen::Index k = 0; k < i; ++k)
          if (detail::rows_equal(lv.X, i, lv.X, k, 0.0))
            throw ConfigError("duplicate design point within a level");
    }
  }

  int num_levels() const { return static_cast<int>(levels_.size()); }
  Eigen::Index dim() const { return d_; }
  // 0-based: level(0) is the coarsest (largest t).
  const FidelityLevel& level(int l) const { return levels_.at(static_cast<std::size_t>(l)); }
  const std::vector<FidelityLevel>& levels() const { return levels_; }

  std::vector<double> tuning_values() const {
    std::vector<double> t;
    for (const auto& lv : levels_) t.push_back(lv.t);
    return t;
  }

  Eigen::Index total_points() const {
    Eigen::Index n = 0;
    for (const auto& lv : levels_) n += lv.size();
    return n;
  }

 private:
  std::vector<FidelityLevel> levels_;
  Eigen::Index d_ = 0;
};

inline bool check_nested(const MultiFidelityData& data, double tol = kNestedTol) {
  for (int l = 1; l < data.num_levels(); ++l) {
    const auto& hi = data.level(l);
    const auto& lo = data.level(l - 1);
    if (hi.size() > lo.size()) return false;
    for (Eigen::Index i = 0; i < hi.size(); ++i)
      if (!detail::rows_equal(hi.X, i, lo.X, i, tol)) return false;
  }
  return true;
}

// Inputs of levels 2..L stacked, with the previous-level output as the y coordinate.
struct TrainingAssembly {
  AugmentedInputs inputs;  // X_{-1}, t_{-1}, Y_{-L}
  VectorXd y_out;          // Y_{-1}
  std::vector<int> level_of_row;  // 0-based fidelity level of each row

  Eigen::Index size() const { return y_out.size(); }
};

inline TrainingAssembly assemble(const MultiFidelityData& data, double tol = kNestedTol) {
  if (!check_nested(data, tol)) throw NotNested("design is not nested");
  Eigen::Index n = 0;
  for (int l = 1; l < data.num_levels(); ++l) n += data.level(l).size();
  TrainingAssembly a;
  a.inputs.t.resize(n);
  a.inputs.X.resize(n, data.dim());
  a.inputs.y.resize(n);
  a.y_out.resize(n);
  a.level_of_row.resize(static_cast<std::size_t>(n));
  Eigen::Index r = 0;
  for (int l = 1; l < data.num_levels(); ++l) {
    const auto& lv = data.level(l);
    const auto& prev = data.level(l - 1);
    for (Eigen::Index i = 0; i < lv.size(); ++i, ++r) {
      a.inputs.t(r) = lv.t;
      a.inputs.X.row(r) = lv.X.row(i);
      a.inputs.y(r) = prev.y(i);
      a.y_out(r) = lv.y(i);
      a.level_of_row[static_cast<std::size_t>(r)] = l;
    }
  }
  return a;
}

// ------------------------------------------------------------------ JSON I/O

inline nlohmann::json matrix_to_json(const MatrixXd& X) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < X.cols(); ++j) row.push_back(X(i, j));
    arr.push_back(std::move(row));
  }
  return arr;
}

inline nlohmann::json vector_to_json(const VectorXd& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

inline VectorXd vector_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("expected a numeric array");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

inline MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index d) {
  if (!j.is_array()) throw ConfigError("expected an array of rows");
  MatrixXd X(static_cast<Eigen::Index>(j.size()), d);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d)
      throw ConfigError("design row has the wrong dimension");
    for (Eigen::Index k = 0; k < d; ++k)
      X(static_cast<Eigen::Index>(i), k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return X;
}

inline nlohmann::json to_json(const MultiFidelityData& data) {
  nlohmann::json j;
  j["d"] = data.dim();
  auto lv = nlohmann::json::array();
  for (const auto& l : data.levels())
    lv.push_back({{"t", l.t}, {"X", matrix_to_json(l.X)}, {"y", vector_to_json(l.y)}});
  j["levels"] = std::move(lv);
  return j;
}

inline MultiFidelityData data_from_json(const nlohmann::json& j) {
  try {
    const auto d = j.at("d").get<Eigen::Index>();
    std::vector<FidelityLevel> levels;
    for (const auto& l : j.at("levels")) {
      FidelityLevel f;
      f.t = l.at("t").get<double>();
      f.X = matrix_from_json(l.at("X"), d);
      f.y = vector_from_json(l.at("y"));
      levels.push_back(std::move(f));
    }
    return MultiFidelityData(std::move(levels));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
}

inline std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  out << s;
  if (!out) throw IoError("write failed for '" + p.string() + "'");
}

inline nlohmann::json read_json_file(const std::filesystem::path& p) {
  const std::string s = read_text_file(p);
  try {
    return nlohmann::json::parse(s);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("invalid JSON in '" + p.string() + "': " + e.what());
  }
}

inline MultiFidelityData load_manifest(const std::filesystem::path& p) {
  return data_from_json(read_json_file(p));
}

// ------------------------------------------------------------------- CSV I/O

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) {
    const auto b = cur.find_first_not_of(" \t\r");
    const auto e = cur.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
  }
  return out;
}

inline double parse_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw ConfigError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("bad number '" + s + "'");
  }
}

}  // namespace detail

// Numeric CSV with a header row; returns the data rows.
inline MatrixXd read_numeric_csv(const std::filesystem::path& p,
                                 std::vector<std::string>* header = nullptr) {
  std::istringstream in(read_text_file(p));
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV '" + p.string() + "'");
  const auto head = detail::split_csv_line(line);
  if (header) *header = head;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != head.size()) throw ConfigError("ragged CSV row in '" + p.string() + "'");
    std::vector<double> r;
    for (const auto& c : cells) r.push_back(detail::parse_double(c));
    rows.push_back(std::move(r));
  }
  MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(head.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < head.size(); ++j)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return M;
}

// Sidecar CSV with columns file,t; each file holds x1..xd,y. Paths are relative to the sidecar.
inline MultiFidelityData load_csv_dataset(const std::filesystem::path& sidecar) {
  std::istringstream in(read_text_file(sidecar));
  std::string line;
  std::getline(in, line);
  const auto head = detail::split_csv_line(line);
  if (head.size() != 2 || head[0] != "file" || head[1] != "t")
    throw ConfigError("sidecar header must be 'file,t'");
  std::vector<FidelityLevel> levels;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 2) throw ConfigError("bad sidecar row");
    const auto M = read_numeric_csv(sidecar.parent_path() / cells[0]);
    if (M.cols() < 2) throw ConfigError("level CSV needs x1..xd,y columns");
    FidelityLevel f;
    f.t = detail::parse_double(cells[1]);
    f.X = M.leftCols(M.cols() - 1);
    f.y = M.col(M.cols() - 1);
    levels.push_back(std::move(f));
  }
  return MultiFidelityData(std::move(levels));
}

}  // namespace dnamf
