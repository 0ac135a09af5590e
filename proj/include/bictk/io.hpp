#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "core.hpp"

namespace bictk {

struct LoadOptions {
  char delimiter = '\t';
  // Compared case-insensitively. The empty marker matches empty cells.
  std::vector<std::string> missing_markers = {"", "NA", "NaN"};
};

inline LoadOptions csv_options() {
  LoadOptions o;
  o.delimiter = ',';
  return o;
}

namespace detail {

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

// Shortest decimal text that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

// Parses a delimited matrix: header row of condition labels (first cell is a
// corner label and ignored), then one row per gene with the label first.
inline ExpressionMatrix parse_matrix(std::istream& in, const LoadOptions& opt = {}) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> col_ids;
  bool have_header = false;
  std::vector<std::string> row_ids;
  std::vector<double> cells;
  std::vector<char> missing;

  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      line.erase(0, 3);
    }
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split(line, opt.delimiter);
    if (!have_header) {
      if (fields.size() < 2) throw ValidationError("header has no condition labels");
      for (std::size_t k = 1; k < fields.size(); ++k) col_ids.emplace_back(fields[k]);
      have_header = true;
      continue;
    }
    if (fields.size() != col_ids.size() + 1) {
      throw ParseError("expected " + std::to_string(col_ids.size() + 1) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    row_ids.emplace_back(fields[0]);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      const std::string_view f = fields[k];
      const bool is_missing =
          std::any_of(opt.missing_markers.begin(), opt.missing_markers.end(),
                      [&](const std::string& m) { return detail::iequals(f, m); });
      if (is_missing) {
        cells.push_back(0.0);
        missing.push_back(1);
        continue;
      }
      double v = 0.0;
      const char* first = f.data();
      if (!f.empty() && *first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw ParseError("column " + std::to_string(k + 1) + ": '" + std::string(f) +
                             "' is not a number or missing marker",
                         line_no);
      }
      cells.push_back(v);
      missing.push_back(0);
    }
  }
  if (!have_header) throw ValidationError("matrix file is empty");
  if (row_ids.empty()) throw ValidationError("matrix has zero rows");

  const auto n = static_cast<Eigen::Index>(row_ids.size());
  const auto m = static_cast<Eigen::Index>(col_ids.size());
  Matrix values(n, m);
  MissingMask mask(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      values(i, j) = cells[static_cast<std::size_t>(i * m + j)];
      mask(i, j) = missing[static_cast<std::size_t>(i * m + j)] != 0;
    }
  }
  return ExpressionMatrix(std::move(row_ids), std::move(col_ids), std::move(values),
                          std::move(mask));
}

inline ExpressionMatrix parse_matrix(const std::string& text, const LoadOptions& opt = {}) {
  std::istringstream in(text);
  return parse_matrix(in, opt);
}

inline ExpressionMatrix load_matrix(const std::string& path, const LoadOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open matrix file '" + path + "'");
  return parse_matrix(in, opt);
}

inline void write_matrix(std::ostream& out, const ExpressionMatrix& m, char delimiter = '\t',
                         const std::string& corner = "gene") {
  out << corner;
  for (const auto& c : m.col_ids()) out << delimiter << c;
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << m.row_ids()[i];
    for (std::size_t j = 0; j < m.cols(); ++j) {
      out << delimiter;
      if (m.missing()(i, j)) {
        out << "NA";
      } else {
        out << detail::format_double(m(i, j));
      }
    }
    out << '\n';
  }
}

inline std::string matrix_to_string(const ExpressionMatrix& m, char delimiter = '\t') {
  std::ostringstream out;
  write_matrix(out, m, delimiter);
  return out.str();
}

inline void save_matrix(const ExpressionMatrix& m, const std::string& path,
                        char delimiter = '\t') {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  write_matrix(out, m, delimiter);
}

// The "numerical matrix" view of one bicluster: its submatrix with labels.
inline ExpressionMatrix bicluster_matrix(const ExpressionMatrix& m, const Bicluster& b) {
  validate_bicluster(b, m);
  std::vector<std::string> r, c;
  for (auto i : b.rows) r.push_back(m.row_ids()[i]);
  for (auto j : b.cols) c.push_back(m.col_ids()[j]);
  return ExpressionMatrix(std::move(r), std::move(c), extract_submatrix(m, b));
}

// ---------------------------------------------------------------------------
// Bicluster-set documents. Rows and columns are stored as labels so a set
// stays meaningful after the matrix is filtered; positions are resolved
// against a matrix when loading.

inline Json bicluster_set_to_json(const BiclusterSet& s, const ExpressionMatrix& m) {
  Json doc;
  doc["format"] = "bicluster-set";
  doc["version"] = 1;
  doc["algorithm"] = s.algorithm;
  doc["params"] = s.params;
  doc["seed"] = s.seed;
  doc["matrix"] = {{"rows", m.rows()}, {"cols", m.cols()}};
  doc["count"] = s.biclusters.size();
  Json list = Json::array();
  for (const auto& b : s.biclusters) {
    validate_bicluster(b, m);
    Json jb;
    Json rows = Json::array(), cols = Json::array();
    for (auto i : b.rows) rows.push_back(m.row_ids()[i]);
    for (auto j : b.cols) cols.push_back(m.col_ids()[j]);
    jb["rows"] = std::move(rows);
    jb["cols"] = std::move(cols);
    if (b.score) jb["score"] = *b.score;
    list.push_back(std::move(jb));
  }
  doc["biclusters"] = std::move(list);
  return doc;
}

inline std::string dump_bicluster_set(const BiclusterSet& s, const ExpressionMatrix& m) {
  return bicluster_set_to_json(s, m).dump(2) + "\n";
}

inline BiclusterSet bicluster_set_from_json(const Json& doc, const ExpressionMatrix& m) {
  try {
    if (doc.value("format", "") != "bicluster-set") {
      throw ParseError("not a bicluster-set document");
    }
    BiclusterSet s;
    s.algorithm = doc.at("algorithm").get<std::string>();
    s.params = doc.value("params", Json::object());
    s.seed = doc.at("seed").get<std::uint64_t>();

    std::unordered_map<std::string, std::size_t> row_pos, col_pos;
    for (std::size_t i = 0; i < m.rows(); ++i) row_pos.emplace(m.row_ids()[i], i);
    for (std::size_t j = 0; j < m.cols(); ++j) col_pos.emplace(m.col_ids()[j], j);

    auto resolve = [](const Json& labels, const auto& pos, const char* what) {
      IndexList out;
      for (const auto& l : labels) {
        const auto label = l.get<std::string>();
        auto it = pos.find(label);
        if (it == pos.end()) {
          throw ValidationError(std::string(what) + " label '" + label +
                                "' is outside the matrix");
        }
        out.push_back(it->second);
      }
      return out;
    };

    const auto& list = doc.at("biclusters");
    if (doc.contains("count") && doc["count"].get<std::size_t>() != list.size()) {
      throw ParseError("declared count does not match the number of biclusters");
    }
    for (const auto& jb : list) {
      Bicluster b = make_bicluster(resolve(jb.at("rows"), row_pos, "row"),
                                   resolve(jb.at("cols"), col_pos, "column"));
      if (b.rows.size() != jb.at("rows").size() || b.cols.size() != jb.at("cols").size()) {
        throw ValidationError("bicluster lists a label more than once");
      }
      if (jb.contains("score") && !jb["score"].is_null()) b.score = jb["score"].get<double>();
      validate_bicluster(b, m);
      s.biclusters.push_back(std::move(b));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed bicluster-set document: ") + e.what());
  }
}

inline BiclusterSet parse_bicluster_set(const std::string& text, const ExpressionMatrix& m) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed bicluster-set document: ") + e.what());
  }
  return bicluster_set_from_json(doc, m);
}

inline void save_bicluster_set(const BiclusterSet& s, const ExpressionMatrix& m,
                               const std::string& path) {
  const std::string text = dump_bicluster_set(s, m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline BiclusterSet load_bicluster_set(const std::string& path, const ExpressionMatrix& m) {
  return parse_bicluster_set(read_file(path), m);
}

}  // namespace bictk
