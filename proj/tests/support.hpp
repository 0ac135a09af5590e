#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <bictk/bictk.hpp>

namespace testing_support {

using bictk::IndexList;
using bictk::Matrix;

inline Matrix random_matrix(std::size_t n, std::size_t m, bictk::Rng& rng, double lo = -1,
                            double hi = 1) {
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = rng.uniform(lo, hi);
  return x;
}

inline bictk::ExpressionMatrix labeled(Matrix x) {
  return bictk::ExpressionMatrix::from_values(std::move(x));
}

inline bictk::ExpressionMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(rows.begin()->size());
  Matrix x(n, m);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) x(i, j++) = v;
    ++i;
  }
  return labeled(std::move(x));
}

// Mean squared residue evaluated straight from its definition, in long double.
inline double msr_oracle(const Matrix& a) {
  const auto n = a.rows(), m = a.cols();
  long double total = 0;
  std::vector<long double> rmean(n, 0), cmean(m, 0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      rmean[i] += a(i, j);
      cmean[j] += a(i, j);
      total += a(i, j);
    }
  for (auto& v : rmean) v /= m;
  for (auto& v : cmean) v /= n;
  total /= static_cast<long double>(n * m);
  long double acc = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const long double r = a(i, j) - rmean[i] - cmean[j] + total;
      acc += r * r;
    }
  return static_cast<double>(acc / static_cast<long double>(n * m));
}

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("bictk-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Minimal XML reader for checking emitted SVG: well-formedness (balanced,
// properly nested tags, quoted attributes, known entities) and a flat list of
// elements in document order.
struct XmlElement {
  std::string name;
  std::map<std::string, std::string> attrs;
  int depth = 0;

  const std::string& attr(const std::string& key) const {
    static const std::string empty;
    const auto it = attrs.find(key);
    return it == attrs.end() ? empty : it->second;
  }
  double num(const std::string& key) const { return std::stod(attr(key)); }
};

inline std::string xml_unescape(const std::string& s) {
  std::string out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] != '&') {
      out += s[k];
      continue;
    }
    const auto semi = s.find(';', k);
    if (semi == std::string::npos) throw std::runtime_error("unterminated entity");
    const std::string ent = s.substr(k + 1, semi - k - 1);
    if (ent == "amp") out += '&';
    else if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else throw std::runtime_error("unknown entity &" + ent + ";");
    k = semi;
  }
  return out;
}

inline std::vector<XmlElement> parse_xml(const std::string& doc) {
  std::vector<XmlElement> out;
  std::vector<std::string> stack;
  std::size_t k = 0;
  bool root_seen = false;
  auto is_name = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' ||
           c == '.';
  };
  while (k < doc.size()) {
    if (doc[k] != '<') {
      const auto next = doc.find('<', k);
      const std::string text = doc.substr(k, next == std::string::npos ? std::string::npos : next - k);
      if (stack.empty() && text.find_first_not_of(" \t\r\n") != std::string::npos)
        throw std::runtime_error("text outside the root element");
      if (text.find('>') != std::string::npos) throw std::runtime_error("stray '>' in text");
      xml_unescape(text);
      if (next == std::string::npos) break;
      k = next;
      continue;
    }
    if (doc.compare(k, 5, "<?xml") == 0) {
      if (k != 0) throw std::runtime_error("XML declaration not at start");
      const auto end = doc.find("?>", k);
      if (end == std::string::npos) throw std::runtime_error("unterminated declaration");
      k = end + 2;
      continue;
    }
    if (doc.compare(k, 4, "<!--") == 0) {
      const auto end = doc.find("-->", k);
      if (end == std::string::npos) throw std::runtime_error("unterminated comment");
      k = end + 3;
      continue;
    }
    if (doc.compare(k, 2, "</") == 0) {
      std::size_t p = k + 2;
      std::string name;
      while (p < doc.size() && is_name(doc[p])) name += doc[p++];
      while (p < doc.size() && std::isspace(static_cast<unsigned char>(doc[p]))) ++p;
      if (p >= doc.size() || doc[p] != '>') throw std::runtime_error("malformed end tag");
      if (stack.empty() || stack.back() != name)
        throw std::runtime_error("mismatched end tag </" + name + ">");
      stack.pop_back();
      k = p + 1;
      continue;
    }
    std::size_t p = k + 1;
    XmlElement e;
    while (p < doc.size() && is_name(doc[p])) e.name += doc[p++];
    if (e.name.empty()) throw std::runtime_error("empty element name");
    if (stack.empty() && root_seen) throw std::runtime_error("more than one root element");
    for (;;) {
      while (p < doc.size() && std::isspace(static_cast<unsigned char>(doc[p]))) ++p;
      if (p >= doc.size()) throw std::runtime_error("unterminated start tag");
      if (doc[p] == '>' || doc.compare(p, 2, "/>") == 0) break;
      std::string key;
      while (p < doc.size() && is_name(doc[p])) key += doc[p++];
      if (key.empty() || p >= doc.size() || doc[p] != '=')
        throw std::runtime_error("malformed attribute in <" + e.name + ">");
      ++p;
      if (p >= doc.size() || (doc[p] != '"' && doc[p] != '\''))
        throw std::runtime_error("unquoted attribute '" + key + "'");
      const char q = doc[p++];
      const auto end = doc.find(q, p);
      if (end == std::string::npos) throw std::runtime_error("unterminated attribute");
      const std::string raw = doc.substr(p, end - p);
      if (raw.find('<') != std::string::npos) throw std::runtime_error("'<' in attribute value");
      if (!e.attrs.emplace(key, xml_unescape(raw)).second)
        throw std::runtime_error("duplicate attribute '" + key + "'");
      p = end + 1;
    }
    e.depth = static_cast<int>(stack.size());
    root_seen = true;
    if (doc[p] == '>') {
      stack.push_back(e.name);
      k = p + 1;
    } else {
      k = p + 2;
    }
    out.push_back(std::move(e));
  }
  if (!stack.empty()) throw std::runtime_error("unclosed element <" + stack.back() + ">");
  if (!root_seen) throw std::runtime_error("no root element");
  return out;
}

inline std::vector<XmlElement> select(const std::vector<XmlElement>& els, const std::string& name,
                                      const std::string& cls = "") {
  std::vector<XmlElement> out;
  for (const auto& e : els)
    if (e.name == name && (cls.empty() || e.attr("class") == cls)) out.push_back(e);
  return out;
}

// "x1,y1 x2,y2 ..." -> [(x1,y1), ...]
inline std::vector<std::pair<double, double>> polyline_points(const std::string& s) {
  std::vector<std::pair<double, double>> out;
  std::size_t k = 0;
  while (k < s.size()) {
    while (k < s.size() && s[k] == ' ') ++k;
    if (k >= s.size()) break;
    const auto comma = s.find(',', k);
    auto space = s.find(' ', comma);
    if (space == std::string::npos) space = s.size();
    out.emplace_back(std::stod(s.substr(k, comma - k)), std::stod(s.substr(comma + 1, space - comma - 1)));
    k = space;
  }
  return out;
}

}  // namespace testing_support
