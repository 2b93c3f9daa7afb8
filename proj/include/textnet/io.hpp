#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace textnet {

// Embedding text format: first line `count dim`, then one `key v1 ... v_dim`
// row per item. Values are printed with 6 decimals.

struct EmbeddingFile {
  std::size_t dim = 0;
  std::vector<std::pair<std::string, Eigen::VectorXd>> rows;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline double parse_double(std::string_view tok, const std::string& path, std::size_t lineno) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed float '" +
                             std::string(tok) + "'");
  }
  return v;
}

inline long long parse_ll(std::string_view tok, const std::string& path, std::size_t lineno) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0) {
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed integer '" +
                             std::string(tok) + "'");
  }
  return v;
}

}  // namespace detail

inline void write_embedding_header(std::ostream& os, std::size_t count, std::size_t dim) {
  os << count << ' ' << dim << '\n';
}

inline void write_embedding_row(std::ostream& os, std::string_view key, const double* v,
                                std::size_t n) {
  os << key;
  char buf[40];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, " %.6f", v[i]);
    os << buf;
  }
  os << '\n';
}

inline EmbeddingFile read_embedding_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);
  EmbeddingFile out;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty embedding file");
  ++lineno;
  auto header = detail::split_ws(line);
  if (header.size() != 2) throw std::runtime_error(path + ":1: expected header 'count dim'");
  const long long count = detail::parse_ll(header[0], path, 1);
  const long long dim = detail::parse_ll(header[1], path, 1);
  if (dim <= 0) throw std::runtime_error(path + ":1: dimension must be positive");
  out.dim = static_cast<std::size_t>(dim);
  out.rows.reserve(static_cast<std::size_t>(count));
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != static_cast<std::size_t>(dim) + 1) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key plus " +
                               std::to_string(dim) + " values, got " +
                               std::to_string(toks.size() - 1));
    }
    Eigen::VectorXd v(dim);
    for (long long i = 0; i < dim; ++i) {
      v[i] = detail::parse_double(toks[static_cast<std::size_t>(i) + 1], path, lineno);
    }
    out.rows.emplace_back(std::string(toks[0]), std::move(v));
  }
  if (out.rows.size() != static_cast<std::size_t>(count)) {
    throw std::runtime_error(path + ": header declares " + std::to_string(count) +
                             " rows, found " + std::to_string(out.rows.size()));
  }
  return out;
}

}  // namespace textnet
