#pragma once

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "skewmax/field.hpp"

namespace skewmax {

/// Plain-text gridded field format:
///
///   d L S T nx [ny [nz]] nt
///   u_1,...,u_d            (one row per node, row-major, last axis fastest)
///   ...                    (all nodes of time sample 0, then sample 1, ...)
///
/// Blank lines and lines starting with '#' after the header are ignored.
template <int D>
void write_gridded(std::ostream &out, const GriddedSamples<D> &s) {
  out << D << ' ' << std::setprecision(17) << s.domain.period << ' ' << s.domain.t_start << ' ' << s.domain.t_end;
  for (int a = 0; a < D; ++a) out << ' ' << s.n[a];
  out << ' ' << s.nt << '\n';
  for (int k = 0; k < s.nt; ++k)
    for (std::size_t f = 0; f < s.nodes(); ++f) {
      for (int c = 0; c < D; ++c) out << (c ? "," : "") << s.at(k, f, c);
      out << '\n';
    }
  if (!out) throw io_error("failed writing gridded field");
}

/// Peek the dimension recorded in a gridded file header.
inline int gridded_dimension(std::istream &in) {
  const auto pos = in.tellg();
  int d = 0;
  if (!(in >> d)) throw io_error("gridded field header is missing");
  in.clear();
  in.seekg(pos);
  return d;
}

template <int D>
GriddedSamples<D> read_gridded(std::istream &in) {
  std::string header;
  if (!std::getline(in, header)) throw io_error("gridded field header is missing");
  std::istringstream hs(header);
  std::vector<std::string> tok;
  for (std::string t; hs >> t;) tok.push_back(t);
  if (tok.size() != static_cast<std::size_t>(5 + D))
    throw io_error("gridded field header must be 'd L S T n_1..n_d nt'");
  GriddedSamples<D> s;
  try {
    if (std::stoi(tok[0]) != D) throw io_error("gridded field dimension mismatch");
    s.domain.period = std::stod(tok[1]);
    s.domain.t_start = std::stod(tok[2]);
    s.domain.t_end = std::stod(tok[3]);
    for (int a = 0; a < D; ++a) s.n[a] = std::stoi(tok[4 + a]);
    s.nt = std::stoi(tok[4 + D]);
  } catch (const std::logic_error &) {
    throw io_error("gridded field header has a non-numeric entry");
  }
  for (int a = 0; a < D; ++a)
    if (s.n[a] < 1) throw io_error("gridded field header has a non-positive grid size");
  if (s.nt < 1) throw io_error("gridded field header has no time samples");
  const std::size_t rows = static_cast<std::size_t>(s.nt) * s.nodes();
  s.values.reserve(rows * D);
  std::string line;
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (seen == rows) throw io_error("gridded field has more rows than the header declares");
    std::istringstream ls(line);
    std::string cell;
    int cols = 0;
    while (std::getline(ls, cell, ',')) {
      double v;
      try {
        std::size_t used = 0;
        v = std::stod(cell, &used);
      } catch (const std::logic_error &) {
        throw io_error("gridded field row " + std::to_string(seen + 1) + " has a non-numeric entry");
      }
      s.values.push_back(v);
      ++cols;
    }
    if (cols != D)
      throw io_error("gridded field row " + std::to_string(seen + 1) + " has " + std::to_string(cols) +
                     " components, expected " + std::to_string(D));
    ++seen;
  }
  if (seen != rows)
    throw io_error("gridded field has " + std::to_string(seen) + " rows, header declares " + std::to_string(rows));
  return s;
}

template <int D>
GriddedSamples<D> load_gridded(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  return read_gridded<D>(in);
}

template <int D>
void save_gridded(const std::string &path, const GriddedSamples<D> &s) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  write_gridded(out, s);
}

}  // namespace skewmax
