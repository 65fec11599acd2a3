#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "fracslow/core/error.hpp"
#include "fracslow/core/sample_path.hpp"

namespace fracslow::noise {

inline constexpr std::array<char, 6> kPathMagic{'F', 'P', 'A', 'T', 'H', '1'};

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) throw Error("binary path: truncated record");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

inline void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }
inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace detail

/// CSV with header t,v_1,..,v_dim and round-trip precision.
inline void write_path_csv(std::ostream& os, const SamplePath& p) {
  os << "t";
  for (std::size_t c = 0; c < p.dim(); ++c) os << ",v_" << (c + 1);
  os << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < p.n_points(); ++i) {
    os << p.time(i);
    for (std::size_t c = 0; c < p.dim(); ++c) os << ',' << p(i, c);
    os << '\n';
  }
}

inline SamplePath read_path_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("t", 0) != 0) throw Error("path CSV: missing header");
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() < 2) throw Error("path CSV: row without values");
    times.push_back(row.front());
    row.erase(row.begin());
    if (!rows.empty() && row.size() != rows.front().size()) throw Error("path CSV: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error("path CSV: no data rows");
  RowMatrix v(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < rows[i].size(); ++c) v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  const double dt = rows.size() > 1 ? (times.back() - times.front()) / static_cast<double>(rows.size() - 1) : 1.0;
  return SamplePath(times.front(), dt, std::move(v));
}

/// Binary record: magic "FPATH1", u64 dim, u64 n, f64 t0, f64 dt, then n*dim
/// row-major f64 values; all little-endian.
inline void write_path_binary(std::ostream& os, const SamplePath& p) {
  os.write(kPathMagic.data(), kPathMagic.size());
  detail::put_u64(os, p.dim());
  detail::put_u64(os, p.n_points());
  detail::put_f64(os, p.t0());
  detail::put_f64(os, p.dt());
  for (std::size_t i = 0; i < p.n_points(); ++i)
    for (std::size_t c = 0; c < p.dim(); ++c) detail::put_f64(os, p(i, c));
}

inline SamplePath read_path_binary(std::istream& is) {
  std::array<char, 6> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kPathMagic) throw Error("binary path: bad magic");
  const std::uint64_t dim = detail::get_u64(is);
  const std::uint64_t n = detail::get_u64(is);
  const double t0 = detail::get_f64(is);
  const double dt = detail::get_f64(is);
  if (dim == 0 || n == 0 || dim > (1u << 20) || n > (std::uint64_t{1} << 40)) throw Error("binary path: bad header");
  RowMatrix v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t c = 0; c < dim; ++c) v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = detail::get_f64(is);
  return SamplePath(t0, dt, std::move(v));
}

}  // namespace fracslow::noise
