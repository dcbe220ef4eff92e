#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "xfermse/numkit.hpp"

namespace xfermse::io {

using numkit::Matrix;

enum class MatrixFormat { Csv, Xmat };

enum class HeaderMode {
  Auto,     // first row is a header iff any of its cells is non-numeric
  Present,  // always skip the first row
  Absent,   // every row is data
};

// Binary layout, all little-endian, row-major:
//   "XMAT" | version u32 | rows u64 | cols u64 | rows*cols IEEE-754 f64
inline constexpr char kXmatMagic[4] = {'X', 'M', 'A', 'T'};
inline constexpr std::uint32_t kXmatVersion = 1;

Matrix read_csv(std::istream& in, HeaderMode header = HeaderMode::Auto);
/// Every value written with 17 significant digits, so reading back is exact.
void write_csv(std::ostream& out, const Matrix& m);

Matrix read_xmat(std::istream& in);
void write_xmat(std::ostream& out, const Matrix& m);

/// Detects the format from the first four bytes.
Matrix read_matrix(const std::filesystem::path& path, HeaderMode header = HeaderMode::Auto);
void write_matrix(const std::filesystem::path& path, const Matrix& m, MatrixFormat format);

/// Format implied by a file name: ".xmat" is binary, anything else CSV.
MatrixFormat format_for(const std::filesystem::path& path);

}  // namespace xfermse::io
