#include "xfermse/matrix_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

#include "xfermse/errors.hpp"

namespace xfermse::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_double(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

template <typename T>
void put_le(std::ostream& out, T value) {
  auto raw = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  out.write(reinterpret_cast<const char*>(raw.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> raw{};
  if (!in.read(reinterpret_cast<char*>(raw.data()), sizeof(T))) {
    throw FormatError("xmat: truncated file");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  return std::bit_cast<T>(raw);
}

}  // namespace

Matrix read_csv(std::istream& in, HeaderMode header) {
  std::vector<double> data;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool first_content = true;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto cells = split_cells(view);

    if (first_content) {
      first_content = false;
      bool skip = header == HeaderMode::Present;
      if (header == HeaderMode::Auto) {
        double ignored = 0.0;
        for (auto c : cells) skip = skip || !parse_double(c, ignored);
      }
      cols = cells.size();
      if (skip) continue;
    }

    if (cells.size() != cols) {
      throw FormatError("csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(cols) + " columns, found " + std::to_string(cells.size()));
    }
    for (auto c : cells) {
      double v = 0.0;
      if (!parse_double(c, v)) {
        throw FormatError("csv line " + std::to_string(line_no) + ": '" + std::string(c) +
                          "' is not a number");
      }
      if (!std::isfinite(v)) {
        throw FormatError("csv line " + std::to_string(line_no) + ": non-finite value");
      }
      data.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw FormatError("csv: no data rows");
  return Matrix(rows, cols, std::move(data));
}

void write_csv(std::ostream& out, const Matrix& m) {
  char buf[64];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out.put(',');
      const auto res = std::to_chars(buf, buf + sizeof(buf), row[c], std::chars_format::general, 17);
      out.write(buf, res.ptr - buf);
    }
    out.put('\n');
  }
}

Matrix read_xmat(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kXmatMagic, 4) != 0) {
    throw FormatError("xmat: bad magic");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kXmatVersion) throw FormatError("xmat: unsupported version " + std::to_string(version));
  const auto rows = get_le<std::uint64_t>(in);
  const auto cols = get_le<std::uint64_t>(in);
  if (cols != 0 && rows > (std::uint64_t{1} << 40) / cols) throw FormatError("xmat: implausible shape");
  std::vector<double> data(rows * cols);
  for (double& v : data) {
    v = get_le<double>(in);
    if (!std::isfinite(v)) throw FormatError("xmat: non-finite value");
  }
  return Matrix(rows, cols, std::move(data));
}

void write_xmat(std::ostream& out, const Matrix& m) {
  out.write(kXmatMagic, 4);
  put_le<std::uint32_t>(out, kXmatVersion);
  put_le<std::uint64_t>(out, m.rows());
  put_le<std::uint64_t>(out, m.cols());
  for (double v : m.data()) put_le<double>(out, v);
}

Matrix read_matrix(const std::filesystem::path& path, HeaderMode header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  char magic[4] = {};
  in.read(magic, 4);
  const bool is_xmat = in.gcount() == 4 && std::memcmp(magic, kXmatMagic, 4) == 0;
  in.clear();
  in.seekg(0);
  return is_xmat ? read_xmat(in) : read_csv(in, header);
}

MatrixFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".xmat" ? MatrixFormat::Xmat : MatrixFormat::Csv;
}

void write_matrix(const std::filesystem::path& path, const Matrix& m, MatrixFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  if (format == MatrixFormat::Xmat) {
    write_xmat(out, m);
  } else {
    write_csv(out, m);
  }
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

}  // namespace xfermse::io
