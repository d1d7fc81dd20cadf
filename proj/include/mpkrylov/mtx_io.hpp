#pragma once

// Matrix Market reader/writer. Values go from decimal text straight to the
// target precision with a single rounding.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "mpkrylov/matrices.hpp"

namespace mpk {

enum class MtxFormat { Coordinate, Array };
enum class MtxField { Real, Integer, Pattern };
enum class MtxSymmetry { General, Symmetric, SkewSymmetric };

struct MtxHeader {
  MtxFormat format = MtxFormat::Coordinate;
  MtxField field = MtxField::Real;
  MtxSymmetry symmetry = MtxSymmetry::General;
};

enum class MtxErrorKind {
  MalformedBanner,
  Unsupported,
  BadSizeLine,
  BadEntry,
  IndexOutOfBounds,
  EntryCountMismatch,
  Io,
};

class MtxParseError : public std::runtime_error {
 public:
  MtxParseError(MtxErrorKind kind, std::size_t line, const std::string& what);

  [[nodiscard]] MtxErrorKind kind() const noexcept { return kind_; }
  /// 1-based line number, 0 when not tied to a line.
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  MtxErrorKind kind_;
  std::size_t line_;
};

/// Parses the "%%MatrixMarket ..." banner line.
MtxHeader parse_mtx_banner(const std::string& line);

/// Symmetric and skew-symmetric storage is expanded to both triangles,
/// pattern entries become 1, duplicates are summed and exact zeros dropped.
CsrMatrix read_mtx(std::istream& in, Precision prec);
CsrMatrix read_mtx_file(const std::filesystem::path& path, Precision prec);

/// General coordinate file, values in scientific notation with `digits`
/// significant digits (≥ 17). Lossless only for binary64-representable values.
void write_mtx(std::ostream& out, const CsrMatrix& a, int digits);
void write_mtx_file(const std::filesystem::path& path, const CsrMatrix& a, int digits);

}  // namespace mpk
