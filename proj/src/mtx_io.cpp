#include "mpkrylov/mtx_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace mpk {

namespace {

std::string error_text(std::size_t line, const std::string& what) {
  return line == 0 ? what : "line " + std::to_string(line) + ": " + what;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

bool parse_size(const std::string& tok, std::size_t& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }
  [[nodiscard]] std::size_t number() const noexcept { return number_; }

 private:
  std::istream& in_;
  std::size_t number_ = 0;
};

// Data lines, skipping comments. Blank lines are rejected once data has started.
bool next_data_line(LineReader& reader, std::string& line, bool data_started) {
  while (reader.next(line)) {
    if (!line.empty() && line[0] == '%') continue;
    if (is_blank(line)) {
      if (data_started) return true;  // caller decides whether this is an error
      continue;
    }
    return true;
  }
  return false;
}

MPScalar parse_value(const std::string& tok, Precision prec, std::size_t line) {
  try {
    MPScalar v = MPScalar::from_string(tok, prec);
    if (!v.is_finite()) throw std::invalid_argument("non-finite");
    return v;
  } catch (const std::invalid_argument&) {
    throw MtxParseError(MtxErrorKind::BadEntry, line, "invalid numeric value '" + tok + "'");
  }
}

}  // namespace

MtxParseError::MtxParseError(MtxErrorKind kind, std::size_t line, const std::string& what)
    : std::runtime_error(error_text(line, what)), kind_(kind), line_(line) {}

MtxHeader parse_mtx_banner(const std::string& line) {
  const auto tok = split_ws(line);
  if (tok.empty() || tok[0] != "%%MatrixMarket") {
    throw MtxParseError(MtxErrorKind::MalformedBanner, 1, "missing %%MatrixMarket banner");
  }
  if (tok.size() != 5) {
    throw MtxParseError(MtxErrorKind::MalformedBanner, 1, "banner must have object, format, field, symmetry");
  }
  if (lower(tok[1]) != "matrix") {
    throw MtxParseError(MtxErrorKind::Unsupported, 1, "unsupported object '" + tok[1] + "'");
  }

  MtxHeader h;
  const std::string format = lower(tok[2]);
  if (format == "coordinate") {
    h.format = MtxFormat::Coordinate;
  } else if (format == "array") {
    h.format = MtxFormat::Array;
  } else {
    throw MtxParseError(MtxErrorKind::MalformedBanner, 1, "unknown format '" + tok[2] + "'");
  }

  const std::string field = lower(tok[3]);
  if (field == "real" || field == "double") {
    h.field = MtxField::Real;
  } else if (field == "integer") {
    h.field = MtxField::Integer;
  } else if (field == "pattern") {
    h.field = MtxField::Pattern;
  } else if (field == "complex") {
    throw MtxParseError(MtxErrorKind::Unsupported, 1, "complex matrices are not supported");
  } else {
    throw MtxParseError(MtxErrorKind::MalformedBanner, 1, "unknown field '" + tok[3] + "'");
  }

  const std::string sym = lower(tok[4]);
  if (sym == "general") {
    h.symmetry = MtxSymmetry::General;
  } else if (sym == "symmetric") {
    h.symmetry = MtxSymmetry::Symmetric;
  } else if (sym == "skew-symmetric") {
    h.symmetry = MtxSymmetry::SkewSymmetric;
  } else if (sym == "hermitian") {
    throw MtxParseError(MtxErrorKind::Unsupported, 1, "hermitian matrices are not supported");
  } else {
    throw MtxParseError(MtxErrorKind::MalformedBanner, 1, "unknown symmetry '" + tok[4] + "'");
  }

  if (h.format == MtxFormat::Array && h.field == MtxField::Pattern) {
    throw MtxParseError(MtxErrorKind::Unsupported, 1, "pattern field requires coordinate format");
  }
  return h;
}

CsrMatrix read_mtx(std::istream& in, Precision prec) {
  LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw MtxParseError(MtxErrorKind::MalformedBanner, 1, "empty input");
  const MtxHeader header = parse_mtx_banner(line);

  if (!next_data_line(reader, line, false)) {
    throw MtxParseError(MtxErrorKind::BadSizeLine, reader.number(), "missing size line");
  }
  const auto size_tok = split_ws(line);
  const std::size_t expected_tokens = header.format == MtxFormat::Coordinate ? 3 : 2;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t declared = 0;
  if (size_tok.size() != expected_tokens || !parse_size(size_tok[0], rows) ||
      !parse_size(size_tok[1], cols) ||
      (expected_tokens == 3 && !parse_size(size_tok[2], declared)) || rows == 0 || cols == 0) {
    throw MtxParseError(MtxErrorKind::BadSizeLine, reader.number(), "malformed size line '" + line + "'");
  }
  if (header.symmetry != MtxSymmetry::General && rows != cols) {
    throw MtxParseError(MtxErrorKind::BadSizeLine, reader.number(), "symmetric storage requires a square matrix");
  }

  const bool skew = header.symmetry == MtxSymmetry::SkewSymmetric;
  const bool mirrored = header.symmetry != MtxSymmetry::General;
  std::vector<Triplet> entries;

  auto add_entry = [&](std::size_t i, std::size_t j, MPScalar v, std::size_t lineno) {
    if (skew && i == j) {
      if (!v.is_zero()) throw MtxParseError(MtxErrorKind::BadEntry, lineno, "nonzero diagonal in skew-symmetric matrix");
      return;
    }
    if (mirrored && i != j) entries.push_back({j, i, skew ? -v : v});
    entries.push_back({i, j, std::move(v)});
  };

  if (header.format == MtxFormat::Coordinate) {
    const std::size_t value_tokens = header.field == MtxField::Pattern ? 2 : 3;
    entries.reserve(mirrored ? 2 * declared : declared);
    for (std::size_t e = 0; e < declared; ++e) {
      if (!next_data_line(reader, line, true)) {
        throw MtxParseError(MtxErrorKind::EntryCountMismatch, reader.number(),
                            "expected " + std::to_string(declared) + " entries, found " + std::to_string(e));
      }
      if (is_blank(line)) throw MtxParseError(MtxErrorKind::BadEntry, reader.number(), "blank line inside data");
      const auto tok = split_ws(line);
      std::size_t i = 0;
      std::size_t j = 0;
      if (tok.size() != value_tokens || !parse_size(tok[0], i) || !parse_size(tok[1], j)) {
        throw MtxParseError(MtxErrorKind::BadEntry, reader.number(), "malformed entry '" + line + "'");
      }
      if (i < 1 || i > rows || j < 1 || j > cols) {
        throw MtxParseError(MtxErrorKind::IndexOutOfBounds, reader.number(),
                            "index (" + tok[0] + ", " + tok[1] + ") outside " + std::to_string(rows) +
                                " x " + std::to_string(cols));
      }
      MPScalar v = header.field == MtxField::Pattern ? MPScalar(prec, 1) : parse_value(tok[2], prec, reader.number());
      add_entry(i - 1, j - 1, std::move(v), reader.number());
    }
  } else {
    // Column-major; symmetric storage lists the lower triangle only.
    std::size_t listed = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t first_row = header.symmetry == MtxSymmetry::General ? 0 : (skew ? j + 1 : j);
      for (std::size_t i = first_row; i < rows; ++i) {
        if (!next_data_line(reader, line, true)) {
          throw MtxParseError(MtxErrorKind::EntryCountMismatch, reader.number(),
                              "array data ended after " + std::to_string(listed) + " values");
        }
        if (is_blank(line)) throw MtxParseError(MtxErrorKind::BadEntry, reader.number(), "blank line inside data");
        const auto tok = split_ws(line);
        if (tok.size() != 1) throw MtxParseError(MtxErrorKind::BadEntry, reader.number(), "expected one value per line");
        add_entry(i, j, parse_value(tok[0], prec, reader.number()), reader.number());
        ++listed;
      }
    }
  }

  while (reader.next(line)) {
    if (is_blank(line) || line[0] == '%') continue;
    throw MtxParseError(MtxErrorKind::EntryCountMismatch, reader.number(), "more entries than declared");
  }

  return CsrMatrix::from_triplets(rows, cols, prec, std::move(entries));
}

CsrMatrix read_mtx_file(const std::filesystem::path& path, Precision prec) {
  std::ifstream in(path);
  if (!in) throw MtxParseError(MtxErrorKind::Io, 0, "cannot open '" + path.string() + "'");
  return read_mtx(in, prec);
}

void write_mtx(std::ostream& out, const CsrMatrix& a, int digits) {
  if (digits < 17) throw ContractViolation("write_mtx: digits must be at least 17");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      out << (i + 1) << ' ' << (ci[k] + 1) << ' ' << v[k].to_string(digits) << '\n';
    }
  }
}

void write_mtx_file(const std::filesystem::path& path, const CsrMatrix& a, int digits) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MtxParseError(MtxErrorKind::Io, 0, "cannot write '" + path.string() + "'");
  write_mtx(out, a, digits);
  if (!out) throw MtxParseError(MtxErrorKind::Io, 0, "write failed for '" + path.string() + "'");
}

}  // namespace mpk
