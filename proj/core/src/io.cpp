#include "structopic/io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "structopic/error.hpp"
#include "text.hpp"

namespace structopic::io {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash_file(const std::filesystem::path& path) { return fnv1a(read_text(path)); }

std::string hex64(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed: " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void write_sparse_tsv(const std::filesystem::path& path,
                      const Eigen::SparseMatrix<double, Eigen::RowMajor>& m,
                      std::string_view header) {
  std::string out;
  out += "# ";
  out += header;
  out += "\n# shape\t" + std::to_string(m.rows()) + "\t" + std::to_string(m.cols()) + "\n";
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m, r); it; ++it) {
      out += std::to_string(it.row());
      out += '\t';
      out += std::to_string(it.col());
      out += '\t';
      out += detail::format_double(it.value());
      out += '\n';
    }
  }
  write_text(path, out);
}

Eigen::SparseMatrix<double, Eigen::RowMajor> read_sparse_tsv(const std::filesystem::path& path) {
  const auto text = read_text(path);
  Eigen::Index rows = -1;
  Eigen::Index cols = -1;
  std::vector<Eigen::Triplet<double>> triplets;
  std::size_t line_no = 0;
  for (auto line : detail::split(text, '\n')) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto fields = detail::split_fields(line.substr(1));
      if (fields.size() == 3 && fields[0] == "shape") {
        if (!detail::parse_int(fields[1], rows) || !detail::parse_int(fields[2], cols)) {
          throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad shape line");
        }
      }
      continue;
    }
    const auto fields = detail::split_fields(line);
    Eigen::Index r = 0;
    Eigen::Index c = 0;
    double v = 0.0;
    if (fields.size() != 3 || !detail::parse_int(fields[0], r) || !detail::parse_int(fields[1], c) ||
        !detail::parse_double(fields[2], v)) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected row<TAB>col<TAB>value");
    }
    triplets.emplace_back(r, c, v);
  }
  if (rows < 0 || cols < 0) throw ParseError(path.string() + ": missing '# shape' line");
  Eigen::SparseMatrix<double, Eigen::RowMajor> m(rows, cols);
  for (const auto& t : triplets) {
    if (t.row() < 0 || t.row() >= rows || t.col() < 0 || t.col() >= cols) {
      throw DimensionError(path.string() + ": entry (" + std::to_string(t.row()) + ", " +
                           std::to_string(t.col()) + ") outside declared shape");
    }
  }
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

void write_dense_tsv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                     std::string_view header, std::span<const std::int64_t> row_ids) {
  if (!row_ids.empty() && static_cast<Eigen::Index>(row_ids.size()) != m.rows()) {
    throw DimensionError("row id count does not match matrix rows for " + path.string());
  }
  std::string out;
  out += "# ";
  out += header;
  out += '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!row_ids.empty()) {
      out += std::to_string(row_ids[static_cast<std::size_t>(i)]);
      out += '\t';
    }
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += '\t';
      out += detail::format_double(m(i, j));
    }
    out += '\n';
  }
  write_text(path, out);
}

Eigen::MatrixXd read_dense_tsv(const std::filesystem::path& path, bool has_row_ids) {
  const auto text = read_text(path);
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  for (auto line : detail::split(text, '\n')) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto fields = detail::split(line, '\t');
    if (has_row_ids) fields.erase(fields.begin());
    std::vector<double> row;
    for (auto f : fields) {
      double v = 0.0;
      if (!detail::parse_double(detail::trim(f), v)) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": non-numeric value '" +
                         std::string(f) + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DimensionError(path.string() + ":" + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  const auto cols = rows.empty() ? 0 : rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

}  // namespace structopic::io
