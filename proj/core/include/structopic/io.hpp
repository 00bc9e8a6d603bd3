#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace structopic::io {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t hash_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t value);

std::string read_text(const std::filesystem::path& path);
// Writes via a temporary file and rename so readers never see partial output.
void write_text(const std::filesystem::path& path, std::string_view text);

// "row<TAB>col<TAB>value" triplets after a "# <header>" line and a
// "# shape<TAB>rows<TAB>cols" line.
void write_sparse_tsv(const std::filesystem::path& path,
                      const Eigen::SparseMatrix<double, Eigen::RowMajor>& m,
                      std::string_view header);
Eigen::SparseMatrix<double, Eigen::RowMajor> read_sparse_tsv(const std::filesystem::path& path);

// One matrix row per line. With row_ids, each line is prefixed by its id.
void write_dense_tsv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                     std::string_view header, std::span<const std::int64_t> row_ids = {});
Eigen::MatrixXd read_dense_tsv(const std::filesystem::path& path, bool has_row_ids);

}  // namespace structopic::io
