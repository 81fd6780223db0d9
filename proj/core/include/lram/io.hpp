#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lram/grid.hpp"
#include "lram/topopt.hpp"

namespace lram::io {

std::string read_file(const std::filesystem::path& path);
// Creates parent directories; throws InvalidArgument if the file cannot be written.
void write_file(const std::filesystem::path& path, std::string_view content);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

// Dense nodal grid, row j = 0 first, one row of nx+1 values per line.
std::string format_phi(const StructuredGrid& grid, const Vec& phi);
// Throws MeshIncompatibility when the shape does not match the grid.
Vec parse_phi(const StructuredGrid& grid, const std::string& text);

// iter,Pi,f,g,lambda_star1,lambda1,vol_frac_dense,vol_frac_soft
std::string iteration_log_csv(const std::vector<IterationRecord>& history);

// Round-trip text for doubles.
std::string fmt(double v);

}  // namespace lram::io
