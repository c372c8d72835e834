#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "pcbb/heat_fvm.hpp"

namespace pcbb {

// Shortest round-trip decimal representation, locale independent; exponents
// are rendered without '+' or leading zeros (1e+30 -> 1e30).
std::string format_double(double v);

// Structured-grid text dump: header i,j[,k],value, one cell per row.
void write_field_csv(const std::filesystem::path& path, const Grid& grid,
                     std::span<const double> values);

// Legacy VTK structured-points file with the cell-centered field as point data.
void write_field_vtk(const std::filesystem::path& path, const Grid& grid,
                     std::span<const double> values, const std::string& name);

}  // namespace pcbb
