#include "pcbb/fields_io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace pcbb {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  const auto e = s.find('e');
  if (e != std::string::npos) {
    std::string mant = s.substr(0, e);
    std::string exp = s.substr(e + 1);
    bool negative = false;
    if (!exp.empty() && (exp[0] == '+' || exp[0] == '-')) {
      negative = exp[0] == '-';
      exp.erase(0, 1);
    }
    std::size_t nz = 0;
    while (nz + 1 < exp.size() && exp[nz] == '0') ++nz;
    exp.erase(0, nz);
    s = mant + "e" + (negative ? "-" : "") + exp;
  }
  return s;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  return out;
}

}  // namespace

void write_field_csv(const std::filesystem::path& path, const Grid& grid,
                     std::span<const double> values) {
  if (values.size() != grid.cell_count()) {
    throw std::invalid_argument("write_field_csv: field size does not match grid");
  }
  std::ofstream out = open_out(path);
  const int N = grid.cells_per_axis;
  if (grid.dim == 2) {
    out << "i,j,value\n";
    std::size_t c = 0;
    for (int j = 0; j < N; ++j) {
      for (int i = 0; i < N; ++i, ++c) {
        out << i << ',' << j << ',' << format_double(values[c]) << '\n';
      }
    }
  } else {
    out << "i,j,k,value\n";
    std::size_t c = 0;
    for (int k = 0; k < N; ++k) {
      for (int j = 0; j < N; ++j) {
        for (int i = 0; i < N; ++i, ++c) {
          out << i << ',' << j << ',' << k << ',' << format_double(values[c]) << '\n';
        }
      }
    }
  }
  if (!out) throw std::runtime_error("write_field_csv: write failed: " + path.string());
}

void write_field_vtk(const std::filesystem::path& path, const Grid& grid,
                     std::span<const double> values, const std::string& name) {
  if (values.size() != grid.cell_count()) {
    throw std::invalid_argument("write_field_vtk: field size does not match grid");
  }
  std::ofstream out = open_out(path);
  const int N = grid.cells_per_axis;
  const double h = grid.spacing();
  const int nz = grid.dim == 3 ? N : 1;
  out << "# vtk DataFile Version 3.0\n";
  out << name << " field\n";
  out << "ASCII\n";
  out << "DATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << N << ' ' << N << ' ' << nz << '\n';
  out << "ORIGIN " << format_double(0.5 * h) << ' ' << format_double(0.5 * h) << ' '
      << (grid.dim == 3 ? format_double(0.5 * h) : "0") << '\n';
  out << "SPACING " << format_double(h) << ' ' << format_double(h) << ' '
      << (grid.dim == 3 ? format_double(h) : "1") << '\n';
  out << "POINT_DATA " << values.size() << '\n';
  out << "SCALARS " << name << " double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (std::size_t c = 0; c < values.size(); ++c) {
    out << format_double(values[c]) << '\n';
  }
  if (!out) throw std::runtime_error("write_field_vtk: write failed: " + path.string());
}

}  // namespace pcbb
