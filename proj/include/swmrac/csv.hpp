#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "swmrac/engine.hpp"

namespace swmrac {

// Column order: t, x_1..x_n, xref_1..xref_n, u_1..u_m,
// that_<row>_<col> for theta_hat in row-major order, Omega, Delta, eps_norm,
// eref_norm, thetatilde_norm, xi_norm, seg, ihat, reset_flag.
std::vector<std::string> csv_header(const Dims& d);

// Every `decimation`-th row, 17 significant digits, LF line ends. Omega is
// written from log(Omega) in extended precision, so values below the double
// range survive.
void write_csv(std::ostream& out, const TelemetryTable& tab, std::size_t decimation = 1);

// Writes to a sibling temporary file and renames it into place.
void write_csv_file(const std::filesystem::path& file, const TelemetryTable& tab,
                    std::size_t decimation = 1);

struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<real>> rows;

  std::size_t column(const std::string& name) const;  // throws DomainError when absent
};

CsvData read_csv(std::istream& in);

}  // namespace swmrac
