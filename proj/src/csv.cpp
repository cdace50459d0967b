#include "swmrac/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace swmrac {

namespace {

void put(std::ostream& out, long double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17Lg", v);
  out << ',' << buf;
}

}  // namespace

std::vector<std::string> csv_header(const Dims& d) {
  std::vector<std::string> h{"t"};
  for (std::size_t i = 1; i <= d.n; ++i) h.push_back("x_" + std::to_string(i));
  for (std::size_t i = 1; i <= d.n; ++i) h.push_back("xref_" + std::to_string(i));
  for (std::size_t i = 1; i <= d.m; ++i) h.push_back("u_" + std::to_string(i));
  for (std::size_t i = 1; i <= d.theta_rows(); ++i)
    for (std::size_t j = 1; j <= d.m; ++j)
      h.push_back("that_" + std::to_string(i) + "_" + std::to_string(j));
  for (const char* c : {"Omega", "Delta", "eps_norm", "eref_norm", "thetatilde_norm", "xi_norm",
                        "seg", "ihat", "reset_flag"})
    h.emplace_back(c);
  return h;
}

void write_csv(std::ostream& out, const TelemetryTable& tab, std::size_t decimation) {
  if (decimation == 0) throw DomainError("write_csv: decimation must be at least 1");
  const auto header = csv_header(tab.dims());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  char buf[64];
  for (std::size_t k = 0; k < tab.size(); k += decimation) {
    std::snprintf(buf, sizeof buf, "%.17g", tab.t(k));
    out << buf;
    for (double v : tab.x(k)) put(out, v);
    for (double v : tab.x_ref(k)) put(out, v);
    for (double v : tab.u(k)) put(out, v);
    for (double v : tab.theta_hat(k)) put(out, v);
    const long double lo = tab.log_Omega(k);
    put(out, std::isfinite(lo) ? std::exp(lo) : 0.0L);
    put(out, tab.Delta(k));
    put(out, tab.eps_norm(k));
    put(out, tab.eref_norm(k));
    put(out, tab.thetatilde_norm(k));
    put(out, tab.xi_norm(k));
    out << ',' << tab.seg(k) << ',' << tab.ihat(k) << ',' << (tab.reset_flag(k) ? 1 : 0) << '\n';
  }
}

void write_csv_file(const std::filesystem::path& file, const TelemetryTable& tab,
                    std::size_t decimation) {
  std::filesystem::path tmp = file;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    write_csv(out, tab, decimation);
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

std::size_t CsvData::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw DomainError("csv: no column \"" + name + "\"");
}

CsvData read_csv(std::istream& in) {
  CsvData data;
  std::string line;
  if (!std::getline(in, line)) throw DomainError("csv: empty input");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) data.header.push_back(cell);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<real> row;
    row.reserve(data.header.size());
    const char* p = line.c_str();
    while (true) {
      char* end = nullptr;
      row.push_back(std::strtold(p, &end));
      if (end == p) throw DomainError("csv: bad number on line " + std::to_string(lineno));
      if (*end == '\0') break;
      if (*end != ',') throw DomainError("csv: bad separator on line " + std::to_string(lineno));
      p = end + 1;
    }
    if (row.size() != data.header.size())
      throw DomainError("csv: line " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                        " fields, header has " + std::to_string(data.header.size()));
    data.rows.push_back(std::move(row));
  }
  return data;
}

}  // namespace swmrac
