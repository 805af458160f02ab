#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "sensing/errors.hpp"
#include "sensing/measures.hpp"

namespace sensing {
namespace {

constexpr const char* kHeader = "# spectral-measure v1";

// Shortest representation that round-trips exactly.
std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse(const std::string& tok, int line) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw InvalidParameter("measure file line " + std::to_string(line) + ": bad number '" + tok + "'");
  return v;
}

}  // namespace

void write_measure(std::ostream& os, const SpectralMeasure& mu) {
  os << kHeader << '\n';
  for (const Atom& a : mu.atoms()) os << "atom " << fmt(a.location) << ' ' << fmt(a.mass) << '\n';
  const auto& x = mu.grid();
  const auto& f = mu.density();
  for (std::size_t i = 0; i < x.size(); ++i) os << fmt(x[i]) << ' ' << fmt(f[i]) << '\n';
}

SpectralMeasure read_measure(std::istream& is) {
  std::string line;
  int lineno = 1;
  if (!std::getline(is, line) || line != kHeader)
    throw InvalidParameter("measure file: missing '# spectral-measure v1' header");
  std::vector<double> grid, density;
  std::vector<Atom> atoms;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!(ls >> a)) continue;
    if (a == "atom") {
      if (!(ls >> b >> c)) throw InvalidParameter("measure file line " + std::to_string(lineno) + ": incomplete atom");
      atoms.push_back({parse(b, lineno), parse(c, lineno)});
    } else {
      if (!(ls >> b)) throw InvalidParameter("measure file line " + std::to_string(lineno) + ": expected 'x density'");
      grid.push_back(parse(a, lineno));
      density.push_back(parse(b, lineno));
    }
    if (ls >> c) throw InvalidParameter("measure file line " + std::to_string(lineno) + ": trailing tokens");
  }
  return SpectralMeasure(std::move(grid), std::move(density), std::move(atoms));
}

void save_measure(const std::string& path, const SpectralMeasure& mu) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidParameter("cannot open '" + path + "' for writing");
  write_measure(os, mu);
  if (!os) throw NumericError("failed writing '" + path + "'");
}

SpectralMeasure load_measure(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidParameter("cannot open measure file '" + path + "'");
  return read_measure(is);
}

}  // namespace sensing
