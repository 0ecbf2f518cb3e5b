#include "linewidth/scenario_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "linewidth/errors.hpp"

namespace linewidth {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool skip_line(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t.front() == '#';
}

std::vector<double> parse_numbers(const std::string& line, const std::string& source,
                                  std::size_t lineno) {
  std::vector<double> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    double v = 0.0;
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      throw ParseError(source, lineno, "not a number: '" + tok + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return in;
}

}  // namespace

void write_scenario(std::ostream& out, const Scenario& sc) {
  const auto prec = out.precision(std::numeric_limits<double>::max_digits10);
  out << "# linewidth scenario, true mean gamma = " << true_mean_gamma(sc.params) << "\n";
  out << "kind = " << to_string(sc.kind) << "\n";
  out << "M = " << sc.params.size() << "\n";
  out << "seed = " << sc.seed << "\n";
  out << "sigma_epsilon = " << sc.noise.sigma_epsilon << "\n";
  out << "noise_seed = " << sc.noise.seed << "\n";
  out << "grid = " << sc.grid.lo << " " << sc.grid.hi << " " << sc.grid.points << "\n";
  out << "# area location gamma sigma\n";
  const auto& p = sc.params;
  for (std::size_t m = 0; m < p.size(); ++m) {
    out << p.areas[m] << " " << p.locations[m] << " " << p.lorentz_widths[m] << " "
        << p.gauss_widths[m] << "\n";
  }
  out.precision(prec);
}

Scenario read_scenario(std::istream& in, const std::string& source) {
  Scenario sc;
  std::map<std::string, std::pair<std::string, std::size_t>> header;
  std::string line;
  std::size_t lineno = 0;
  std::size_t bands = 0;
  bool have_m = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    const auto eq = line.find('=');
    if (eq != std::string::npos) {
      header[trim(line.substr(0, eq))] = {trim(line.substr(eq + 1)), lineno};
      continue;
    }
    const auto row = parse_numbers(line, source, lineno);
    if (row.size() != 4) throw ParseError(source, lineno, "expected 4 columns");
    sc.params.areas.push_back(row[0]);
    sc.params.locations.push_back(row[1]);
    sc.params.lorentz_widths.push_back(row[2]);
    sc.params.gauss_widths.push_back(row[3]);
  }

  auto number = [&](const std::string& key) -> std::optional<std::vector<double>> {
    auto it = header.find(key);
    if (it == header.end()) return std::nullopt;
    return parse_numbers(it->second.first, source, it->second.second);
  };

  auto kind = header.find("kind");
  if (kind == header.end()) throw ParseError(source, lineno, "missing 'kind'");
  try {
    sc.kind = parse_scenario_kind(kind->second.first);
  } catch (const UsageError& e) {
    throw ParseError(source, kind->second.second, e.what());
  }
  if (auto m = number("M")) {
    bands = static_cast<std::size_t>(m->at(0));
    have_m = true;
  }
  if (auto s = number("seed")) sc.seed = static_cast<std::uint64_t>(s->at(0));
  if (auto s = number("sigma_epsilon")) sc.noise.sigma_epsilon = s->at(0);
  if (auto s = number("noise_seed")) sc.noise.seed = static_cast<std::uint64_t>(s->at(0));
  if (auto g = number("grid")) {
    if (g->size() != 3) throw ParseError(source, header["grid"].second, "grid needs lo hi points");
    sc.grid = {(*g)[0], (*g)[1], static_cast<std::size_t>((*g)[2])};
  }
  if (have_m && bands != sc.params.size()) {
    throw ParseError(source, header["M"].second,
                     "M = " + std::to_string(bands) + " but " +
                         std::to_string(sc.params.size()) + " band rows");
  }
  try {
    sc.params.validate();
  } catch (const DomainError& e) {
    throw ParseError(source, lineno, e.what());
  }
  return sc;
}

void save_scenario(const std::filesystem::path& path, const Scenario& scenario) {
  auto out = open_out(path);
  write_scenario(out, scenario);
  if (!out) throw IoError("failed writing " + path.string());
}

Scenario load_scenario(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_scenario(in, path.string());
}

void write_spectrum(std::ostream& out, const Spectrum& s) {
  const auto prec = out.precision(std::numeric_limits<double>::max_digits10);
  out << "# wavenumber intensity\n";
  for (std::size_t i = 0; i < s.size(); ++i) out << s.grid[i] << " " << s.intensities[i] << "\n";
  out.precision(prec);
}

Spectrum read_spectrum(std::istream& in, const std::string& source) {
  Spectrum s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    // Accept comma separated files as well.
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    const auto row = parse_numbers(line, source, lineno);
    if (row.size() != 2) throw ParseError(source, lineno, "expected 2 columns");
    s.grid.push_back(row[0]);
    s.intensities.push_back(row[1]);
  }
  if (s.size() >= 2 && s.grid.front() > s.grid.back()) {
    std::reverse(s.grid.begin(), s.grid.end());
    std::reverse(s.intensities.begin(), s.intensities.end());
  }
  try {
    s.validate();
  } catch (const DomainError& e) {
    throw ParseError(source, lineno, e.what());
  }
  return s;
}

void save_spectrum(const std::filesystem::path& path, const Spectrum& spectrum) {
  auto out = open_out(path);
  write_spectrum(out, spectrum);
  if (!out) throw IoError("failed writing " + path.string());
}

Spectrum load_spectrum(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_spectrum(in, path.string());
}

}  // namespace linewidth
