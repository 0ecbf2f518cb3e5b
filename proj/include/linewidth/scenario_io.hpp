#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "linewidth/lineshape.hpp"

namespace linewidth {

// Scenario files are line oriented. A header of `key = value` lines (kind, M,
// seed, sigma_epsilon, noise_seed, grid) is followed by M rows of
// "area location gamma sigma". Lines starting with '#' are comments.
void write_scenario(std::ostream& out, const Scenario& scenario);
Scenario read_scenario(std::istream& in, const std::string& source = "<stream>");

void save_scenario(const std::filesystem::path& path, const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path);

// Spectrum files hold two numeric columns (wavenumber, intensity).
void write_spectrum(std::ostream& out, const Spectrum& spectrum);
Spectrum read_spectrum(std::istream& in, const std::string& source = "<stream>");

void save_spectrum(const std::filesystem::path& path, const Spectrum& spectrum);
Spectrum load_spectrum(const std::filesystem::path& path);

}  // namespace linewidth
