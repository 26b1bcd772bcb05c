#pragma once

// HOA v1 interop, restricted to the co-safe subset this toolkit produces:
// "Acceptance: 1 Inf(0)" with the single accepting set marked on states.
// Labels use the HOA boolean expression syntax over AP indices.

#include <iosfwd>
#include <string>

#include "mats/nba.hpp"

namespace mats {

Nba import_hoa(std::istream& in);
Nba import_hoa_file(const std::string& path);
void export_hoa(const Nba& nba, std::ostream& out, const std::string& name = "");
std::string export_hoa_string(const Nba& nba, const std::string& name = "");

}  // namespace mats
