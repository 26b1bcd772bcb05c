#pragma once

// Locating the shipped scenario/formula fixtures.  The build bakes in the
// source-tree path; MATS_FIXTURE_DIR overrides it at runtime.

#include <string>

namespace mats::fixtures {

std::string dir();
std::string path(const std::string& name);
std::string slurp(const std::string& name);  // whole file as a string
bool exists(const std::string& name);

}  // namespace mats::fixtures
