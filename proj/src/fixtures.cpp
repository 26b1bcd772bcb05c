#include "mats/fixtures.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mats/errors.hpp"

#ifndef MATS_FIXTURE_DIR
#define MATS_FIXTURE_DIR "fixtures"
#endif

namespace mats::fixtures {

std::string dir() {
    if (const char* env = std::getenv("MATS_FIXTURE_DIR")) return env;
    return MATS_FIXTURE_DIR;
}

std::string path(const std::string& name) { return dir() + "/" + name; }

std::string slurp(const std::string& name) {
    std::ifstream in(path(name));
    if (!in) throw Error(ErrorCode::Generic, "cannot open fixture " + path(name));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool exists(const std::string& name) { return std::ifstream(path(name)).good(); }

}  // namespace mats::fixtures
