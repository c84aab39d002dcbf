#pragma once

#include "smocklab/io.hpp"

#include <string>

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(SMOCKLAB_FIXTURES) + "/" + name + ".json"; }

inline smocklab::SmockingPattern load(const std::string& name) {
  return smocklab::materialize(smocklab::load_pattern(fixture(name)));
}

}  // namespace testing
