#pragma once

#include "ltlshape/config.hpp"
#include "ltlshape/dfa.hpp"
#include "ltlshape/env.hpp"
#include "ltlshape/formula.hpp"
#include "ltlshape/task_metrics.hpp"

#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace testsupport {

inline std::string data_path(const std::string& name) { return std::string(LTLSHAPE_DATA_DIR) + "/" + name; }
inline std::string config_path(const std::string& name) { return std::string(LTLSHAPE_CONFIG_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Hand-built automaton for "avoid y until both o and b", states q0..q4
/// with q3 the hazard trap and q4 accepting.
inline ltlshape::Dfa fixture_dfa() { return ltlshape::dfa_from_json(slurp(data_path("fixture_dfa.json"))); }

inline std::shared_ptr<const ltlshape::TaskModel> fixture_task() {
  return std::make_shared<const ltlshape::TaskModel>(fixture_dfa());
}

inline constexpr const char* kExampleFormula = "(!y) U ((o & ((!y) U b)) | (b & ((!y) U o)))";

inline ltlshape::PropositionSet example_ap() { return ltlshape::PropositionSet({"o", "b", "y"}); }

inline ltlshape::GridMap example_map() { return ltlshape::GridMap::load(data_path("example3.map")); }

inline ltlshape::FlagGrid example_grid(double noise = 0.0) { return ltlshape::FlagGrid(example_map(), noise, 25); }

} // namespace testsupport
