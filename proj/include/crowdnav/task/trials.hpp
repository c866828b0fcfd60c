#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdnav/task/scenario.hpp"

namespace crowdnav::task {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Trial {
  int index = 0;
  std::string scenario_id;
  std::string environment;
};

inline constexpr int kTrialsPerEnvironment = 3;

/// Six trials for one participant: three distinct warehouse scenarios and
/// three distinct lab scenarios in a seeded random order.
/// Throws ConfigError when either environment has fewer than three variants.
std::vector<Trial> make_trial_sequence(const ScenarioCatalog& scenarios, std::uint64_t seed);

}  // namespace crowdnav::task
