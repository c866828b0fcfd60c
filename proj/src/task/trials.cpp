#include "crowdnav/task/trials.hpp"

#include <random>

#include "crowdnav/random.hpp"

namespace crowdnav::task {

namespace {

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_below(rng, i)]);
}

}  // namespace

std::vector<Trial> make_trial_sequence(const ScenarioCatalog& scenarios, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Trial> trials;
  for (const char* env : {"warehouse", "lab"}) {
    auto pool = scenarios.by_environment(env);
    if (pool.size() < kTrialsPerEnvironment)
      throw ConfigError(std::string("need at least 3 ") + env + " scenarios, have " + std::to_string(pool.size()));
    shuffle(pool, rng);
    for (int i = 0; i < kTrialsPerEnvironment; ++i)
      trials.push_back({0, pool[static_cast<std::size_t>(i)]->id, env});
  }
  shuffle(trials, rng);
  for (std::size_t i = 0; i < trials.size(); ++i) trials[i].index = static_cast<int>(i);
  return trials;
}

}  // namespace crowdnav::task
