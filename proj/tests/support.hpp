#pragma once

// Independent reference implementations and generators shared by the tests.
// Nothing here calls the solver, fill or DTW code under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hrc/job.hpp"
#include "hrc/sim.hpp"

namespace hrc::testing {

inline std::string data_path(const std::string& name) {
  return std::string(HRC_TEST_DATA_DIR) + "/" + name;
}

inline JobSpec assembly_job() { return load_job_file(data_path("assembly11.job")); }

// Uniform in (0, 1].
inline double unit_open_left(std::mt19937_64& rng) {
  return 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

struct RandomJobOptions {
  int min_tasks = 1;
  int max_tasks = 12;
  double inexecutable_probability = 0.0;  // per task, one agent loses the task
  double preparatory_probability = 0.0;
};

inline JobSpec random_job(std::mt19937_64& rng, const RandomJobOptions& options = {}) {
  const int n = std::uniform_int_distribution<int>(options.min_tasks, options.max_tasks)(rng);
  std::bernoulli_distribution lose(options.inexecutable_probability);
  std::bernoulli_distribution prep(options.preparatory_probability);
  std::bernoulli_distribution coin(0.5);
  std::vector<TaskSpec> tasks;
  for (int i = 1; i <= n; ++i) {
    TaskSpec t;
    t.id = i;
    t.label = "t" + std::to_string(i);
    t.robot_weight = unit_open_left(rng);
    t.robot_duration = unit_open_left(rng);
    t.human_weight = unit_open_left(rng);
    t.human_duration = unit_open_left(rng);
    if (lose(rng)) (coin(rng) ? t.robot_executable : t.human_executable) = false;
    t.preparatory = prep(rng);
    tasks.push_back(t);
  }
  return JobSpec("random", tasks);
}

// --- assignment -----------------------------------------------------------

struct BruteAssignment {
  std::vector<bool> human;  // per task, in id order
  double objective = 0.0;
  double cycle_time = 0.0;
};

// Plain-loop evaluation of every 2^N split. Ties within 1e-9 go to the
// split that hands the human the first differing task.
inline BruteAssignment brute_force_assignment(const JobSpec& job) {
  const std::size_t n = job.size();
  BruteAssignment best;
  bool have = false;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<bool> human(n);
    double weights = 0.0, load_h = 0.0, load_r = 0.0;
    bool feasible = true;
    for (std::size_t i = 0; i < n; ++i) {
      const TaskSpec& t = job.tasks()[i];
      human[i] = (mask >> i) & 1U;
      if (human[i]) {
        feasible = feasible && t.human_executable;
        weights += t.human_weight;
        load_h += t.human_duration;
      } else {
        feasible = feasible && t.robot_executable;
        weights += t.robot_weight;
        load_r += t.robot_duration;
      }
    }
    if (!feasible) continue;
    const double c = std::max(load_h, load_r);
    const double objective = weights + c;
    bool take = !have || objective < best.objective - 1e-9;
    if (!take && objective <= best.objective + 1e-9) {
      const auto diff = std::mismatch(human.begin(), human.end(), best.human.begin());
      take = diff.first != human.end() && *diff.first;
    }
    if (take) {
      best = {human, objective, c};
      have = true;
    }
  }
  return best;
}

// --- knapsack fill --------------------------------------------------------

struct BruteFill {
  std::vector<TaskId> ids;  // ascending
  double value = -1.0;
};

// Every subset; totals summed in ascending id order. Larger total wins
// beyond 1e-9, otherwise the lexicographically smaller id sequence.
inline BruteFill brute_force_fill(const std::vector<TaskId>& candidates,
                                  const std::vector<double>& durations, double budget) {
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return candidates[a] < candidates[b]; });
  BruteFill best;
  if (budget <= 0.0 || candidates.empty()) return {{}, 0.0};
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << order.size()); ++mask) {
    std::vector<TaskId> ids;
    double total = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if ((mask >> k) & 1U) {
        ids.push_back(candidates[order[k]]);
        total += durations[order[k]];
      }
    }
    if (total > budget + 1e-9) continue;
    if (total > best.value + 1e-9 ||
        (total >= best.value - 1e-9 && std::lexicographical_compare(ids.begin(), ids.end(),
                                                                     best.ids.begin(),
                                                                     best.ids.end()))) {
      best = {ids, total};
    }
  }
  return best;
}

// --- dynamic time warping -------------------------------------------------

using Series = std::vector<std::vector<double>>;  // samples x dimension

inline double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

// Full cumulative-cost table: table[i][j] aligns input[0..i] with
// reference[0..j] under the symmetric step pattern.
inline std::vector<std::vector<double>> dtw_table(const Series& input, const Series& reference) {
  const std::size_t n = input.size(), m = reference.size();
  std::vector<std::vector<double>> table(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double cost = euclidean(input[i], reference[j]);
      if (i == 0 && j == 0) {
        table[i][j] = cost;
      } else if (i == 0) {
        table[i][j] = cost + table[i][j - 1];
      } else if (j == 0) {
        table[i][j] = cost + table[i - 1][j];
      } else {
        table[i][j] = cost + std::min({table[i - 1][j - 1], table[i - 1][j], table[i][j - 1]});
      }
    }
  }
  return table;
}

// Completion fraction read off the last table row: the cheapest reference
// endpoint, later index on ties, as a fraction of the reference length.
inline double table_completion(const std::vector<double>& last_row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < last_row.size(); ++j) {
    if (last_row[j] <= last_row[best]) best = j;
  }
  return double(best + 1) / double(last_row.size());
}

inline Series random_series(std::mt19937_64& rng, std::size_t length, std::size_t dim) {
  std::normal_distribution<double> step(0.0, 0.3);
  Series s(length, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < length; ++i) {
    for (std::size_t d = 0; d < dim; ++d) s[i][d] = (i ? s[i - 1][d] : 0.0) + step(rng);
  }
  return s;
}

// --- scenarios ------------------------------------------------------------

// Start of the human's third task in the nominal assembly run at tick 0.01.
inline constexpr double kTask3Start = 0.63;

struct SlowdownParameters {
  double onset = 0.0;
  double factor = 1.0;
  double length = 0.0;
};

// Random slowdown during the screwing task: onset 0.1 to 0.4 after T3
// starts, factor 0.5 to 0.9, lasting 0.1 to 0.4.
inline SlowdownParameters random_slowdown(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> onset(0.1, 0.4), factor(0.5, 0.9), length(0.1, 0.4);
  SlowdownParameters p;
  p.onset = kTask3Start + onset(rng);
  p.factor = factor(rng);
  p.length = length(rng);
  return p;
}

inline ScenarioScript slowdown_script(std::uint64_t seed, const SlowdownParameters& p) {
  ScenarioScript script;
  script.seed = seed;
  script.events.push_back(ScenarioEvent::speed(p.onset, p.factor));
  script.events.push_back(ScenarioEvent::speed(p.onset + p.length, 1.0));
  return script;
}

// Speed changes, robot failures, confirmations and operator or robot
// messages about arbitrary job tasks, at random times.
inline ScenarioScript random_storm(std::mt19937_64& rng, const JobSpec& job, double horizon) {
  ScenarioScript script;
  script.seed = rng();
  const int count = std::uniform_int_distribution<int>(0, 40)(rng);
  std::uniform_real_distribution<double> when(0.0, horizon), speed(0.2, 2.0);
  std::uniform_int_distribution<TaskId> task(1, static_cast<TaskId>(job.size()));
  std::uniform_int_distribution<int> kind(0, 6);
  std::vector<double> times(static_cast<std::size_t>(count));
  for (double& t : times) t = when(rng);
  // Bursts: some events share a timestamp.
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::bernoulli_distribution(0.2)(rng)) times[i] = times[i - 1];
  }
  std::sort(times.begin(), times.end());
  for (double at : times) {
    switch (kind(rng)) {
      case 0:
        script.events.push_back(ScenarioEvent::speed(at, speed(rng)));
        break;
      case 1:
        script.events.push_back(ScenarioEvent::robot_failure(at, task(rng)));
        break;
      case 2:
        script.events.push_back(ScenarioEvent::confirm(at, task(rng)));
        break;
      case 3:
        script.events.push_back(ScenarioEvent::operator_message(at, Message::reassign(task(rng))));
        break;
      case 4:
      case 5:
        script.events.push_back(
            ScenarioEvent::operator_message(at, Message::delegate_to_robot(task(rng))));
        break;
      default:
        script.events.push_back(
            ScenarioEvent::operator_message(at, Message::delegate_to_human(task(rng))));
        break;
    }
  }
  return script;
}

}  // namespace hrc::testing
