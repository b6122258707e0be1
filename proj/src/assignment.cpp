#include "hrc/assignment.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "hrc/errors.hpp"

namespace hrc {

bool human_first_preferred(const AssignmentVector& a, const AssignmentVector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return a(i);
  }
  return false;
}

namespace {

void check_executable(const JobSpec& job, const AssignmentVector& human) {
  for (const TaskSpec& t : job.tasks()) {
    const bool to_human = human(t.id - 1);
    if (to_human ? !t.human_executable : !t.robot_executable) {
      throw ValidationError("optimum assigns task " + std::to_string(t.id) + " to the " +
                            (to_human ? "human" : "robot") + ", which cannot execute it");
    }
  }
}

// Keeps the incumbent under the objective-then-human-first ordering.
struct Incumbent {
  AssignmentVector human;
  double objective = std::numeric_limits<double>::infinity();

  void offer(const AssignmentVector& candidate, double value) {
    if (value < objective - kObjectiveTolerance ||
        (value <= objective + kObjectiveTolerance && human_first_preferred(candidate, human))) {
      human = candidate;
      objective = value;
    }
  }
};

class BranchAndBound {
 public:
  explicit BranchAndBound(const JobSpec& job)
      : model_(job), n_(model_.size()), current_(AssignmentVector::Constant(n_, false)) {
    // Suffix sums of the cheaper weight and the shorter duration bound the
    // unassigned tail from below.
    min_weight_tail_.assign(static_cast<std::size_t>(n_ + 1), 0.0);
    min_duration_tail_.assign(static_cast<std::size_t>(n_ + 1), 0.0);
    for (Eigen::Index i = n_ - 1; i >= 0; --i) {
      const auto k = static_cast<std::size_t>(i);
      min_weight_tail_[k] = min_weight_tail_[k + 1] +
                            std::min(model_.robot_weight(i), model_.human_weight(i));
      min_duration_tail_[k] = min_duration_tail_[k + 1] +
                              std::min(model_.robot_duration(i), model_.human_duration(i));
    }
  }

  AssignmentVector solve() {
    search(0, 0.0, 0.0, 0.0);
    return best_.human;
  }

 private:
  void search(Eigen::Index depth, double weights, double human_load, double robot_load) {
    const auto k = static_cast<std::size_t>(depth);
    const double cycle_bound =
        std::max({human_load, robot_load,
                  0.5 * (human_load + robot_load + min_duration_tail_[k])});
    const double bound = weights + min_weight_tail_[k] + cycle_bound;
    if (bound > best_.objective + kObjectiveTolerance) return;

    if (depth == n_) {
      best_.offer(current_, model_.objective(current_));
      return;
    }
    // Human branch first: the first leaf found among ties is the preferred one.
    current_(depth) = true;
    search(depth + 1, weights + model_.human_weight(depth),
           human_load + model_.human_duration(depth), robot_load);
    current_(depth) = false;
    search(depth + 1, weights + model_.robot_weight(depth), human_load,
           robot_load + model_.robot_duration(depth));
  }

  AssignmentModel<double> model_;
  Eigen::Index n_;
  AssignmentVector current_;
  std::vector<double> min_weight_tail_, min_duration_tail_;
  Incumbent best_;
};

}  // namespace

AssignmentSolution make_solution(const JobSpec& job, const AssignmentVector& human) {
  const AssignmentModel<double> model(job);
  AssignmentSolution s;
  s.human = human;
  s.robot = !human;
  s.cycle_time = model.cycle_time(human);
  s.objective = model.objective(human);
  std::tie(s.human_list, s.robot_list) = build_nominal_schedules(s);
  return s;
}

AssignmentSolution solve_assignment(const JobSpec& job, const SolveOptions& options) {
  if (job.size() > static_cast<std::size_t>(options.max_exact_tasks)) {
    throw CapacityError("job has " + std::to_string(job.size()) +
                        " tasks, above the exact-solve cap of " +
                        std::to_string(options.max_exact_tasks) +
                        "; raise the cap or use a heuristic");
  }
  const AssignmentVector human = BranchAndBound(job).solve();
  check_executable(job, human);
  return make_solution(job, human);
}

AssignmentSolution enumerate_assignments(const JobSpec& job) {
  constexpr std::size_t kMaxTasks = 20;
  if (job.size() > kMaxTasks) {
    throw CapacityError("exhaustive enumeration is limited to 20 tasks");
  }
  const AssignmentModel<double> model(job);
  const auto n = static_cast<Eigen::Index>(job.size());
  AssignmentVector human(n);
  Incumbent best;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    for (Eigen::Index i = 0; i < n; ++i) human(i) = (mask >> i) & 1u;
    best.offer(human, model.objective(human));
  }
  check_executable(job, best.human);
  return make_solution(job, best.human);
}

std::pair<TaskList, TaskList> build_nominal_schedules(const AssignmentSolution& solution) {
  std::vector<TaskId> human, robot;
  for (Eigen::Index i = 0; i < solution.human.size(); ++i) {
    (solution.human(i) ? human : robot).push_back(static_cast<TaskId>(i + 1));
  }
  return {TaskList(std::move(human)), TaskList(std::move(robot))};
}

}  // namespace hrc
