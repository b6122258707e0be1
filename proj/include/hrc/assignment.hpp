#pragma once

#include <Eigen/Core>
#include <utility>

#include "hrc/job.hpp"

namespace hrc {

/// x_a indicator per task, index i holds task i + 1.
using AssignmentVector = Eigen::Array<bool, Eigen::Dynamic, 1>;

struct AssignmentSolution {
  AssignmentVector robot;  // x_R
  AssignmentVector human;  // x_H
  double cycle_time = 0.0;  // c
  double objective = 0.0;
  TaskList human_list;  // L_H
  TaskList robot_list;  // L_R
};

struct SolveOptions {
  int max_exact_tasks = 24;
};

/// Dense view of the weighted two-agent assignment model.
///
/// Weights of an agent that cannot execute a task are replaced with
/// `kProhibitiveWeight`, so the solver never needs a separate feasibility
/// branch. The reported objective of any executable assignment only sums
/// real weights.
template <typename Scalar>
struct AssignmentModel {
  static constexpr Scalar kProhibitiveWeight = Scalar(1e6);

  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector robot_weight, human_weight, robot_duration, human_duration;

  explicit AssignmentModel(const JobSpec& job) {
    const auto n = static_cast<Eigen::Index>(job.size());
    robot_weight.resize(n);
    human_weight.resize(n);
    robot_duration.resize(n);
    human_duration.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const TaskSpec& t = job.tasks()[static_cast<std::size_t>(i)];
      robot_weight(i) = t.robot_executable ? Scalar(t.robot_weight) : kProhibitiveWeight;
      human_weight(i) = t.human_executable ? Scalar(t.human_weight) : kProhibitiveWeight;
      robot_duration(i) = Scalar(t.robot_duration);
      human_duration(i) = Scalar(t.human_duration);
    }
  }

  Eigen::Index size() const { return robot_weight.size(); }

  Scalar human_load(const AssignmentVector& human) const {
    return human.select(human_duration.array(), Scalar(0)).sum();
  }
  Scalar robot_load(const AssignmentVector& human) const {
    return human.select(Scalar(0), robot_duration.array()).sum();
  }
  /// c at the optimum for a fixed assignment: the larger agent load.
  Scalar cycle_time(const AssignmentVector& human) const {
    return std::max(human_load(human), robot_load(human));
  }
  Scalar weight_sum(const AssignmentVector& human) const {
    return human.select(human_weight.array(), robot_weight.array()).sum();
  }
  Scalar objective(const AssignmentVector& human) const {
    return weight_sum(human) + cycle_time(human);
  }
};

/// Objective ties closer than this are broken by `human_first_preferred`.
inline constexpr double kObjectiveTolerance = 1e-9;

/// Human-first tie-break: true when `a` gives the human the first task on
/// which the two assignments differ.
bool human_first_preferred(const AssignmentVector& a, const AssignmentVector& b);

/// Exact optimum by depth-first branch and bound. Throws CapacityError
/// above `options.max_exact_tasks` tasks and ValidationError if the optimum
/// would need an agent to run a task it cannot execute.
AssignmentSolution solve_assignment(const JobSpec& job, const SolveOptions& options = {});

/// Exhaustive search over all 2^N assignments (N <= 20), same tie-break.
AssignmentSolution enumerate_assignments(const JobSpec& job);

/// Lists of the tasks assigned to each agent, ascending by id: (L_H, L_R).
std::pair<TaskList, TaskList> build_nominal_schedules(const AssignmentSolution& solution);

/// Fills every derived field of a solution from its human indicator vector.
AssignmentSolution make_solution(const JobSpec& job, const AssignmentVector& human);

}  // namespace hrc
