#pragma once

#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hrc {

enum class AgentId { Human, Robot };

const char* to_string(AgentId agent) noexcept;

/// Task index, dense in 1..N within a job. Id 0 is reserved for the robot's
/// homing task.
using TaskId = std::int32_t;

/// A task id or nothing (the empty task of the scheduling loop).
using MaybeTask = std::optional<TaskId>;

struct TaskSpec {
  TaskId id = 0;
  std::string label;
  double robot_weight = 1.0;
  double robot_duration = 1.0;  // normalized
  double human_weight = 1.0;
  double human_duration = 1.0;  // normalized
  bool robot_executable = true;
  bool human_executable = true;
  bool preparatory = false;

  double weight(AgentId agent) const noexcept {
    return agent == AgentId::Robot ? robot_weight : human_weight;
  }
  double duration(AgentId agent) const noexcept {
    return agent == AgentId::Robot ? robot_duration : human_duration;
  }
  bool executable(AgentId agent) const noexcept {
    return agent == AgentId::Robot ? robot_executable : human_executable;
  }

  bool operator==(const TaskSpec&) const = default;
};

/// Validated, immutable job: tasks with ids 1..N stored in id order.
class JobSpec {
 public:
  /// Throws ValidationError on duplicate or non-dense ids, nonpositive
  /// weights or durations, or a task nobody can execute.
  JobSpec(std::string name, std::vector<TaskSpec> tasks, double normalization_base = 1.0);

  const std::string& name() const noexcept { return name_; }
  double normalization_base() const noexcept { return normalization_base_; }
  std::size_t size() const noexcept { return tasks_.size(); }
  const std::vector<TaskSpec>& tasks() const noexcept { return tasks_; }

  bool contains(TaskId id) const noexcept {
    return id >= 1 && static_cast<std::size_t>(id) <= tasks_.size();
  }
  /// Throws ContractViolation for an unknown id.
  const TaskSpec& task(TaskId id) const;

  bool operator==(const JobSpec&) const = default;

 private:
  std::string name_;
  std::vector<TaskSpec> tasks_;
  double normalization_base_;
};

/// Ordered sequence of distinct task ids.
class TaskList {
 public:
  using const_iterator = std::vector<TaskId>::const_iterator;

  TaskList() = default;
  TaskList(std::initializer_list<TaskId> ids);
  /// Throws ContractViolation on duplicates.
  explicit TaskList(std::vector<TaskId> ids);

  const_iterator begin() const noexcept { return ids_.begin(); }
  const_iterator end() const noexcept { return ids_.end(); }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  TaskId front() const { return ids_.front(); }
  TaskId operator[](std::size_t i) const { return ids_[i]; }
  const std::vector<TaskId>& ids() const noexcept { return ids_; }

  bool contains(TaskId id) const noexcept;
  std::optional<std::size_t> index_of(TaskId id) const noexcept;

  bool operator==(const TaskList&) const = default;

 private:
  std::vector<TaskId> ids_;
};

std::ostream& operator<<(std::ostream& os, const TaskList& list);

/// Successor of `t` in `list`, or nothing past the end. With no task, the
/// head of the list.
MaybeTask next(MaybeTask t, const TaskList& list);

/// ( [..t], (t..] ). Throws ContractViolation when t is not in the list.
std::pair<TaskList, TaskList> split(TaskId t, const TaskList& list);

/// Head insertion. Throws ContractViolation if t is already present.
TaskList push(TaskId t, const TaskList& list);

/// Removes t if present.
TaskList erase(TaskId t, const TaskList& list);

/// a ++ b ++ c. The three lists must be pairwise disjoint.
TaskList concat(const TaskList& a, const TaskList& b, const TaskList& c);

// Job definition file.
//
//   # comment
//   job <name>
//   normalization_base <seconds>            (optional, defaults to max duration)
//   task <id> <w_R> <t_R s> <w_H> <t_H s> <robot 0|1> <human 0|1> <prep 0|1> <label...>
//
JobSpec load_job(std::istream& in);
JobSpec load_job_file(const std::string& path);
void save_job(std::ostream& out, const JobSpec& job);

}  // namespace hrc
