#pragma once

#include <deque>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hrc/events.hpp"
#include "hrc/job.hpp"

namespace hrc {

/// Sentinel id of the robot's homing task. Never part of a job.
inline constexpr TaskId kHomingTask = 0;

struct SchedulerConfig {
  double done_epsilon = 1e-6;        // t_res at or below this means the human task is over
  double reschedule_epsilon = 0.02;  // t_res change that triggers a new fill
  double timeout_factor = 2.0;       // robot gives up after this multiple of t_R
  double homing_duration = 0.1;
  bool reschedule_enabled = true;  // false: list reordering ablated
  // In the collaborative phase the robot only starts a task that fits in the
  // human's remaining time (or when the human has nothing in progress).
  bool parallel_window = true;
};

/// Live state of the dynamic scheduling loop.
///
/// `human_list` holds the human's current task (while it is in progress)
/// followed by the pending ones; `robot_list` likewise for the robot.
/// Finished tasks leave the lists when the agent moves on.
struct SchedulerState {
  MaybeTask human_task;  // T_H
  MaybeTask robot_task;  // T_R
  TaskList human_list;   // L_H
  TaskList robot_list;   // L_R
  bool human_end = false;
  bool robot_end = false;
  std::set<TaskId> done;
  double clock = 0.0;
  double robot_elapsed = 0.0;

  // Bookkeeping, not part of the algorithmic state.
  std::optional<double> last_fill_t_res;  // cleared on every structural change
  MaybeTask robot_held;                   // candidate the robot is waiting to start

  bool finished() const noexcept {
    return !human_task && !robot_task && human_list.empty() && robot_list.empty();
  }
};

/// What the monitors report for the current step.
struct MonitorInputs {
  double human_remaining = 0.0;  // t_res of the human's current task
  bool robot_completed = false;  // robot (or its camera) reports T_R done
};

bool ex_robot(const JobSpec& job, TaskId task);
bool ex_human(const JobSpec& job, TaskId task);

/// Nominal robot duration; homing uses the configured duration.
double robot_duration(const JobSpec& job, const SchedulerConfig& config, TaskId task);

/// True once every preparatory task is done.
bool collaboration_open(const SchedulerState& state, const JobSpec& job);

struct RobotReport {
  bool end = false;
  std::optional<Message> message;  // delegate-to-human after a timeout
};

/// End_R for the robot's current task plus the robot-side message, if the
/// task overran `timeout_factor` times its nominal duration.
RobotReport monitor_robot(TaskId robot_task, double robot_elapsed, bool reported_complete,
                          const JobSpec& job, const SchedulerConfig& config);

struct RescheduleResult {
  TaskList robot_list;
  bool human_end = false;
  double budget = 0.0;  // t_res - robot_remaining; zero when no fill ran
  TaskList candidates;  // tasks after T_R
  TaskList fill;        // chosen subset, moved right after T_R
};

/// Moves into the human's remaining time the best-fitting subset of robot
/// tasks that follow T_R. `robot_remaining` is what is left of T_R.
RescheduleResult reschedule(MaybeTask human_task, MaybeTask robot_task, const TaskList& robot_list,
                            double t_res, double robot_remaining, const JobSpec& job,
                            const SchedulerConfig& config);

/// Applies the human message first, then the robot message. Rejections and
/// effects are appended to `events`.
SchedulerState communication(const std::optional<Message>& human_message,
                             const std::optional<Message>& robot_message, SchedulerState state,
                             const JobSpec& job, const SchedulerConfig& config,
                             std::vector<Event>& events);

/// Many-producer single-consumer message queue ordered by timestamp.
class MessageQueue {
 public:
  void post(const Message& message);
  /// Oldest message from `sender` stamped at or before `now`.
  std::optional<Message> take(AgentId sender, double now);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::deque<Message> messages_;
};

/// Starting state from the nominal lists; both agents fetch their first task.
SchedulerState initial_state(const TaskList& human_list, const TaskList& robot_list,
                             const JobSpec& job, const SchedulerConfig& config,
                             std::vector<Event>& events);

/// One iteration of the scheduling loop at `state.clock`: robot monitor,
/// reschedule, one message per agent, task advance. The caller advances
/// `clock` and `robot_elapsed` before each call. Throws InternalFault if
/// task conservation breaks.
SchedulerState scheduler_step(SchedulerState state, const MonitorInputs& inputs,
                              MessageQueue& queue, const JobSpec& job,
                              const SchedulerConfig& config, std::vector<Event>& events);

/// Throws InternalFault with a state dump if any job task is missing from,
/// or duplicated across, done / current / pending.
void check_conservation(const SchedulerState& state, const JobSpec& job);

std::string describe(const SchedulerState& state);

}  // namespace hrc
