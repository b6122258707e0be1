#pragma once

#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hrc/assignment.hpp"
#include "hrc/events.hpp"
#include "hrc/monitor.hpp"
#include "hrc/scheduler.hpp"

namespace hrc {

struct ScenarioEvent {
  enum class Kind { HumanSpeedFactor, RobotFailure, OperatorMessage, HumanConfirmDone };

  double at = 0.0;
  Kind kind = Kind::HumanSpeedFactor;
  double factor = 1.0;  // HumanSpeedFactor
  TaskId task = 0;      // RobotFailure, HumanConfirmDone
  Message message;      // OperatorMessage

  static ScenarioEvent speed(double at, double factor) {
    ScenarioEvent e;
    e.at = at;
    e.factor = factor;
    return e;
  }
  static ScenarioEvent robot_failure(double at, TaskId task) {
    ScenarioEvent e;
    e.at = at;
    e.kind = Kind::RobotFailure;
    e.task = task;
    return e;
  }
  static ScenarioEvent operator_message(double at, Message m) {
    ScenarioEvent e;
    e.at = at;
    e.kind = Kind::OperatorMessage;
    e.message = m;
    e.message.timestamp = at;
    e.task = m.task;
    return e;
  }
  static ScenarioEvent confirm(double at, TaskId task) {
    ScenarioEvent e;
    e.at = at;
    e.kind = Kind::HumanConfirmDone;
    e.task = task;
    return e;
  }

  bool operator==(const ScenarioEvent&) const = default;
};

struct ScenarioScript {
  std::uint64_t seed = 0;
  std::vector<ScenarioEvent> events;  // sorted by `at`

  bool operator==(const ScenarioScript&) const = default;
};

/// Throws ValidationError for unsorted events, nonpositive speed factors or
/// task ids the job does not know.
void validate_scenario(const ScenarioScript& script, const JobSpec& job);

// Scenario file:
//
//   seed <integer>
//   at <clock> speed <factor>
//   at <clock> robot_failure <task>
//   at <clock> reassign <task>          operator claims a robot task
//   at <clock> delegate <task>          operator hands a task to the robot
//   at <clock> robot_delegate <task>    robot hands its task to the operator
//   at <clock> confirm <task>           operator confirms a task is done
//
ScenarioScript load_scenario(std::istream& in);
ScenarioScript load_scenario_file(const std::string& path);
void save_scenario(std::ostream& out, const ScenarioScript& script);

struct SimConfig {
  double tick = 0.01;  // normalized units; also the monitor sample period
  SchedulerConfig scheduler;
  std::uint64_t seed = 0;  // mixed with the script seed
  double jitter_sigma = 0.01;
  Eigen::Index dimension = 6;  // two 3-D wrists
  std::optional<ReferenceLibrary> references;  // synthesized when absent
  std::uint64_t max_ticks = 5'000'000;
};

struct TaskRecord {
  TaskId task = 0;
  AgentId agent = AgentId::Human;
  double start = 0.0;
  double finish = 0.0;
};

struct RunMetrics {
  double makespan = 0.0;
  double robot_busy = 0.0;
  double human_busy = 0.0;
  // Time with no task in execution, up to the agent's own last completion.
  double robot_idle = 0.0;
  double human_idle = 0.0;
  std::vector<TaskRecord> tasks;  // by task id, finished tasks only
  int reschedules = 0;
  int messages_received = 0;
  int messages_rejected = 0;
  std::vector<Message> message_log;
};

struct RunResult {
  RunMetrics metrics;
  std::vector<Event> events;
};

struct InjectAck {
  bool accepted = false;
  std::string reason;
};

/// Discrete-time model of the cell. Owns the scheduler state; a single
/// thread calls advance(), any thread may inject().
class Simulation {
 public:
  Simulation(const JobSpec& job, ScenarioScript script, SimConfig config);
  Simulation(const JobSpec& job, ScenarioScript script, SimConfig config,
             const TaskList& human_list, const TaskList& robot_list);

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Queues an event stamped with the current clock for the next tick.
  InjectAck inject(ScenarioEvent event);

  /// One tick: due events, agent work, monitors, one scheduler step.
  void advance();
  void run_to_completion();

  bool finished() const { return finished_; }
  std::uint64_t ticks() const { return ticks_; }
  double clock() const { return state_.clock; }
  const SchedulerState& state() const { return state_; }
  const std::vector<Event>& events() const { return events_; }
  double human_remaining() const { return human_remaining_; }
  double human_speed() const { return speed_; }
  const JobSpec& job() const { return job_; }
  RunMetrics metrics() const;

 private:
  Simulation(const JobSpec& job, ScenarioScript script, SimConfig config,
             const AssignmentSolution& nominal);

  void apply(const ScenarioEvent& event);
  void on_new_events(std::size_t first);
  void start_human_task(TaskId task);

  const JobSpec& job_;
  ScenarioScript script_;
  SimConfig config_;
  ReferenceLibrary references_;
  HumanMonitor monitor_;
  MessageQueue queue_;
  SchedulerState state_;
  std::vector<Event> events_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> jitter_{0.0, 1.0};

  std::size_t next_script_event_ = 0;
  std::uint64_t ticks_ = 0;
  bool finished_ = false;
  double speed_ = 1.0;
  double human_work_ = 0.0;
  double human_remaining_ = 0.0;
  bool human_confirmed_ = false;
  std::set<TaskId> failing_;

  std::uint64_t human_busy_ticks_ = 0, robot_busy_ticks_ = 0;
  // Busy ticks and clock ticks at each agent's last completion.
  std::uint64_t human_busy_at_finish_ = 0, robot_busy_at_finish_ = 0;
  std::uint64_t human_finish_ticks_ = 0, robot_finish_ticks_ = 0;
  std::vector<std::optional<TaskRecord>> records_;

  mutable std::mutex inbox_mutex_;
  std::vector<ScenarioEvent> inbox_;
  bool accepting_ = true;
};

RunResult run_scenario(const JobSpec& job, const ScenarioScript& script, const SimConfig& config);

/// Same run with the robot-list reordering switched off.
RunResult baseline_run(const JobSpec& job, const ScenarioScript& script, const SimConfig& config);

/// Event log: one JSON object per line with a strictly increasing "seq".
nlohmann::ordered_json event_record(std::int64_t seq, const Event& event);
void write_event_log(std::ostream& out, const std::vector<Event>& events);
std::vector<Event> read_event_log(std::istream& in);

nlohmann::ordered_json to_json(const RunMetrics& metrics);
nlohmann::ordered_json to_json(const AssignmentSolution& solution);

}  // namespace hrc
