#include "hrc/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "hrc/errors.hpp"
#include "hrc/knapsack.hpp"

namespace hrc {

namespace {

constexpr double kTimeTolerance = 1e-9;

// Insert `t` as the next task to run: after the current task when it is
// still in the list, at the head otherwise.
TaskList push_next(TaskId t, MaybeTask current, const TaskList& list) {
  if (current && list.contains(*current)) {
    auto [done_part, rest] = split(*current, list);
    return concat(done_part, push(t, rest), {});
  }
  return push(t, list);
}

Event make_event(EventKind kind, double clock) {
  Event e;
  e.kind = kind;
  e.clock = clock;
  return e;
}

Event task_event(EventKind kind, double clock, AgentId agent, TaskId task) {
  Event e = make_event(kind, clock);
  e.agent = agent;
  e.task = task;
  return e;
}

void reject(const Message& m, const std::string& reason, double clock,
            std::vector<Event>& events) {
  Event e = make_event(EventKind::MessageRejected, clock);
  e.message = m;
  e.task = m.task;
  e.reason = reason;
  events.push_back(std::move(e));
}

void insert_homing(SchedulerState& s, std::vector<Event>& events) {
  if (s.robot_list.contains(kHomingTask)) return;
  s.robot_list = push(kHomingTask, s.robot_list);
  events.push_back(task_event(EventKind::HomingInserted, s.clock, AgentId::Robot, kHomingTask));
}

void apply_human_message(const Message& m, SchedulerState& s, const JobSpec& job,
                         std::vector<Event>& events) {
  if (m.sender != AgentId::Human || m.kind == MessageKind::DelegateToHuman) {
    return reject(m, "wrong-sender", s.clock, events);
  }
  if (!job.contains(m.task)) return reject(m, "unknown-task", s.clock, events);
  if (s.done.contains(m.task)) return reject(m, "stale", s.clock, events);
  const TaskId t = m.task;

  if (m.kind == MessageKind::ReassignHuman) {
    if (s.human_task == t || s.human_list.contains(t)) {
      return reject(m, "already-human", s.clock, events);
    }
    if (!s.robot_list.contains(t)) return reject(m, "not-scheduled", s.clock, events);
    if (!ex_human(job, t)) return reject(m, "inexecutable", s.clock, events);
    if (s.robot_task == t) {
      s.robot_end = true;
      insert_homing(s, events);
    }
    s.robot_list = erase(t, s.robot_list);
    // The human finishes the task in hand first; End_H is left to the monitor.
    s.human_list = push_next(t, s.human_task, s.human_list);
    events.push_back(task_event(EventKind::Reassignment, s.clock, AgentId::Human, t));
  } else {
    if (s.human_task == t) return reject(m, "in-progress", s.clock, events);
    if (!s.human_list.contains(t)) return reject(m, "not-human-task", s.clock, events);
    if (!ex_robot(job, t)) return reject(m, "inexecutable", s.clock, events);
    s.human_list = erase(t, s.human_list);
    s.robot_list = push_next(t, s.robot_task, s.robot_list);
    events.push_back(task_event(EventKind::Delegation, s.clock, AgentId::Robot, t));
  }
  s.last_fill_t_res.reset();
}

void apply_robot_message(const Message& m, SchedulerState& s, const JobSpec& job,
                         std::vector<Event>& events) {
  if (m.sender != AgentId::Robot || m.kind != MessageKind::DelegateToHuman) {
    return reject(m, "wrong-sender", s.clock, events);
  }
  if (!job.contains(m.task)) return reject(m, "unknown-task", s.clock, events);
  if (s.done.contains(m.task)) return reject(m, "stale", s.clock, events);
  if (s.robot_task != m.task || !s.robot_list.contains(m.task)) {
    return reject(m, "not-current", s.clock, events);
  }
  if (!ex_human(job, m.task)) {
    reject(m, "inexecutable", s.clock, events);
    // Nobody else can do it: the robot starts the task over.
    s.robot_elapsed = 0.0;
    events.push_back(task_event(EventKind::TaskRetry, s.clock, AgentId::Robot, m.task));
    return;
  }
  s.robot_end = true;
  s.robot_list = erase(m.task, s.robot_list);
  insert_homing(s, events);
  s.human_list = push_next(m.task, s.human_task, s.human_list);
  events.push_back(task_event(EventKind::Delegation, s.clock, AgentId::Human, m.task));
  s.last_fill_t_res.reset();
}

void advance_human(SchedulerState& s, std::vector<Event>& events) {
  const MaybeTask previous = s.human_task;
  const bool listed = previous && s.human_list.contains(*previous);
  const MaybeTask upcoming = next(listed ? previous : std::nullopt, s.human_list);
  if (listed) s.human_list = split(*previous, s.human_list).second;
  s.human_task = upcoming;
  if (upcoming) {
    s.human_end = false;
    events.push_back(task_event(EventKind::TaskStarted, s.clock, AgentId::Human, *upcoming));
  }
  if (previous != upcoming) s.last_fill_t_res.reset();
}

void start_robot(SchedulerState& s, TaskId t, std::vector<Event>& events) {
  s.robot_task = t;
  s.robot_elapsed = 0.0;
  s.robot_end = false;
  s.robot_held.reset();
  events.push_back(task_event(t == kHomingTask ? EventKind::HomingStarted : EventKind::TaskStarted,
                              s.clock, AgentId::Robot, t));
}

void hold_robot(SchedulerState& s, TaskId candidate, std::vector<Event>& events) {
  if (s.robot_held == candidate) return;
  s.robot_held = candidate;
  events.push_back(task_event(EventKind::RobotHeld, s.clock, AgentId::Robot, candidate));
}

// `window` is the human's remaining time, infinite when the human has
// nothing in progress.
void advance_robot(SchedulerState& s, double window, const JobSpec& job,
                   const SchedulerConfig& config, std::vector<Event>& events) {
  const MaybeTask previous = s.robot_task;
  const bool listed = previous && s.robot_list.contains(*previous);
  const MaybeTask upcoming = next(listed ? previous : std::nullopt, s.robot_list);
  if (listed) s.robot_list = split(*previous, s.robot_list).second;
  s.robot_task.reset();
  if (previous) s.last_fill_t_res.reset();
  if (!upcoming) {
    s.robot_held.reset();
    return;
  }
  const TaskId candidate = *upcoming;
  if (candidate == kHomingTask) return start_robot(s, candidate, events);

  if (!collaboration_open(s, job)) {
    // Before collaboration starts only preparatory work may run.
    if (job.task(candidate).preparatory) return start_robot(s, candidate, events);
    const auto prep = std::find_if(s.robot_list.begin(), s.robot_list.end(),
                                   [&](TaskId t) { return job.task(t).preparatory; });
    if (prep == s.robot_list.end()) return hold_robot(s, candidate, events);
    const TaskId p = *prep;
    s.robot_list = push(p, erase(p, s.robot_list));
    return start_robot(s, p, events);
  }
  if (config.parallel_window &&
      robot_duration(job, config, candidate) > window + kFillTolerance) {
    return hold_robot(s, candidate, events);
  }
  start_robot(s, candidate, events);
}

}  // namespace

bool ex_robot(const JobSpec& job, TaskId task) {
  if (task == kHomingTask) return true;
  return job.task(task).robot_executable;
}

bool ex_human(const JobSpec& job, TaskId task) {
  if (task == kHomingTask) return false;
  return job.task(task).human_executable;
}

double robot_duration(const JobSpec& job, const SchedulerConfig& config, TaskId task) {
  if (task == kHomingTask) return config.homing_duration;
  return job.task(task).robot_duration;
}

bool collaboration_open(const SchedulerState& state, const JobSpec& job) {
  return std::all_of(job.tasks().begin(), job.tasks().end(), [&](const TaskSpec& t) {
    return !t.preparatory || state.done.contains(t.id);
  });
}

RobotReport monitor_robot(TaskId robot_task, double robot_elapsed, bool reported_complete,
                          const JobSpec& job, const SchedulerConfig& config) {
  RobotReport report;
  if (robot_task == kHomingTask) {
    report.end = robot_elapsed >= config.homing_duration - kTimeTolerance;
    return report;
  }
  if (reported_complete) {
    report.end = true;
    return report;
  }
  const double limit = config.timeout_factor * job.task(robot_task).robot_duration;
  if (robot_elapsed >= limit - kTimeTolerance) {
    report.message = Message::delegate_to_human(robot_task);
  }
  return report;
}

RescheduleResult reschedule(MaybeTask human_task, MaybeTask robot_task, const TaskList& robot_list,
                            double t_res, double robot_remaining, const JobSpec& job,
                            const SchedulerConfig& config) {
  RescheduleResult result;
  result.robot_list = robot_list;
  result.human_end = !human_task || t_res <= config.done_epsilon;
  if (!(t_res > robot_remaining)) return result;

  TaskList head, tail;
  if (robot_task) {
    std::tie(head, tail) = split(*robot_task, robot_list);
  } else {
    tail = robot_list;
  }
  std::vector<double> durations;
  durations.reserve(tail.size());
  for (TaskId t : tail) durations.push_back(robot_duration(job, config, t));

  result.budget = t_res - robot_remaining;
  result.candidates = tail;
  result.fill = knapsack_fill(tail, result.budget, durations);

  std::vector<TaskId> rest;
  for (TaskId t : tail) {
    if (!result.fill.contains(t)) rest.push_back(t);
  }
  result.robot_list = concat(head, result.fill, TaskList(std::move(rest)));
  return result;
}

SchedulerState communication(const std::optional<Message>& human_message,
                             const std::optional<Message>& robot_message, SchedulerState state,
                             const JobSpec& job, const SchedulerConfig& config,
                             std::vector<Event>& events) {
  (void)config;
  for (const auto* m : {&human_message, &robot_message}) {
    if (!*m) continue;
    Event received = make_event(EventKind::MessageReceived, state.clock);
    received.message = **m;
    received.task = (*m)->task;
    events.push_back(std::move(received));
    if (m == &human_message) {
      apply_human_message(**m, state, job, events);
    } else {
      apply_robot_message(**m, state, job, events);
    }
  }
  return state;
}

void MessageQueue::post(const Message& message) {
  std::lock_guard lock(mutex_);
  const auto pos = std::upper_bound(
      messages_.begin(), messages_.end(), message,
      [](const Message& a, const Message& b) { return a.timestamp < b.timestamp; });
  messages_.insert(pos, message);
}

std::optional<Message> MessageQueue::take(AgentId sender, double now) {
  std::lock_guard lock(mutex_);
  for (auto it = messages_.begin(); it != messages_.end() && it->timestamp <= now; ++it) {
    if (it->sender == sender) {
      Message m = *it;
      messages_.erase(it);
      return m;
    }
  }
  return std::nullopt;
}

std::size_t MessageQueue::size() const {
  std::lock_guard lock(mutex_);
  return messages_.size();
}

SchedulerState initial_state(const TaskList& human_list, const TaskList& robot_list,
                             const JobSpec& job, const SchedulerConfig& config,
                             std::vector<Event>& events) {
  SchedulerState s;
  s.human_list = human_list;
  s.robot_list = robot_list;
  s.human_end = true;
  s.robot_end = true;
  events.push_back(make_event(EventKind::RunStarted, s.clock));
  advance_human(s, events);
  const double window = s.human_task ? job.task(*s.human_task).human_duration
                                     : std::numeric_limits<double>::infinity();
  advance_robot(s, window, job, config, events);
  check_conservation(s, job);
  Event state_event = make_event(EventKind::State, s.clock);
  state_event.human_task = s.human_task;
  state_event.robot_task = s.robot_task;
  state_event.before = s.human_list;
  state_event.after = s.robot_list;
  state_event.value = window == std::numeric_limits<double>::infinity() ? 0.0 : window;
  events.push_back(std::move(state_event));
  return s;
}

SchedulerState scheduler_step(SchedulerState s, const MonitorInputs& inputs, MessageQueue& queue,
                              const JobSpec& job, const SchedulerConfig& config,
                              std::vector<Event>& events) {
  const std::size_t first_event = events.size();

  // Robot monitor.
  std::optional<Message> robot_message;
  bool robot_completed = false;
  if (s.robot_task) {
    RobotReport report =
        monitor_robot(*s.robot_task, s.robot_elapsed, inputs.robot_completed, job, config);
    s.robot_end = report.end;
    if (report.message) {
      robot_message = report.message;
      robot_message->timestamp = s.clock;
    }
    if (report.end) {
      robot_completed = true;
      if (*s.robot_task == kHomingTask) {
        events.push_back(
            task_event(EventKind::HomingCompleted, s.clock, AgentId::Robot, kHomingTask));
      } else {
        s.done.insert(*s.robot_task);
        events.push_back(
            task_event(EventKind::TaskCompleted, s.clock, AgentId::Robot, *s.robot_task));
      }
    }
  } else {
    s.robot_end = true;
  }

  // Reschedule the robot list against the human's remaining time.
  const double t_res = s.human_task ? std::max(0.0, inputs.human_remaining) : 0.0;
  s.human_end = !s.human_task || t_res <= config.done_epsilon;
  const bool refill_due = !s.last_fill_t_res || robot_completed ||
                          std::abs(t_res - *s.last_fill_t_res) > config.reschedule_epsilon;
  if (config.reschedule_enabled && s.human_task && !s.human_end && refill_due &&
      collaboration_open(s, job)) {
    const double robot_remaining =
        (!s.robot_task || s.robot_end)
            ? 0.0
            : std::max(0.0, robot_duration(job, config, *s.robot_task) - s.robot_elapsed);
    RescheduleResult r =
        reschedule(s.human_task, s.robot_task, s.robot_list, t_res, robot_remaining, job, config);
    s.last_fill_t_res = t_res;
    if (r.robot_list != s.robot_list) {
      Event e = make_event(EventKind::RescheduleApplied, s.clock);
      e.value = r.budget;
      e.before = s.robot_list;
      e.after = r.robot_list;
      e.candidates = r.candidates;
      e.fill = r.fill;
      events.push_back(std::move(e));
      s.robot_list = std::move(r.robot_list);
    }
  }
  if (s.human_end && s.human_task) {
    s.done.insert(*s.human_task);
    events.push_back(task_event(EventKind::TaskCompleted, s.clock, AgentId::Human, *s.human_task));
  }

  // Communication: one message per agent per step.
  const std::optional<Message> human_message = queue.take(AgentId::Human, s.clock);
  if (!robot_message) robot_message = queue.take(AgentId::Robot, s.clock);
  s = communication(human_message, robot_message, std::move(s), job, config, events);

  // Next tasks.
  const MaybeTask human_before = s.human_task;
  if (s.human_end) advance_human(s, events);
  if (s.robot_end) {
    double window = std::numeric_limits<double>::infinity();
    if (s.human_task) {
      window = s.human_task == human_before ? t_res : job.task(*s.human_task).human_duration;
    }
    advance_robot(s, window, job, config, events);
  }

  check_conservation(s, job);
  if (events.size() != first_event) {
    Event state_event = make_event(EventKind::State, s.clock);
    state_event.human_task = s.human_task;
    state_event.robot_task = s.robot_task;
    state_event.before = s.human_list;
    state_event.after = s.robot_list;
    state_event.done = s.done;
    state_event.value = t_res;
    events.push_back(std::move(state_event));
  }
  return s;
}

void check_conservation(const SchedulerState& s, const JobSpec& job) {
  std::map<TaskId, int> seen;
  const auto fail = [&](const std::string& why) {
    throw InternalFault("task conservation violated: " + why + "\n" + describe(s));
  };
  if (s.human_task && (s.human_list.empty() || s.human_list.front() != *s.human_task)) {
    fail("T_H is not at the head of L_H");
  }
  if (s.robot_task && (s.robot_list.empty() || s.robot_list.front() != *s.robot_task)) {
    fail("T_R is not at the head of L_R");
  }
  for (TaskId t : s.done) ++seen[t];
  for (TaskId t : s.human_list) ++seen[t];
  int homing = 0;
  for (TaskId t : s.robot_list) {
    if (t == kHomingTask) {
      ++homing;
    } else {
      ++seen[t];
    }
  }
  if (homing > 1) fail("more than one homing task pending");
  if (s.human_task == kHomingTask) fail("homing assigned to the human");
  for (const TaskSpec& t : job.tasks()) {
    const auto it = seen.find(t.id);
    if (it == seen.end()) fail("task " + std::to_string(t.id) + " lost");
    if (it->second != 1) fail("task " + std::to_string(t.id) + " held twice");
  }
  if (seen.size() != job.size()) fail("unknown task id in state");
}

std::string describe(const SchedulerState& s) {
  std::ostringstream os;
  const auto opt = [](MaybeTask t) { return t ? std::to_string(*t) : std::string("-"); };
  os << "clock=" << s.clock << " T_H=" << opt(s.human_task) << " T_R=" << opt(s.robot_task)
     << " L_H=" << s.human_list << " L_R=" << s.robot_list << " End_H=" << s.human_end
     << " End_R=" << s.robot_end << " done={";
  bool first = true;
  for (TaskId t : s.done) {
    os << (first ? "" : ",") << t;
    first = false;
  }
  os << "} robot_elapsed=" << s.robot_elapsed;
  return os.str();
}

}  // namespace hrc
