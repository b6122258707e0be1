#include "hrc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "hrc/errors.hpp"

namespace hrc {

namespace {

constexpr double kWorkTolerance = 1e-9;

ReferenceLibrary synthesize_references(const JobSpec& job, const SimConfig& config) {
  ReferenceLibrary library;
  for (const TaskSpec& t : job.tasks()) {
    if (!t.human_executable) continue;
    const auto samples =
        std::max<Eigen::Index>(2, std::lround(t.human_duration / config.tick));
    library.add(t.id, synthetic_reference(t.id, samples, config.dimension,
                                          config.tick * job.normalization_base()));
  }
  return library;
}

std::uint64_t mix_seed(std::uint64_t script_seed, std::uint64_t config_seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(script_seed),
                    static_cast<std::uint32_t>(script_seed >> 32),
                    static_cast<std::uint32_t>(config_seed),
                    static_cast<std::uint32_t>(config_seed >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (std::uint64_t(words[0]) << 32) | words[1];
}


}  // namespace

// --- scenario ---------------------------------------------------------------

void validate_scenario(const ScenarioScript& script, const JobSpec& job) {
  double last = -std::numeric_limits<double>::infinity();
  for (const ScenarioEvent& e : script.events) {
    if (!(e.at >= 0.0) || !std::isfinite(e.at)) {
      throw ValidationError("scenario event times must be finite and nonnegative");
    }
    if (e.at < last) throw ValidationError("scenario events are not sorted by time");
    last = e.at;
    switch (e.kind) {
      case ScenarioEvent::Kind::HumanSpeedFactor:
        if (!(e.factor > 0.0) || !std::isfinite(e.factor)) {
          throw ValidationError("speed factors must be positive");
        }
        break;
      case ScenarioEvent::Kind::OperatorMessage:
        if (!job.contains(e.message.task)) {
          throw ValidationError("scenario message references unknown task " +
                                std::to_string(e.message.task));
        }
        break;
      case ScenarioEvent::Kind::RobotFailure:
      case ScenarioEvent::Kind::HumanConfirmDone:
        if (!job.contains(e.task)) {
          throw ValidationError("scenario references unknown task " + std::to_string(e.task));
        }
        break;
    }
  }
}

ScenarioScript load_scenario(std::istream& in) {
  ScenarioScript script;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string head;
    if (!(fields >> head)) continue;
    if (head == "seed") {
      if (!(fields >> script.seed)) throw ParseError("seed needs an integer", lineno);
    } else if (head == "at") {
      double at = 0.0;
      std::string what;
      if (!(fields >> at >> what)) throw ParseError("expected: at <clock> <event> ...", lineno);
      double number = 0.0;
      if (!(fields >> number)) throw ParseError("event '" + what + "' needs an argument", lineno);
      const auto task = [&] {
        if (number != std::floor(number)) throw ParseError("task id must be an integer", lineno);
        return static_cast<TaskId>(number);
      };
      if (what == "speed") {
        script.events.push_back(ScenarioEvent::speed(at, number));
      } else if (what == "robot_failure") {
        script.events.push_back(ScenarioEvent::robot_failure(at, task()));
      } else if (what == "reassign") {
        script.events.push_back(ScenarioEvent::operator_message(at, Message::reassign(task())));
      } else if (what == "delegate") {
        script.events.push_back(
            ScenarioEvent::operator_message(at, Message::delegate_to_robot(task())));
      } else if (what == "robot_delegate") {
        script.events.push_back(
            ScenarioEvent::operator_message(at, Message::delegate_to_human(task())));
      } else if (what == "confirm") {
        script.events.push_back(ScenarioEvent::confirm(at, task()));
      } else {
        throw ParseError("unknown scenario event '" + what + "'", lineno);
      }
    } else {
      throw ParseError("unknown keyword '" + head + "'", lineno);
    }
    std::string extra;
    if (fields >> extra) throw ParseError("trailing text '" + extra + "'", lineno);
  }
  for (std::size_t i = 1; i < script.events.size(); ++i) {
    if (script.events[i].at < script.events[i - 1].at) {
      throw ValidationError("scenario events are not sorted by time");
    }
  }
  return script;
}

ScenarioScript load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'", 0);
  return load_scenario(in);
}

void save_scenario(std::ostream& out, const ScenarioScript& script) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "seed " << script.seed << '\n';
  for (const ScenarioEvent& e : script.events) {
    out << "at " << e.at << ' ';
    switch (e.kind) {
      case ScenarioEvent::Kind::HumanSpeedFactor:
        out << "speed " << e.factor;
        break;
      case ScenarioEvent::Kind::RobotFailure:
        out << "robot_failure " << e.task;
        break;
      case ScenarioEvent::Kind::HumanConfirmDone:
        out << "confirm " << e.task;
        break;
      case ScenarioEvent::Kind::OperatorMessage:
        switch (e.message.kind) {
          case MessageKind::ReassignHuman:
            out << "reassign ";
            break;
          case MessageKind::DelegateToRobot:
            out << "delegate ";
            break;
          case MessageKind::DelegateToHuman:
            out << "robot_delegate ";
            break;
        }
        out << e.message.task;
        break;
    }
    out << '\n';
  }
  out.precision(old_precision);
}

// --- simulation -------------------------------------------------------------

Simulation::Simulation(const JobSpec& job, ScenarioScript script, SimConfig config)
    : Simulation(job, std::move(script), std::move(config), solve_assignment(job)) {}

Simulation::Simulation(const JobSpec& job, ScenarioScript script, SimConfig config,
                       const AssignmentSolution& nominal)
    : Simulation(job, std::move(script), std::move(config), nominal.human_list,
                 nominal.robot_list) {}

Simulation::Simulation(const JobSpec& job, ScenarioScript script, SimConfig config,
                       const TaskList& human_list, const TaskList& robot_list)
    : job_(job),
      script_(std::move(script)),
      config_(std::move(config)),
      references_(config_.references ? *config_.references : synthesize_references(job, config_)),
      monitor_(job_, references_),
      rng_(mix_seed(script_.seed, config_.seed)),
      records_(job.size() + 1) {
  if (!(config_.tick > 0.0)) throw ValidationError("tick must be positive");
  validate_scenario(script_, job_);
  for (const auto& [task, trace] : references_.traces()) {
    if (trace.dimension() != config_.dimension) {
      throw ValidationError("reference for task " + std::to_string(task) +
                            " has the wrong dimension");
    }
  }
  state_ = initial_state(human_list, robot_list, job_, config_.scheduler, events_);
  on_new_events(0);
  if (state_.finished()) finished_ = true;
}

InjectAck Simulation::inject(ScenarioEvent event) {
  std::lock_guard lock(inbox_mutex_);
  if (!accepting_) return {false, "not-running"};
  const TaskId task =
      event.kind == ScenarioEvent::Kind::OperatorMessage ? event.message.task : event.task;
  if (event.kind != ScenarioEvent::Kind::HumanSpeedFactor && !job_.contains(task)) {
    return {false, "unknown-task"};
  }
  if (event.kind == ScenarioEvent::Kind::HumanSpeedFactor &&
      !(event.factor > 0.0 && std::isfinite(event.factor))) {
    return {false, "invalid-factor"};
  }
  inbox_.push_back(std::move(event));
  return {true, {}};
}

void Simulation::apply(const ScenarioEvent& e) {
  Event logged;
  logged.clock = state_.clock;
  switch (e.kind) {
    case ScenarioEvent::Kind::HumanSpeedFactor:
      speed_ = e.factor;
      logged.kind = EventKind::SpeedChanged;
      logged.agent = AgentId::Human;
      logged.value = e.factor;
      events_.push_back(std::move(logged));
      break;
    case ScenarioEvent::Kind::RobotFailure:
      failing_.insert(e.task);
      logged.kind = EventKind::RobotFailureInjected;
      logged.agent = AgentId::Robot;
      logged.task = e.task;
      events_.push_back(std::move(logged));
      break;
    case ScenarioEvent::Kind::HumanConfirmDone:
      logged.agent = AgentId::Human;
      logged.task = e.task;
      if (state_.human_task == e.task) {
        human_confirmed_ = true;
        logged.kind = EventKind::ConfirmReceived;
      } else {
        logged.kind = EventKind::ConfirmRejected;
        logged.reason = "not-current";
      }
      events_.push_back(std::move(logged));
      break;
    case ScenarioEvent::Kind::OperatorMessage: {
      Message m = e.message;
      m.timestamp = state_.clock;
      queue_.post(m);
      break;
    }
  }
}

void Simulation::start_human_task(TaskId task) {
  human_work_ = 0.0;
  human_confirmed_ = false;
  monitor_.start(task);
  human_remaining_ = job_.task(task).human_duration;
}

void Simulation::on_new_events(std::size_t first) {
  for (std::size_t i = first; i < events_.size(); ++i) {
    const Event& e = events_[i];
    switch (e.kind) {
      case EventKind::TaskStarted:
        if (e.agent == AgentId::Human) start_human_task(*e.task);
        records_[static_cast<std::size_t>(*e.task)] = TaskRecord{*e.task, *e.agent, e.clock, 0.0};
        break;
      case EventKind::TaskCompleted:
        if (auto& r = records_[static_cast<std::size_t>(*e.task)]) r->finish = e.clock;
        if (e.agent == AgentId::Human) {
          human_busy_at_finish_ = human_busy_ticks_;
          human_finish_ticks_ = ticks_;
        } else {
          robot_busy_at_finish_ = robot_busy_ticks_;
          robot_finish_ticks_ = ticks_;
        }
        break;
      case EventKind::HomingCompleted:
        robot_busy_at_finish_ = robot_busy_ticks_;
        robot_finish_ticks_ = ticks_;
        break;
      case EventKind::TaskRetry:
        failing_.erase(*e.task);
        break;
      case EventKind::Delegation:
        if (e.agent == AgentId::Human) failing_.erase(*e.task);
        break;
      default:
        break;
    }
  }
}

void Simulation::advance() {
  if (finished_) return;

  std::vector<ScenarioEvent> injected;
  {
    std::lock_guard lock(inbox_mutex_);
    injected.swap(inbox_);
  }
  while (next_script_event_ < script_.events.size() &&
         script_.events[next_script_event_].at <= state_.clock + kWorkTolerance) {
    apply(script_.events[next_script_event_++]);
  }
  for (const ScenarioEvent& e : injected) apply(e);

  // Agents work through [clock, clock + tick).
  bool human_done = false;
  if (state_.human_task) {
    const TaskId task = *state_.human_task;
    const double nominal = job_.task(task).human_duration;
    human_work_ += config_.tick * speed_;
    ++human_busy_ticks_;
    const double progress = std::min(1.0, human_work_ / nominal);
    ProgressEstimate estimate;
    if (const Trace* ref = references_.find(task)) {
      const Eigen::Index n = ref->length();
      const auto index = std::clamp<Eigen::Index>(
          static_cast<Eigen::Index>(std::ceil(progress * double(n) - kWorkTolerance)) - 1, 0,
          n - 1);
      Eigen::VectorXd sample = ref->samples.col(index);
      for (Eigen::Index d = 0; d < sample.size(); ++d) {
        sample(d) += config_.jitter_sigma * jitter_(rng_);
      }
      estimate = monitor_.observe(sample, human_work_);
    } else {
      estimate = monitor_.observe(Eigen::VectorXd::Zero(config_.dimension), human_work_);
    }
    human_done = human_confirmed_ || human_work_ >= nominal - kWorkTolerance;
    // An unfinished task always has at least one tick of work left.
    human_remaining_ = human_done ? 0.0 : std::max(estimate.remaining, config_.tick);
  }
  if (state_.robot_task) {
    state_.robot_elapsed += config_.tick;
    ++robot_busy_ticks_;
  }
  ++ticks_;
  state_.clock = double(ticks_) * config_.tick;

  MonitorInputs inputs;
  inputs.human_remaining = human_remaining_;
  if (state_.robot_task && *state_.robot_task != kHomingTask) {
    const TaskId task = *state_.robot_task;
    inputs.robot_completed =
        !failing_.contains(task) &&
        state_.robot_elapsed >= job_.task(task).robot_duration - kWorkTolerance;
  }
  const std::size_t step_first = events_.size();
  state_ = scheduler_step(std::move(state_), inputs, queue_, job_, config_.scheduler, events_);
  on_new_events(step_first);

  if (state_.finished()) {
    finished_ = true;
    {
      std::lock_guard lock(inbox_mutex_);
      accepting_ = false;
    }
    Event done;
    done.kind = EventKind::RunCompleted;
    done.clock = state_.clock;
    events_.push_back(std::move(done));
  }
}

void Simulation::run_to_completion() {
  while (!finished_) {
    if (ticks_ >= config_.max_ticks) {
      throw InternalFault("simulation did not terminate within " +
                          std::to_string(config_.max_ticks) + " ticks: " + describe(state_));
    }
    advance();
  }
}

RunMetrics Simulation::metrics() const {
  RunMetrics m;
  for (const Event& e : events_) {
    switch (e.kind) {
      case EventKind::TaskCompleted:
        m.makespan = e.clock;
        break;
      case EventKind::RescheduleApplied:
        ++m.reschedules;
        break;
      case EventKind::MessageReceived:
        ++m.messages_received;
        m.message_log.push_back(*e.message);
        break;
      case EventKind::MessageRejected:
        ++m.messages_rejected;
        break;
      default:
        break;
    }
  }
  for (const auto& r : records_) {
    if (r && state_.done.contains(r->task)) m.tasks.push_back(*r);
  }
  m.human_busy = double(human_busy_at_finish_) * config_.tick;
  m.robot_busy = double(robot_busy_at_finish_) * config_.tick;
  m.human_idle = double(human_finish_ticks_ - human_busy_at_finish_) * config_.tick;
  m.robot_idle = double(robot_finish_ticks_ - robot_busy_at_finish_) * config_.tick;
  return m;
}

RunResult run_scenario(const JobSpec& job, const ScenarioScript& script, const SimConfig& config) {
  Simulation sim(job, script, config);
  sim.run_to_completion();
  return {sim.metrics(), sim.events()};
}

RunResult baseline_run(const JobSpec& job, const ScenarioScript& script, const SimConfig& config) {
  SimConfig ablated = config;
  ablated.scheduler.reschedule_enabled = false;
  return run_scenario(job, script, ablated);
}

// --- logs and machine-readable output -----------------------------------------

nlohmann::ordered_json event_record(std::int64_t seq, const Event& event) {
  nlohmann::ordered_json j;
  j["seq"] = seq;
  const nlohmann::ordered_json body = to_json(event);
  for (const auto& [key, value] : body.items()) j[key] = value;
  return j;
}

void write_event_log(std::ostream& out, const std::vector<Event>& events) {
  std::int64_t seq = 0;
  for (const Event& e : events) out << event_record(seq++, e).dump() << '\n';
}

std::vector<Event> read_event_log(std::istream& in) {
  std::vector<Event> events;
  std::string line;
  int lineno = 0;
  std::int64_t last_seq = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad event record: ") + e.what(), lineno);
    }
    try {
      const auto seq = j.at("seq").get<std::int64_t>();
      if (seq <= last_seq) throw ParseError("sequence numbers must increase", lineno);
      last_seq = seq;
      events.push_back(event_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad event record: ") + e.what(), lineno);
    }
  }
  return events;
}

nlohmann::ordered_json to_json(const RunMetrics& m) {
  nlohmann::ordered_json tasks = nlohmann::ordered_json::array();
  for (const TaskRecord& r : m.tasks) {
    tasks.push_back({{"task", r.task},
                     {"agent", to_string(r.agent)},
                     {"start", r.start},
                     {"finish", r.finish}});
  }
  nlohmann::ordered_json messages = nlohmann::ordered_json::array();
  for (const Message& msg : m.message_log) messages.push_back(to_json(msg));
  return {{"type", "run-metrics"},
          {"version", 1},
          {"makespan", m.makespan},
          {"robot_busy", m.robot_busy},
          {"human_busy", m.human_busy},
          {"robot_idle", m.robot_idle},
          {"human_idle", m.human_idle},
          {"reschedules", m.reschedules},
          {"messages_received", m.messages_received},
          {"messages_rejected", m.messages_rejected},
          {"tasks", tasks},
          {"messages", messages}};
}

nlohmann::ordered_json to_json(const AssignmentSolution& s) {
  std::vector<int> robot(static_cast<std::size_t>(s.robot.size()));
  std::vector<int> human(static_cast<std::size_t>(s.human.size()));
  for (Eigen::Index i = 0; i < s.robot.size(); ++i) {
    robot[static_cast<std::size_t>(i)] = s.robot(i) ? 1 : 0;
    human[static_cast<std::size_t>(i)] = s.human(i) ? 1 : 0;
  }
  return {{"type", "assignment"},
          {"version", 1},
          {"x_R", robot},
          {"x_H", human},
          {"c", s.cycle_time},
          {"objective", s.objective},
          {"L_H", s.human_list.ids()},
          {"L_R", s.robot_list.ids()}};
}

}  // namespace hrc
