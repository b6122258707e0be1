#include "hrc/api.hpp"

#include <cmath>
#include <ctime>
#include <fstream>

#include "hrc/errors.hpp"

namespace hrc {

namespace {

using Kind = Command::Kind;

constexpr std::pair<Kind, const char*> kCommandNames[] = {
    {Kind::StartRun, "start_run"},         {Kind::Delegate, "delegate"},
    {Kind::Reassign, "reassign"},          {Kind::ConfirmDone, "confirm_done"},
    {Kind::SetHumanSpeed, "set_human_speed"}, {Kind::Pause, "pause"},
    {Kind::Resume, "resume"},
};

nlohmann::ordered_json optional_task(MaybeTask t) {
  return t ? nlohmann::ordered_json(*t) : nlohmann::ordered_json(nullptr);
}

std::string utc_stamp() {
  const std::time_t now = std::time(nullptr);
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y%m%dT%H%M%SZ", &parts);
  return buffer;
}

}  // namespace

const char* to_string(Command::Kind kind) noexcept {
  for (const auto& [k, name] : kCommandNames) {
    if (k == kind) return name;
  }
  return "?";
}

Command command_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ProtocolError("command must be a JSON object");
  const auto kind_field = j.find("kind");
  if (kind_field == j.end() || !kind_field->is_string()) {
    throw ProtocolError("command needs a string field 'kind'");
  }
  const std::string name = kind_field->get<std::string>();
  Command c;
  const auto* entry = std::find_if(std::begin(kCommandNames), std::end(kCommandNames),
                                   [&](const auto& e) { return name == e.second; });
  if (entry == std::end(kCommandNames)) throw ProtocolError("unknown command '" + name + "'");
  c.kind = entry->first;

  switch (c.kind) {
    case Kind::Delegate:
    case Kind::Reassign:
    case Kind::ConfirmDone: {
      const auto task = j.find("task");
      if (task == j.end() || !task->is_number_integer()) {
        throw ProtocolError("'" + name + "' needs an integer field 'task'");
      }
      const auto value = task->get<std::int64_t>();
      if (value < std::numeric_limits<TaskId>::min() || value > std::numeric_limits<TaskId>::max()) {
        throw ProtocolError("task id out of range");
      }
      c.task = static_cast<TaskId>(value);
      break;
    }
    case Kind::SetHumanSpeed: {
      const auto factor = j.find("factor");
      if (factor == j.end() || !factor->is_number()) {
        throw ProtocolError("'set_human_speed' needs a numeric field 'factor'");
      }
      c.factor = factor->get<double>();
      break;
    }
    case Kind::StartRun: {
      const auto interactive = j.find("interactive");
      if (interactive != j.end()) {
        if (!interactive->is_boolean()) throw ProtocolError("'interactive' must be a boolean");
        c.interactive = interactive->get<bool>();
      }
      break;
    }
    case Kind::Pause:
    case Kind::Resume:
      break;
  }
  return c;
}

nlohmann::ordered_json to_json(const Command& c) {
  nlohmann::ordered_json j{{"kind", to_string(c.kind)}};
  switch (c.kind) {
    case Kind::Delegate:
    case Kind::Reassign:
    case Kind::ConfirmDone:
      j["task"] = c.task;
      break;
    case Kind::SetHumanSpeed:
      j["factor"] = c.factor;
      break;
    case Kind::StartRun:
      j["interactive"] = c.interactive;
      break;
    default:
      break;
  }
  return j;
}

nlohmann::ordered_json to_json(const Ack& ack) {
  nlohmann::ordered_json j{{"type", "ack"}, {"version", kWireVersion}, {"accepted", ack.accepted}};
  if (!ack.accepted) j["reason"] = ack.reason;
  j["seq"] = ack.seq;
  return j;
}

const char* to_string(RunStatus status) noexcept {
  switch (status) {
    case RunStatus::Running:
      return "running";
    case RunStatus::Paused:
      return "paused";
    case RunStatus::Finished:
      return "finished";
    case RunStatus::Faulted:
      return "faulted";
  }
  return "?";
}

nlohmann::ordered_json to_json(const Snapshot& s) {
  nlohmann::ordered_json j{{"type", "snapshot"},
                           {"version", kWireVersion},
                           {"run_id", s.run_id},
                           {"status", to_string(s.status)},
                           {"seq", s.seq},
                           {"clock", s.clock},
                           {"T_H", optional_task(s.human_task)},
                           {"T_R", optional_task(s.robot_task)},
                           {"L_H", s.human_list.ids()},
                           {"L_R", s.robot_list.ids()},
                           {"done", s.done},
                           {"t_res", s.t_res},
                           {"human_speed", s.human_speed},
                           {"metrics", to_json(s.metrics)}};
  if (s.status == RunStatus::Faulted) j["fault"] = s.fault;
  return j;
}

nlohmann::ordered_json to_json(const JobSpec& job) {
  nlohmann::ordered_json tasks = nlohmann::ordered_json::array();
  for (const TaskSpec& t : job.tasks()) {
    tasks.push_back({{"id", t.id},
                     {"label", t.label},
                     {"w_R", t.robot_weight},
                     {"t_R", t.robot_duration},
                     {"w_H", t.human_weight},
                     {"t_H", t.human_duration},
                     {"robot_executable", t.robot_executable},
                     {"human_executable", t.human_executable},
                     {"preparatory", t.preparatory}});
  }
  return {{"type", "job"},
          {"version", kWireVersion},
          {"name", job.name()},
          {"normalization_base", job.normalization_base()},
          {"tasks", tasks}};
}

// --- service ----------------------------------------------------------------

struct Service::Run {
  std::int64_t id = 0;
  std::shared_ptr<const JobSpec> job;
  std::unique_ptr<Simulation> sim;
  std::filesystem::path log_path;
  std::ofstream log;
  std::vector<nlohmann::ordered_json> wire;
  std::size_t forwarded = 0;  // sim events already on the wire
  bool paused = false;
  std::string fault;
  std::shared_ptr<const Snapshot> snapshot;

  bool active() const { return !sim->finished() && fault.empty(); }
};

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  if (config_.autorun) driver_ = std::thread([this] { drive(); });
}

Service::~Service() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  changed_.notify_all();
  if (driver_.joinable()) driver_.join();
}

Ack Service::reject(const std::string& reason) const {
  return {false, reason, run_ ? static_cast<std::int64_t>(run_->wire.size()) : 0};
}

Ack Service::set_job(JobSpec job) {
  std::lock_guard lock(mutex_);
  if (run_ && run_->active()) return reject("running");
  if (scenario_) {
    try {
      validate_scenario(*scenario_, job);
    } catch (const ValidationError&) {
      scenario_.reset();
    }
  }
  job_ = std::make_shared<const JobSpec>(std::move(job));
  return {true, {}, 0};
}

Ack Service::set_scenario(std::optional<ScenarioScript> scenario) {
  std::lock_guard lock(mutex_);
  if (run_ && run_->active()) return reject("running");
  if (scenario && job_) {
    try {
      validate_scenario(*scenario, *job_);
    } catch (const ValidationError&) {
      return reject("invalid-scenario");
    }
  }
  scenario_ = std::move(scenario);
  return {true, {}, 0};
}

std::shared_ptr<const JobSpec> Service::job() const {
  std::lock_guard lock(mutex_);
  return job_;
}

std::optional<ScenarioScript> Service::scenario() const {
  std::lock_guard lock(mutex_);
  return scenario_;
}

Ack Service::post(const Command& c) {
  std::lock_guard lock(mutex_);
  if (c.kind == Kind::StartRun) {
    if (run_ && run_->active()) return reject("running");
    if (!job_) return reject("no-job");
    const ScenarioScript script = (c.interactive || !scenario_) ? ScenarioScript{} : *scenario_;
    auto run = std::make_unique<Run>();
    run->id = next_run_id_;
    run->job = job_;
    try {
      run->sim = std::make_unique<Simulation>(*run->job, script, config_.sim);
    } catch (const ValidationError&) {
      return reject("invalid-scenario");
    } catch (const CapacityError&) {
      return reject("job-too-large");
    }
    std::filesystem::create_directories(config_.log_dir);
    run->log_path =
        config_.log_dir / ("run-" + std::to_string(run->id) + "-" + utc_stamp() + ".jsonl");
    run->log.open(run->log_path, std::ios::out | std::ios::trunc);
    if (!run->log) return reject("log-unavailable");
    ++next_run_id_;
    run_ = std::move(run);
    publish_locked();
    return {true, {}, 0};
  }

  if (!run_) return reject("no-run");
  if (!run_->active()) return reject("not-running");
  Simulation& sim = *run_->sim;
  const JobSpec& job = *run_->job;
  const SchedulerState& state = sim.state();
  const Ack accepted{true, {}, static_cast<std::int64_t>(run_->wire.size())};
  const auto task_guard = [&]() -> std::optional<std::string> {
    if (!job.contains(c.task)) return "unknown-task";
    if (state.done.contains(c.task)) return "stale";
    return std::nullopt;
  };
  const auto forward = [&](ScenarioEvent e) {
    const InjectAck ack = sim.inject(std::move(e));
    return ack.accepted ? accepted : reject(ack.reason);
  };

  switch (c.kind) {
    case Kind::Delegate:
      if (auto why = task_guard()) return reject(*why);
      if (!job.task(c.task).robot_executable) return reject("inexecutable");
      return forward(ScenarioEvent::operator_message(sim.clock(), Message::delegate_to_robot(c.task)));
    case Kind::Reassign:
      if (auto why = task_guard()) return reject(*why);
      if (!job.task(c.task).human_executable) return reject("inexecutable");
      return forward(ScenarioEvent::operator_message(sim.clock(), Message::reassign(c.task)));
    case Kind::ConfirmDone:
      if (auto why = task_guard()) return reject(*why);
      return forward(ScenarioEvent::confirm(sim.clock(), c.task));
    case Kind::SetHumanSpeed:
      if (!(c.factor > 0.0) || !std::isfinite(c.factor)) return reject("invalid-factor");
      return forward(ScenarioEvent::speed(sim.clock(), c.factor));
    case Kind::Pause:
      if (run_->paused) return reject("paused");
      run_->paused = true;
      publish_service_event_locked(EventKind::Paused);
      return accepted;
    case Kind::Resume:
      if (!run_->paused) return reject("not-paused");
      run_->paused = false;
      publish_service_event_locked(EventKind::Resumed);
      return accepted;
    case Kind::StartRun:
      break;
  }
  return reject("unsupported");
}

std::shared_ptr<const Snapshot> Service::state() const {
  std::lock_guard lock(mutex_);
  if (!run_) throw NotFound("no run");
  return run_->snapshot;
}

std::vector<nlohmann::ordered_json> Service::events_from(std::int64_t from) const {
  std::lock_guard lock(mutex_);
  if (!run_) throw NotFound("no run");
  const auto size = static_cast<std::int64_t>(run_->wire.size());
  if (from < 0 || from > size) {
    throw RangeError("sequence " + std::to_string(from) + " outside [0, " +
                     std::to_string(size) + "]");
  }
  return {run_->wire.begin() + from, run_->wire.end()};
}

bool Service::wait_for_events(std::int64_t from, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  const auto ready = [&] {
    return stopping_ || !run_ || static_cast<std::int64_t>(run_->wire.size()) > from ||
           !run_->active();
  };
  changed_.wait_for(lock, timeout, ready);
  return run_ && static_cast<std::int64_t>(run_->wire.size()) > from;
}

std::filesystem::path Service::log_path() const {
  std::lock_guard lock(mutex_);
  if (!run_) throw NotFound("no run");
  return run_->log_path;
}

void Service::tick(std::uint64_t n) {
  std::lock_guard lock(mutex_);
  for (std::uint64_t i = 0; i < n && run_ && run_->active() && !run_->paused; ++i) {
    advance_locked();
  }
}

void Service::wait_until_finished() const {
  std::unique_lock lock(mutex_);
  if (!run_) throw NotFound("no run");
  changed_.wait(lock, [&] { return stopping_ || !run_->active(); });
}

void Service::advance_locked() {
  try {
    run_->sim->advance();
  } catch (const std::exception& e) {
    run_->fault = e.what();
  }
  publish_locked();
}

void Service::publish_locked() {
  Run& run = *run_;
  const std::vector<Event>& events = run.sim->events();
  for (; run.forwarded < events.size(); ++run.forwarded) {
    run.wire.push_back(event_record(static_cast<std::int64_t>(run.wire.size()),
                                    events[run.forwarded]));
    run.log << run.wire.back().dump() << '\n';
  }
  run.log.flush();

  auto s = std::make_shared<Snapshot>();
  const SchedulerState& state = run.sim->state();
  s->run_id = run.id;
  s->status = !run.fault.empty()        ? RunStatus::Faulted
              : run.sim->finished() ? RunStatus::Finished
              : run.paused          ? RunStatus::Paused
                                    : RunStatus::Running;
  s->seq = static_cast<std::int64_t>(run.wire.size());
  s->clock = state.clock;
  s->human_task = state.human_task;
  s->robot_task = state.robot_task;
  s->human_list = state.human_list;
  s->robot_list = state.robot_list;
  s->done = state.done;
  s->t_res = state.human_task ? run.sim->human_remaining() : 0.0;
  s->human_speed = run.sim->human_speed();
  s->metrics = run.sim->metrics();
  s->fault = run.fault;
  run.snapshot = std::move(s);
  changed_.notify_all();
}

void Service::publish_service_event_locked(EventKind kind) {
  Run& run = *run_;
  Event e;
  e.kind = kind;
  e.clock = run.sim->clock();
  run.wire.push_back(event_record(static_cast<std::int64_t>(run.wire.size()), e));
  run.log << run.wire.back().dump() << '\n';
  publish_locked();
}

void Service::drive() {
  std::unique_lock lock(mutex_);
  const auto runnable = [&] { return run_ && run_->active() && !run_->paused; };
  while (!stopping_) {
    if (runnable()) {
      advance_locked();
      changed_.wait_for(lock, config_.tick_interval, [&] { return stopping_; });
    } else {
      changed_.wait(lock, [&] { return stopping_ || runnable(); });
    }
  }
}

}  // namespace hrc
