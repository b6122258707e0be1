#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hrc/sim.hpp"

namespace hrc {

/// Wire protocol version carried by every payload.
inline constexpr int kWireVersion = 1;

struct Command {
  enum class Kind { StartRun, Delegate, Reassign, ConfirmDone, SetHumanSpeed, Pause, Resume };

  Kind kind = Kind::StartRun;
  TaskId task = 0;      // Delegate, Reassign, ConfirmDone
  double factor = 1.0;  // SetHumanSpeed
  bool interactive = false;  // StartRun: ignore the uploaded scenario

  bool operator==(const Command&) const = default;
};

const char* to_string(Command::Kind kind) noexcept;

// {"kind": "start_run" | "delegate" | "reassign" | "confirm_done" |
//           "set_human_speed" | "pause" | "resume",
//  "task": <id>, "factor": <real>, "interactive": <bool>}
// Unknown fields are ignored. Throws ProtocolError on missing or mistyped
// fields.
Command command_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const Command& command);

struct Ack {
  bool accepted = false;
  std::string reason;   // empty when accepted
  std::int64_t seq = 0;  // the effect appears at this sequence number or later
};

nlohmann::ordered_json to_json(const Ack& ack);

enum class RunStatus { Running, Paused, Finished, Faulted };
const char* to_string(RunStatus status) noexcept;

/// Immutable view of the active run, published once per tick.
struct Snapshot {
  std::int64_t run_id = 0;
  RunStatus status = RunStatus::Running;
  std::int64_t seq = 0;  // number of wire events published so far
  double clock = 0.0;
  MaybeTask human_task, robot_task;
  TaskList human_list, robot_list;
  std::set<TaskId> done;
  double t_res = 0.0;
  double human_speed = 1.0;
  RunMetrics metrics;
  std::string fault;  // set when status is Faulted
};

nlohmann::ordered_json to_json(const Snapshot& snapshot);
nlohmann::ordered_json to_json(const JobSpec& job);

struct ServiceConfig {
  SimConfig sim;
  std::filesystem::path log_dir = ".";
  std::chrono::microseconds tick_interval{10'000};  // wall time per tick
  bool autorun = true;  // false: no driver thread, the owner calls tick()
};

/// Single-run service. Commands become scheduler messages or scenario
/// events stamped with the simulation clock; every sim event is published
/// as a wire event with a sequence number and appended to the run's log.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Rejected with "running" while a run is in progress.
  Ack set_job(JobSpec job);
  Ack set_scenario(std::optional<ScenarioScript> scenario);

  std::shared_ptr<const JobSpec> job() const;
  std::optional<ScenarioScript> scenario() const;

  Ack post(const Command& command);

  /// Throws NotFound when no run exists.
  std::shared_ptr<const Snapshot> state() const;

  /// Wire events with seq >= from. Throws NotFound without a run and
  /// RangeError when `from` is negative or beyond the next sequence number.
  std::vector<nlohmann::ordered_json> events_from(std::int64_t from) const;

  /// Blocks until an event with seq >= from exists, the run finishes or the
  /// timeout expires. True when events are available.
  bool wait_for_events(std::int64_t from, std::chrono::milliseconds timeout) const;

  /// Log file of the current run. Throws NotFound without a run.
  std::filesystem::path log_path() const;

  /// Advances the active run by up to `n` ticks; no-op when paused or done.
  void tick(std::uint64_t n = 1);

  /// Blocks until the active run finishes. Throws NotFound without a run.
  void wait_until_finished() const;

 private:
  struct Run;

  Ack reject(const std::string& reason) const;
  void advance_locked();
  void publish_locked();
  void publish_service_event_locked(EventKind kind);
  void drive();

  ServiceConfig config_;
  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::shared_ptr<const JobSpec> job_;
  std::optional<ScenarioScript> scenario_;
  std::unique_ptr<Run> run_;
  std::int64_t next_run_id_ = 1;
  bool stopping_ = false;
  std::thread driver_;
};

/// HTTP front end for a Service. Routes live under /api/v1.
class HttpFrontend {
 public:
  explicit HttpFrontend(Service& service);
  ~HttpFrontend();

  /// Binds and serves until stop(). Returns false if binding failed.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and returns it, or -1.
  int bind_any_port(const std::string& host);
  /// Serves on a socket bound by bind_any_port().
  bool listen_after_bind();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hrc
