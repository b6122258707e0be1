// hrcell: command-line front end for the collaborative cell scheduler.

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <pthread.h>
#include <thread>

#include "CLI11.hpp"
#include "hrc/api.hpp"
#include "hrc/errors.hpp"

namespace {

using namespace hrc;

struct SimFlags {
  double tick = SimConfig{}.tick;
  double timeout_factor = SchedulerConfig{}.timeout_factor;
  double homing_duration = SchedulerConfig{}.homing_duration;
  std::uint64_t seed = 0;
  std::string references;

  SimConfig config() const {
    SimConfig c;
    c.tick = tick;
    c.seed = seed;
    c.scheduler.timeout_factor = timeout_factor;
    c.scheduler.homing_duration = homing_duration;
    if (!references.empty()) {
      std::ifstream in(references);
      if (!in) throw ParseError("cannot open reference file '" + references + "'", 0);
      c.references = load_references(in);
      if (!c.references->traces().empty()) {
        c.dimension = c.references->traces().begin()->second.dimension();
      }
    }
    return c;
  }

  void add_to(CLI::App* app) {
    app->add_option("--tick", tick, "Simulation tick, normalized units")
        ->envname("HRC_TICK")
        ->check(CLI::PositiveNumber);
    app->add_option("--timeout-factor", timeout_factor, "Robot timeout as a multiple of t_R")
        ->envname("HRC_TIMEOUT_FACTOR")
        ->check(CLI::PositiveNumber);
    app->add_option("--homing", homing_duration, "Homing duration, normalized units")
        ->envname("HRC_HOMING")
        ->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Seed mixed with the scenario seed")->envname("HRC_SEED");
    app->add_option("--references", references, "Reference trajectory library")
        ->check(CLI::ExistingFile);
  }
};

std::string list_text(const TaskList& list) {
  std::ostringstream out;
  out << list;
  return out.str();
}

void print_assignment(const JobSpec& job, const AssignmentSolution& s) {
  std::cout << "job " << job.name() << " (" << job.size() << " tasks)\n"
            << "L_H " << list_text(s.human_list) << "\n"
            << "L_R " << list_text(s.robot_list) << "\n"
            << std::setprecision(6) << "c " << s.cycle_time << "\n"
            << "objective " << s.objective << "\n";
}

void print_metrics(const RunMetrics& m) {
  std::cout << std::fixed << std::setprecision(4) << "makespan    " << m.makespan << "\n"
            << "robot idle  " << m.robot_idle << "\n"
            << "human idle  " << m.human_idle << "\n"
            << "reschedules " << m.reschedules << "\n"
            << "messages    " << m.messages_received << " received, " << m.messages_rejected
            << " rejected\n"
            << "task  agent  start   finish\n";
  for (const TaskRecord& r : m.tasks) {
    std::cout << std::setw(4) << r.task << "  " << std::setw(5) << to_string(r.agent) << "  "
              << r.start << "  " << r.finish << "\n";
  }
}

std::string describe_event(const Event& e) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << std::setw(9) << e.clock << "  "
      << to_string(e.kind);
  if (e.agent) out << ' ' << to_string(*e.agent);
  if (e.kind == EventKind::State) {
    out << " T_H=" << (e.human_task ? std::to_string(*e.human_task) : "-")
        << " T_R=" << (e.robot_task ? std::to_string(*e.robot_task) : "-") << " L_H=" << e.before
        << " L_R=" << e.after;
    return out.str();
  }
  if (e.task) out << " task " << *e.task;
  if (e.kind == EventKind::RescheduleApplied) {
    out << " budget " << e.value << ' ' << e.before << " -> " << e.after;
  }
  if (e.kind == EventKind::SpeedChanged) out << " factor " << e.value;
  if (!e.reason.empty()) out << " (" << e.reason << ')';
  return out.str();
}

std::pair<std::string, int> parse_listen(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw ValidationError("listen address must be host:port");
  std::string host = addr.substr(0, colon);
  if (host.empty()) host = "0.0.0.0";
  int port = 0;
  try {
    port = std::stoi(addr.substr(colon + 1));
  } catch (const std::exception&) {
    throw ValidationError("bad port in listen address '" + addr + "'");
  }
  if (port < 0 || port > 65535) throw ValidationError("port out of range");
  return {host, port};
}

int serve(const std::string& job_path, const std::string& scenario_path,
          const std::string& listen, const SimFlags& flags, const std::string& log_dir,
          int tick_interval_ms, bool autostart) {
  // Handle termination signals on a dedicated thread.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ServiceConfig config;
  config.sim = flags.config();
  config.log_dir = log_dir;
  config.tick_interval = std::chrono::milliseconds(tick_interval_ms);
  Service service(config);
  service.set_job(load_job_file(job_path));
  if (!scenario_path.empty()) {
    const Ack ack = service.set_scenario(load_scenario_file(scenario_path));
    if (!ack.accepted) throw ValidationError("scenario rejected: " + ack.reason);
  }
  if (autostart) {
    Command start;
    const Ack ack = service.post(start);
    if (!ack.accepted) throw ValidationError("run not started: " + ack.reason);
  }

  const auto [host, port] = parse_listen(listen);
  HttpFrontend http(service);
  std::thread waiter([&http, signals] {
    int received = 0;
    sigwait(&signals, &received);
    http.stop();
  });
  std::cerr << "listening on " << host << ':' << port << "\n";
  const bool ok = http.listen(host, port);
  if (!ok) {
    std::cerr << "hrcell: cannot listen on " << listen << "\n";
    pthread_kill(waiter.native_handle(), SIGTERM);
  }
  waiter.join();
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Human-robot collaborative cell: task assignment, dynamic scheduling, simulation"};
  app.require_subcommand(1);
  app.fallthrough();
  bool json = false;
  app.add_flag("--json", json, "Machine-readable output");

  auto* assign = app.add_subcommand("assign", "Solve the nominal assignment of a job");
  std::string job_path;
  int max_exact = SolveOptions{}.max_exact_tasks;
  assign->add_option("jobfile", job_path, "Job file")->required()->check(CLI::ExistingFile);
  assign->add_option("--max-exact", max_exact, "Largest job solved exactly");

  auto* simulate = app.add_subcommand("simulate", "Run a scenario and print run metrics");
  std::string scenario_path, log_path;
  bool baseline = false;
  SimFlags sim_flags;
  simulate->add_option("jobfile", job_path, "Job file")->required()->check(CLI::ExistingFile);
  simulate->add_option("scenario", scenario_path, "Scenario file")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--log", log_path, "Write the event log here");
  simulate->add_flag("--baseline", baseline, "Disable robot-list rescheduling");
  sim_flags.add_to(simulate);

  auto* replay = app.add_subcommand("replay", "Re-emit a recorded event log");
  std::string event_log;
  bool text = false;
  replay->add_option("eventlog", event_log, "Event log (JSON lines)")
      ->required()
      ->check(CLI::ExistingFile);
  replay->add_flag("--text", text, "One readable line per event instead of JSON lines");

  auto* serve_cmd = app.add_subcommand("serve", "Serve the live cell over HTTP");
  std::string listen = "127.0.0.1:8080";
  std::string log_dir = "runs";
  int tick_interval_ms = 10;
  bool autostart = false;
  serve_cmd->add_option("--job", job_path, "Job file")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--scenario", scenario_path, "Scenario file")->check(CLI::ExistingFile);
  serve_cmd->add_option("--listen", listen, "host:port")->envname("HRC_LISTEN");
  serve_cmd->add_option("--log-dir", log_dir, "Directory for run logs")->envname("HRC_LOG_DIR");
  serve_cmd->add_option("--tick-interval-ms", tick_interval_ms, "Wall time per tick")
      ->envname("HRC_TICK_INTERVAL_MS")
      ->check(CLI::NonNegativeNumber);
  serve_cmd->add_flag("--autostart", autostart, "Start a run immediately");
  sim_flags.add_to(serve_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*assign) {
      const JobSpec job = load_job_file(job_path);
      const AssignmentSolution s = solve_assignment(job, SolveOptions{max_exact});
      if (json) {
        std::cout << to_json(s).dump(2) << "\n";
      } else {
        print_assignment(job, s);
      }
    } else if (*simulate) {
      const JobSpec job = load_job_file(job_path);
      const ScenarioScript script = load_scenario_file(scenario_path);
      const SimConfig config = sim_flags.config();
      const RunResult result =
          baseline ? baseline_run(job, script, config) : run_scenario(job, script, config);
      if (!log_path.empty()) {
        std::ofstream out(log_path);
        if (!out) throw ValidationError("cannot write '" + log_path + "'");
        write_event_log(out, result.events);
      }
      if (json) {
        std::cout << to_json(result.metrics).dump(2) << "\n";
      } else {
        print_metrics(result.metrics);
      }
    } else if (*replay) {
      std::ifstream in(event_log);
      const std::vector<Event> events = read_event_log(in);
      if (text) {
        for (const Event& e : events) std::cout << describe_event(e) << "\n";
      } else {
        write_event_log(std::cout, events);
      }
    } else if (*serve_cmd) {
      return serve(job_path, scenario_path, listen, sim_flags, log_dir, tick_interval_ms,
                   autostart);
    }
  } catch (const ParseError& e) {
    std::cerr << "hrcell: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "hrcell: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
