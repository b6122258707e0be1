#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "hrc/errors.hpp"
#include "hrc/sim.hpp"
#include "support.hpp"

namespace hrc {
namespace {

std::map<TaskId, AgentId> executors(const RunMetrics& m) {
  std::map<TaskId, AgentId> out;
  for (const TaskRecord& r : m.tasks) out[r.task] = r.agent;
  return out;
}

std::vector<const Event*> of_kind(const std::vector<Event>& events, EventKind kind) {
  std::vector<const Event*> out;
  for (const Event& e : events) {
    if (e.kind == kind) out.push_back(&e);
  }
  return out;
}

SimConfig fine_config() {
  SimConfig c;
  c.tick = 0.005;  // divides every assembly job duration
  return c;
}

void expect_metric_invariants(const JobSpec& job, const RunResult& r) {
  const RunMetrics& m = r.metrics;
  ASSERT_EQ(m.tasks.size(), job.size());
  double last_completion = 0.0;
  for (const Event* e : of_kind(r.events, EventKind::TaskCompleted)) last_completion = e->clock;
  EXPECT_EQ(m.makespan, last_completion);
  for (std::size_t i = 0; i < m.tasks.size(); ++i) {
    EXPECT_EQ(m.tasks[i].task, TaskId(i + 1));
    EXPECT_LE(m.tasks[i].start, m.tasks[i].finish);
    EXPECT_LE(m.tasks[i].finish, m.makespan + 1e-12);
  }
  double human_finish = 0.0, robot_finish = 0.0;
  for (const Event* e : of_kind(r.events, EventKind::TaskCompleted)) {
    (e->agent == AgentId::Human ? human_finish : robot_finish) = e->clock;
  }
  for (const Event* e : of_kind(r.events, EventKind::HomingCompleted)) robot_finish = std::max(robot_finish, e->clock);
  EXPECT_NEAR(m.human_busy + m.human_idle, human_finish, 1e-9);
  EXPECT_NEAR(m.robot_busy + m.robot_idle, robot_finish, 1e-9);
  EXPECT_LE(std::max(human_finish, robot_finish), m.makespan);
  EXPECT_GE(m.human_idle, 0.0);
  EXPECT_GE(m.robot_idle, 0.0);
}

TEST(Simulation, NominalRunReachesTheCycleTime) {
  const JobSpec job = testing::assembly_job();
  const RunResult r = run_scenario(job, {}, fine_config());
  EXPECT_NEAR(r.metrics.makespan, 2.875, 1e-9);
  const auto who = executors(r.metrics);
  for (TaskId t = 1; t <= 6; ++t) EXPECT_EQ(who.at(t), AgentId::Human);
  for (TaskId t = 7; t <= 11; ++t) EXPECT_EQ(who.at(t), AgentId::Robot);
  EXPECT_NEAR(r.metrics.human_idle, 0.0, 1e-9);
  expect_metric_invariants(job, r);
}

TEST(Simulation, NominalRunAtDefaultTick) {
  // t_H = 0.375 is not a multiple of 0.01; every human task rounds up one tick.
  const JobSpec job = testing::assembly_job();
  const RunResult r = run_scenario(job, {}, {});
  EXPECT_NEAR(r.metrics.makespan, 2.9, 1e-9);
  expect_metric_invariants(job, r);
}

TEST(Simulation, NominalBaselineLeavesTask11Last) {
  // Without reordering the short task 11 cannot move into the gap after 7.
  const JobSpec job = testing::assembly_job();
  const RunResult with = run_scenario(job, {}, fine_config());
  const RunResult without = baseline_run(job, {}, fine_config());
  EXPECT_EQ(without.metrics.reschedules, 0);
  EXPECT_GE(with.metrics.reschedules, 1);
  EXPECT_NEAR(without.metrics.makespan, 3.125, 1e-9);
  EXPECT_EQ(executors(with.metrics), executors(without.metrics));
  EXPECT_LT(with.metrics.robot_idle, without.metrics.robot_idle);
  expect_metric_invariants(job, without);
}

TEST(Simulation, PreparatoryTasksGateTheRobot) {
  const JobSpec job = testing::assembly_job();
  const RunResult r = run_scenario(job, {}, fine_config());
  double prep_done = 0.0;
  for (const TaskRecord& t : r.metrics.tasks) {
    if (t.task <= 2) prep_done = std::max(prep_done, t.finish);
  }
  for (const TaskRecord& t : r.metrics.tasks) {
    if (t.agent == AgentId::Robot) EXPECT_GE(t.start, prep_done);
  }
}

TEST(Simulation, DelegateOnlyScriptMatchesBaselineMapping) {
  const JobSpec job = testing::assembly_job();
  ScenarioScript script;
  script.events.push_back(ScenarioEvent::operator_message(0.2, Message::delegate_to_robot(2)));
  script.events.push_back(ScenarioEvent::operator_message(1.0, Message::delegate_to_robot(5)));
  const RunResult with = run_scenario(job, script, {});
  const RunResult without = baseline_run(job, script, {});
  EXPECT_EQ(executors(with.metrics), executors(without.metrics));
  EXPECT_EQ(executors(with.metrics).at(2), AgentId::Robot);
  EXPECT_EQ(executors(with.metrics).at(5), AgentId::Robot);
}

TEST(Simulation, RobotFailureEndsWithHumanTakeover) {
  const JobSpec job = testing::assembly_job();
  ScenarioScript script;
  script.events.push_back(ScenarioEvent::robot_failure(0.0, 7));
  const RunResult r = run_scenario(job, script, {});
  EXPECT_EQ(executors(r.metrics).at(7), AgentId::Human);
  ASSERT_FALSE(of_kind(r.events, EventKind::HomingStarted).empty());
  const auto delegations = of_kind(r.events, EventKind::Delegation);
  ASSERT_EQ(delegations.size(), 1u);
  EXPECT_EQ(delegations[0]->agent, AgentId::Human);
  EXPECT_EQ(delegations[0]->task, MaybeTask(7));
  expect_metric_invariants(job, r);
}

TEST(Simulation, RobotOnlyTaskIsRetried) {
  std::vector<TaskSpec> tasks(2);
  tasks[0].id = 1;
  tasks[0].human_duration = 0.2;
  tasks[1].id = 2;
  tasks[1].robot_duration = 0.1;
  tasks[1].human_executable = false;
  const JobSpec job("retry", tasks);
  ScenarioScript script;
  script.events.push_back(ScenarioEvent::robot_failure(0.0, 2));
  Simulation sim(job, script, {}, TaskList{1}, TaskList{2});
  sim.run_to_completion();
  const RunResult r{sim.metrics(), sim.events()};
  ASSERT_EQ(of_kind(r.events, EventKind::TaskRetry).size(), 1u);
  EXPECT_EQ(executors(r.metrics).at(2), AgentId::Robot);
  // Fails until the timeout at twice t_R, then one clean attempt.
  EXPECT_NEAR(r.metrics.tasks[1].finish, 0.2 + 0.1, 1e-9);
}

TEST(Simulation, ConfirmEndsTheHumanTaskEarly) {
  const JobSpec job = testing::assembly_job();
  ScenarioScript script;
  script.events.push_back(ScenarioEvent::confirm(0.1, 1));
  script.events.push_back(ScenarioEvent::confirm(0.1, 4));
  const RunResult r = run_scenario(job, script, {});
  EXPECT_NEAR(r.metrics.tasks[0].finish, 0.11, 1e-9);
  EXPECT_EQ(of_kind(r.events, EventKind::ConfirmReceived).size(), 1u);
  const auto rejected = of_kind(r.events, EventKind::ConfirmRejected);
  ASSERT_EQ(rejected.size(), 1u);
  EXPECT_EQ(rejected[0]->reason, "not-current");
}

TEST(Simulation, SlowerHumanRaisesRemainingTime) {
  const JobSpec job = testing::assembly_job();
  Simulation nominal(job, {}, {});
  Simulation slowed(job, {}, {});
  while (nominal.clock() < 0.7 - 1e-9) {
    nominal.advance();
    slowed.advance();
  }
  ASSERT_TRUE(slowed.inject(ScenarioEvent::speed(0.0, 0.5)).accepted);
  for (int i = 0; i < 15; ++i) {
    nominal.advance();
    slowed.advance();
  }
  EXPECT_EQ(slowed.human_speed(), 0.5);
  EXPECT_GT(slowed.human_remaining(), nominal.human_remaining());
}

TEST(Simulation, InjectedMessageAppearsAtTheNextTick) {
  const JobSpec job = testing::assembly_job();
  Simulation sim(job, {}, {});
  for (int i = 0; i < 20; ++i) sim.advance();
  const double clock = sim.clock();
  ASSERT_TRUE(sim.inject(ScenarioEvent::operator_message(0.0, Message::delegate_to_robot(2))).accepted);
  sim.advance();
  const auto received = of_kind(sim.events(), EventKind::MessageReceived);
  ASSERT_EQ(received.size(), 1u);
  EXPECT_NEAR(received[0]->clock, clock + 0.01, 1e-12);
  EXPECT_NEAR(received[0]->message->timestamp, clock, 1e-12);
}

TEST(Simulation, InjectGuards) {
  const JobSpec job = testing::assembly_job();
  Simulation sim(job, {}, {});
  EXPECT_EQ(sim.inject(ScenarioEvent::confirm(0.0, 12)).reason, "unknown-task");
  EXPECT_EQ(sim.inject(ScenarioEvent::speed(0.0, 0.0)).reason, "invalid-factor");
  sim.run_to_completion();
  const InjectAck late = sim.inject(ScenarioEvent::speed(0.0, 0.5));
  EXPECT_FALSE(late.accepted);
  EXPECT_EQ(late.reason, "not-running");
}

TEST(Simulation, RejectsScriptsForOtherJobs) {
  const JobSpec job = testing::assembly_job();
  ScenarioScript script;
  script.events.push_back(ScenarioEvent::robot_failure(0.5, 12));
  EXPECT_THROW(run_scenario(job, script, {}), ValidationError);
  ScenarioScript unsorted;
  unsorted.events.push_back(ScenarioEvent::speed(0.5, 0.8));
  unsorted.events.push_back(ScenarioEvent::speed(0.1, 0.8));
  EXPECT_THROW(validate_scenario(unsorted, job), ValidationError);
  ScenarioScript stopped;
  stopped.events.push_back(ScenarioEvent::speed(0.5, 0.0));
  EXPECT_THROW(validate_scenario(stopped, job), ValidationError);
  SimConfig bad;
  bad.tick = 0.0;
  EXPECT_THROW(run_scenario(job, {}, bad), ValidationError);
}

TEST(Simulation, UnmonitoredTasksFallBackToElapsedTime) {
  const JobSpec job = testing::assembly_job();
  SimConfig config = fine_config();
  config.references = ReferenceLibrary{};
  const RunResult r = run_scenario(job, {}, config);
  EXPECT_NEAR(r.metrics.makespan, 2.875, 1e-9);
}

TEST(Simulation, SameInputsSameLog) {
  const JobSpec job = testing::assembly_job();
  std::mt19937_64 rng(5);
  const ScenarioScript script = testing::random_storm(rng, job, 3.0);
  std::ostringstream a, b;
  write_event_log(a, run_scenario(job, script, {}).events);
  write_event_log(b, run_scenario(job, script, {}).events);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Simulation, SeedChangesTrajectoriesOnly) {
  const JobSpec job = testing::assembly_job();
  SimConfig a, b;
  b.seed = 1234;
  // Jitter feeds the monitor, not task end conditions.
  EXPECT_EQ(executors(run_scenario(job, {}, a).metrics),
            executors(run_scenario(job, {}, b).metrics));
  EXPECT_EQ(run_scenario(job, {}, a).metrics.makespan, run_scenario(job, {}, b).metrics.makespan);
}

TEST(ScenarioFile, RoundTrip) {
  std::mt19937_64 rng(2);
  const JobSpec job = testing::assembly_job();
  for (int i = 0; i < 50; ++i) {
    const ScenarioScript script = testing::random_storm(rng, job, 3.0);
    std::stringstream buffer;
    save_scenario(buffer, script);
    EXPECT_EQ(load_scenario(buffer), script);
  }
}

TEST(ScenarioFile, ParsesEveryEventKind) {
  std::istringstream in(
      "# experiment\nseed 42\n"
      "at 0.1 speed 0.5\nat 0.2 robot_failure 7\nat 0.3 reassign 9\n"
      "at 0.4 delegate 2\nat 0.5 robot_delegate 8\nat 0.6 confirm 3\n");
  const ScenarioScript s = load_scenario(in);
  EXPECT_EQ(s.seed, 42u);
  ASSERT_EQ(s.events.size(), 6u);
  EXPECT_EQ(s.events[0].kind, ScenarioEvent::Kind::HumanSpeedFactor);
  EXPECT_EQ(s.events[1].kind, ScenarioEvent::Kind::RobotFailure);
  EXPECT_EQ(s.events[2].message, Message::reassign(9, 0.3));
  EXPECT_EQ(s.events[3].message, Message::delegate_to_robot(2, 0.4));
  EXPECT_EQ(s.events[4].message, Message::delegate_to_human(8, 0.5));
  EXPECT_EQ(s.events[5].kind, ScenarioEvent::Kind::HumanConfirmDone);
}

TEST(ScenarioFile, RejectsMalformedInput) {
  for (const char* text : {"at 0.1 jump 3\n", "at 0.1 speed\n", "seed x\n", "at 0.1 confirm 2.5\n",
                           "bogus\n", "at 0.1 speed 0.5 extra\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(load_scenario(in), ParseError) << text;
  }
  std::istringstream unsorted("at 0.5 speed 1\nat 0.1 speed 1\n");
  EXPECT_THROW(load_scenario(unsorted), ValidationError);
}

TEST(EventLog, RoundTrip) {
  const JobSpec job = testing::assembly_job();
  std::mt19937_64 rng(9);
  const RunResult r = run_scenario(job, testing::random_storm(rng, job, 3.0), {});
  std::stringstream buffer;
  write_event_log(buffer, r.events);
  const std::vector<Event> again = read_event_log(buffer);
  ASSERT_EQ(again.size(), r.events.size());
  for (std::size_t i = 0; i < again.size(); ++i) EXPECT_EQ(again[i], r.events[i]) << i;
}

TEST(EventLog, RejectsBrokenSequences) {
  std::istringstream garbage("{not json\n");
  EXPECT_THROW(read_event_log(garbage), ParseError);
  std::istringstream backwards(
      "{\"seq\":1,\"type\":\"run-started\",\"clock\":0.0}\n"
      "{\"seq\":0,\"type\":\"run-started\",\"clock\":0.0}\n");
  EXPECT_THROW(read_event_log(backwards), ParseError);
  std::istringstream no_seq("{\"type\":\"run-started\",\"clock\":0.0}\n");
  EXPECT_THROW(read_event_log(no_seq), ParseError);
}

TEST(Metrics, JsonShape) {
  const JobSpec job = testing::assembly_job();
  const RunResult r = run_scenario(job, {}, {});
  const auto j = to_json(r.metrics);
  EXPECT_EQ(j.at("type"), "run-metrics");
  EXPECT_EQ(j.at("tasks").size(), 11u);
  EXPECT_EQ(j.at("makespan").get<double>(), r.metrics.makespan);
  const auto a = to_json(solve_assignment(job));
  EXPECT_EQ(a.at("L_H"), nlohmann::ordered_json({1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(a.at("x_R"), nlohmann::ordered_json({0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1}));
}

}  // namespace
}  // namespace hrc
