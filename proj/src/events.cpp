#include "hrc/events.hpp"

#include <array>
#include <utility>

#include "hrc/errors.hpp"

namespace hrc {

namespace {

constexpr std::array<std::pair<EventKind, const char*>, 21> kEventNames{{
    {EventKind::RunStarted, "run-started"},
    {EventKind::TaskStarted, "task-started"},
    {EventKind::TaskCompleted, "task-completed"},
    {EventKind::HomingInserted, "homing-inserted"},
    {EventKind::HomingStarted, "homing-started"},
    {EventKind::HomingCompleted, "homing-completed"},
    {EventKind::RescheduleApplied, "reschedule-applied"},
    {EventKind::MessageReceived, "message-received"},
    {EventKind::MessageRejected, "message-rejected"},
    {EventKind::Delegation, "delegation"},
    {EventKind::Reassignment, "reassignment"},
    {EventKind::TaskRetry, "task-retry"},
    {EventKind::RobotHeld, "robot-held"},
    {EventKind::SpeedChanged, "speed-changed"},
    {EventKind::RobotFailureInjected, "robot-failure-injected"},
    {EventKind::ConfirmReceived, "confirm-received"},
    {EventKind::ConfirmRejected, "confirm-rejected"},
    {EventKind::Paused, "paused"},
    {EventKind::Resumed, "resumed"},
    {EventKind::State, "state"},
    {EventKind::RunCompleted, "run-completed"},
}};

bool carries_value(EventKind kind) {
  return kind == EventKind::RescheduleApplied || kind == EventKind::SpeedChanged ||
         kind == EventKind::State;
}

AgentId agent_from(const std::string& s) {
  if (s == "human") return AgentId::Human;
  if (s == "robot") return AgentId::Robot;
  throw ParseError("unknown agent '" + s + "'", 0);
}

nlohmann::ordered_json list_json(const TaskList& list) { return list.ids(); }

TaskList list_from(const nlohmann::ordered_json& j) {
  return TaskList(j.get<std::vector<TaskId>>());
}

nlohmann::ordered_json maybe_json(const MaybeTask& t) {
  return t ? nlohmann::ordered_json(*t) : nlohmann::ordered_json(nullptr);
}

MaybeTask maybe_from(const nlohmann::ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<TaskId>();
}

}  // namespace

const char* to_string(MessageKind kind) noexcept {
  switch (kind) {
    case MessageKind::ReassignHuman:
      return "reassign";
    case MessageKind::DelegateToRobot:
      return "delegate-to-robot";
    case MessageKind::DelegateToHuman:
      return "delegate-to-human";
  }
  return "?";
}

const char* to_string(EventKind kind) noexcept {
  for (const auto& [k, name] : kEventNames) {
    if (k == kind) return name;
  }
  return "?";
}

nlohmann::ordered_json to_json(const Message& m) {
  return {{"sender", to_string(m.sender)},
          {"kind", to_string(m.kind)},
          {"task", m.task},
          {"timestamp", m.timestamp}};
}

Message message_from_json(const nlohmann::ordered_json& j) {
  Message m;
  m.sender = agent_from(j.at("sender").get<std::string>());
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "reassign") {
    m.kind = MessageKind::ReassignHuman;
  } else if (kind == "delegate-to-robot") {
    m.kind = MessageKind::DelegateToRobot;
  } else if (kind == "delegate-to-human") {
    m.kind = MessageKind::DelegateToHuman;
  } else {
    throw ParseError("unknown message kind '" + kind + "'", 0);
  }
  m.task = j.at("task").get<TaskId>();
  m.timestamp = j.at("timestamp").get<double>();
  return m;
}

nlohmann::ordered_json to_json(const Event& e) {
  nlohmann::ordered_json j;
  j["type"] = to_string(e.kind);
  j["clock"] = e.clock;
  if (e.agent) j["agent"] = to_string(*e.agent);
  if (e.task) j["task"] = *e.task;
  if (e.message) j["message"] = to_json(*e.message);
  if (!e.reason.empty()) j["reason"] = e.reason;
  if (carries_value(e.kind)) j["value"] = e.value;
  if (e.kind == EventKind::RescheduleApplied) {
    j["before"] = list_json(e.before);
    j["after"] = list_json(e.after);
    j["candidates"] = list_json(e.candidates);
    j["fill"] = list_json(e.fill);
  } else if (e.kind == EventKind::State) {
    j["T_H"] = maybe_json(e.human_task);
    j["T_R"] = maybe_json(e.robot_task);
    j["L_H"] = list_json(e.before);
    j["L_R"] = list_json(e.after);
    j["done"] = e.done;
  }
  return j;
}

Event event_from_json(const nlohmann::ordered_json& j) {
  Event e;
  const auto type = j.at("type").get<std::string>();
  bool known = false;
  for (const auto& [k, name] : kEventNames) {
    if (type == name) {
      e.kind = k;
      known = true;
    }
  }
  if (!known) throw ParseError("unknown event type '" + type + "'", 0);
  e.clock = j.at("clock").get<double>();
  if (j.contains("agent")) e.agent = agent_from(j["agent"].get<std::string>());
  if (j.contains("task")) e.task = j["task"].get<TaskId>();
  if (j.contains("message")) e.message = message_from_json(j["message"]);
  if (j.contains("reason")) e.reason = j["reason"].get<std::string>();
  if (carries_value(e.kind)) e.value = j.at("value").get<double>();
  if (e.kind == EventKind::RescheduleApplied) {
    e.before = list_from(j.at("before"));
    e.after = list_from(j.at("after"));
    e.candidates = list_from(j.at("candidates"));
    e.fill = list_from(j.at("fill"));
  } else if (e.kind == EventKind::State) {
    e.human_task = maybe_from(j.at("T_H"));
    e.robot_task = maybe_from(j.at("T_R"));
    e.before = list_from(j.at("L_H"));
    e.after = list_from(j.at("L_R"));
    e.done = j.at("done").get<std::set<TaskId>>();
  }
  return e;
}

}  // namespace hrc
