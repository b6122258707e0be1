#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hrc/job.hpp"
#include "json.hpp"

namespace hrc {

enum class MessageKind { ReassignHuman, DelegateToRobot, DelegateToHuman };

/// Operator or robot request to move a task between the two schedules.
struct Message {
  AgentId sender = AgentId::Human;
  MessageKind kind = MessageKind::ReassignHuman;
  TaskId task = 0;
  double timestamp = 0.0;

  static Message reassign(TaskId t, double at = 0.0) {
    return {AgentId::Human, MessageKind::ReassignHuman, t, at};
  }
  static Message delegate_to_robot(TaskId t, double at = 0.0) {
    return {AgentId::Human, MessageKind::DelegateToRobot, t, at};
  }
  static Message delegate_to_human(TaskId t, double at = 0.0) {
    return {AgentId::Robot, MessageKind::DelegateToHuman, t, at};
  }

  bool operator==(const Message&) const = default;
};

const char* to_string(MessageKind kind) noexcept;

enum class EventKind {
  RunStarted,
  TaskStarted,
  TaskCompleted,
  HomingInserted,
  HomingStarted,
  HomingCompleted,
  RescheduleApplied,
  MessageReceived,
  MessageRejected,
  Delegation,
  Reassignment,
  TaskRetry,
  RobotHeld,
  SpeedChanged,
  RobotFailureInjected,
  ConfirmReceived,
  ConfirmRejected,
  Paused,
  Resumed,
  State,
  RunCompleted,
};

const char* to_string(EventKind kind) noexcept;

/// One scheduler or simulator occurrence. Only the fields relevant to the
/// kind are set.
struct Event {
  EventKind kind = EventKind::State;
  double clock = 0.0;
  std::optional<AgentId> agent;
  std::optional<TaskId> task;
  std::optional<Message> message;
  std::string reason;
  double value = 0.0;  // budget, speed factor
  // RescheduleApplied: old/new robot list, fill candidates and chosen set.
  // State: human and robot lists.
  TaskList before, after, candidates, fill;
  // State only.
  MaybeTask human_task, robot_task;
  std::set<TaskId> done;

  bool operator==(const Event&) const = default;
};

nlohmann::ordered_json to_json(const Message& message);
Message message_from_json(const nlohmann::ordered_json& j);

/// Keys come out in a fixed order, so equal events serialize to equal bytes.
nlohmann::ordered_json to_json(const Event& event);
Event event_from_json(const nlohmann::ordered_json& j);

}  // namespace hrc
