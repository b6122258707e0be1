#include "hrc/job.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "hrc/errors.hpp"

namespace hrc {

const char* to_string(AgentId agent) noexcept {
  return agent == AgentId::Robot ? "robot" : "human";
}

JobSpec::JobSpec(std::string name, std::vector<TaskSpec> tasks, double normalization_base)
    : name_(std::move(name)), tasks_(std::move(tasks)), normalization_base_(normalization_base) {
  if (tasks_.empty()) throw ValidationError("job has no tasks");
  if (!(normalization_base_ > 0.0) || !std::isfinite(normalization_base_)) {
    throw ValidationError("normalization base must be positive");
  }
  std::sort(tasks_.begin(), tasks_.end(),
            [](const TaskSpec& a, const TaskSpec& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    const TaskSpec& t = tasks_[i];
    if (i > 0 && t.id == tasks_[i - 1].id) {
      throw ValidationError("duplicate task id " + std::to_string(t.id));
    }
    if (t.id != static_cast<TaskId>(i + 1)) {
      throw ValidationError("task ids must form 1..N without gaps (missing " +
                            std::to_string(i + 1) + ")");
    }
    const auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(t.robot_weight) || !positive(t.human_weight)) {
      throw ValidationError("task " + std::to_string(t.id) + ": weights must be positive");
    }
    if (!positive(t.robot_duration) || !positive(t.human_duration)) {
      throw ValidationError("task " + std::to_string(t.id) + ": durations must be positive");
    }
    if (!t.robot_executable && !t.human_executable) {
      throw ValidationError("task " + std::to_string(t.id) + " is executable by neither agent");
    }
  }
}

const TaskSpec& JobSpec::task(TaskId id) const {
  if (!contains(id)) throw ContractViolation("unknown task id " + std::to_string(id));
  return tasks_[static_cast<std::size_t>(id - 1)];
}

// --- TaskList ---------------------------------------------------------------

TaskList::TaskList(std::initializer_list<TaskId> ids) : TaskList(std::vector<TaskId>(ids)) {}

TaskList::TaskList(std::vector<TaskId> ids) : ids_(std::move(ids)) {
  std::unordered_set<TaskId> seen;
  for (TaskId id : ids_) {
    if (!seen.insert(id).second) {
      throw ContractViolation("duplicate task id " + std::to_string(id) + " in list");
    }
  }
}

bool TaskList::contains(TaskId id) const noexcept {
  return std::find(ids_.begin(), ids_.end(), id) != ids_.end();
}

std::optional<std::size_t> TaskList::index_of(TaskId id) const noexcept {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

std::ostream& operator<<(std::ostream& os, const TaskList& list) {
  os << '(';
  for (std::size_t i = 0; i < list.size(); ++i) os << (i ? "," : "") << list[i];
  return os << ')';
}

MaybeTask next(MaybeTask t, const TaskList& list) {
  if (!t) {
    if (list.empty()) return std::nullopt;
    return list.front();
  }
  const auto pos = list.index_of(*t);
  if (!pos) throw ContractViolation("next: task " + std::to_string(*t) + " not in list");
  if (*pos + 1 == list.size()) return std::nullopt;
  return list[*pos + 1];
}

std::pair<TaskList, TaskList> split(TaskId t, const TaskList& list) {
  const auto pos = list.index_of(t);
  if (!pos) throw ContractViolation("split: task " + std::to_string(t) + " not in list");
  const auto cut = list.begin() + static_cast<std::ptrdiff_t>(*pos + 1);
  return {TaskList(std::vector<TaskId>(list.begin(), cut)),
          TaskList(std::vector<TaskId>(cut, list.end()))};
}

TaskList push(TaskId t, const TaskList& list) {
  if (list.contains(t)) {
    throw ContractViolation("push: task " + std::to_string(t) + " already in list");
  }
  std::vector<TaskId> ids;
  ids.reserve(list.size() + 1);
  ids.push_back(t);
  ids.insert(ids.end(), list.begin(), list.end());
  return TaskList(std::move(ids));
}

TaskList erase(TaskId t, const TaskList& list) {
  std::vector<TaskId> ids = list.ids();
  std::erase(ids, t);
  return TaskList(std::move(ids));
}

TaskList concat(const TaskList& a, const TaskList& b, const TaskList& c) {
  std::vector<TaskId> ids;
  ids.reserve(a.size() + b.size() + c.size());
  for (const TaskList* part : {&a, &b, &c}) ids.insert(ids.end(), part->begin(), part->end());
  try {
    return TaskList(std::move(ids));
  } catch (const ContractViolation&) {
    throw ContractViolation("concat: lists overlap");
  }
}

// --- job file ---------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_flag(const std::string& token, int line) {
  if (token == "1" || token == "true" || token == "yes") return true;
  if (token == "0" || token == "false" || token == "no") return false;
  throw ParseError("bad boolean '" + token + "'", line);
}

double parse_number(const std::string& token, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ParseError("bad number '" + token + "'", line);
  }
  if (used != token.size()) throw ParseError("bad number '" + token + "'", line);
  return v;
}

struct RawTask {
  TaskSpec spec;  // durations still in seconds
  int line;
};

// Smallest perturbation of value * base that divides back to value exactly.
double raw_seconds(double value, double base) {
  double raw = value * base;
  if (raw / base == value) return raw;
  double up = raw, down = raw;
  for (int i = 0; i < 8; ++i) {
    up = std::nextafter(up, std::numeric_limits<double>::infinity());
    if (up / base == value) return up;
    down = std::nextafter(down, 0.0);
    if (down / base == value) return down;
  }
  return raw;
}

}  // namespace

JobSpec load_job(std::istream& in) {
  std::string name = "job";
  std::optional<double> base;
  std::vector<RawTask> raw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    std::istringstream fields(line);
    std::string keyword;
    fields >> keyword;
    if (keyword == "job") {
      std::string rest;
      std::getline(fields, rest);
      name = trim(rest);
      if (name.empty()) throw ParseError("job name missing", lineno);
    } else if (keyword == "normalization_base") {
      std::string token, extra;
      if (!(fields >> token) || (fields >> extra)) {
        throw ParseError("normalization_base takes one value", lineno);
      }
      base = parse_number(token, lineno);
    } else if (keyword == "task") {
      std::string tok[8];
      for (auto& t : tok) {
        if (!(fields >> t)) throw ParseError("task record needs 8 fields before the label", lineno);
      }
      TaskSpec spec;
      const double id = parse_number(tok[0], lineno);
      if (id != std::floor(id) || id < 1 || id > 1e6) {
        throw ParseError("task id must be a positive integer", lineno);
      }
      spec.id = static_cast<TaskId>(id);
      spec.robot_weight = parse_number(tok[1], lineno);
      spec.robot_duration = parse_number(tok[2], lineno);
      spec.human_weight = parse_number(tok[3], lineno);
      spec.human_duration = parse_number(tok[4], lineno);
      spec.robot_executable = parse_flag(tok[5], lineno);
      spec.human_executable = parse_flag(tok[6], lineno);
      spec.preparatory = parse_flag(tok[7], lineno);
      std::string label;
      std::getline(fields, label);
      spec.label = trim(label);
      raw.push_back({std::move(spec), lineno});
    } else {
      throw ParseError("unknown keyword '" + keyword + "'", lineno);
    }
  }
  if (raw.empty()) throw ValidationError("job has no tasks");

  double longest = 0.0;
  for (const auto& r : raw) {
    longest = std::max({longest, r.spec.robot_duration, r.spec.human_duration});
  }
  if (!base) base = longest;
  if (!(*base > 0.0)) throw ValidationError("normalization_base must be positive");
  if (std::abs(*base - longest) > 1e-9 * *base) {
    throw ValidationError("normalization_base must equal the longest nominal duration");
  }

  std::vector<TaskSpec> tasks;
  tasks.reserve(raw.size());
  for (auto& r : raw) {
    TaskSpec t = std::move(r.spec);
    if (!(t.robot_duration > 0.0) || !(t.human_duration > 0.0)) {
      throw ValidationError("task " + std::to_string(t.id) + ": durations must be positive");
    }
    t.robot_duration /= *base;
    t.human_duration /= *base;
    tasks.push_back(std::move(t));
  }
  return JobSpec(std::move(name), std::move(tasks), *base);
}

JobSpec load_job_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open job file '" + path + "'", 0);
  return load_job(in);
}

void save_job(std::ostream& out, const JobSpec& job) {
  const double base = job.normalization_base();
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "job " << job.name() << '\n';
  out << "normalization_base " << base << '\n';
  for (const TaskSpec& t : job.tasks()) {
    out << "task " << t.id << ' ' << t.robot_weight << ' ' << raw_seconds(t.robot_duration, base)
        << ' ' << t.human_weight << ' ' << raw_seconds(t.human_duration, base) << ' '
        << int(t.robot_executable) << ' ' << int(t.human_executable) << ' '
        << int(t.preparatory);
    if (!t.label.empty()) out << ' ' << t.label;
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace hrc
