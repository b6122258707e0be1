#include "hrc/monitor.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace hrc {

ProgressEstimate estimate_remaining(TaskId task, double completion, const JobSpec& job) {
  if (!(completion >= 0.0 && completion <= 1.0)) {
    throw ContractViolation("completion must lie in [0, 1]");
  }
  const double nominal = job.task(task).human_duration;
  return {completion, (1.0 - completion) * nominal, false};
}

void ReferenceLibrary::add(TaskId task, Trace trace) {
  if (trace.length() == 0 || trace.dimension() == 0) {
    throw ValidationError("reference for task " + std::to_string(task) + " is empty");
  }
  if (!(trace.sample_period > 0.0)) {
    throw ValidationError("reference sample period must be positive");
  }
  if (!traces_.emplace(task, std::move(trace)).second) {
    throw ValidationError("duplicate reference for task " + std::to_string(task));
  }
}

const Trace* ReferenceLibrary::find(TaskId task) const {
  const auto it = traces_.find(task);
  return it == traces_.end() ? nullptr : &it->second;
}

ReferenceLibrary load_references(std::istream& in) {
  ReferenceLibrary library;
  std::string line;
  int lineno = 0;
  struct Pending {
    TaskId task;
    Eigen::Index dimension;
    double period;
    std::vector<double> values;
    int line;
  };
  std::optional<Pending> open;

  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string head;
    if (!(fields >> head)) continue;

    if (head == "reference") {
      if (open) throw ParseError("reference block not closed with 'end'", lineno);
      long task = 0, dim = 0;
      double period = 0.0;
      if (!(fields >> task >> dim >> period)) {
        throw ParseError("expected: reference <task> <D> <sample_period>", lineno);
      }
      if (dim < 1) throw ParseError("dimension must be at least 1", lineno);
      open = Pending{static_cast<TaskId>(task), dim, period, {}, lineno};
    } else if (head == "end") {
      if (!open) throw ParseError("'end' without 'reference'", lineno);
      const auto n = static_cast<Eigen::Index>(open->values.size()) / open->dimension;
      Trace trace;
      trace.sample_period = open->period;
      trace.samples = Eigen::Map<const SeriesMatrix<double>>(open->values.data(),
                                                             open->dimension, n);
      library.add(open->task, std::move(trace));
      open.reset();
    } else {
      if (!open) throw ParseError("sample outside a reference block", lineno);
      std::istringstream values(line);
      double v = 0.0;
      Eigen::Index count = 0;
      while (values >> v) {
        open->values.push_back(v);
        ++count;
      }
      if (!values.eof()) throw ParseError("bad number in sample", lineno);
      if (count != open->dimension) {
        throw ParseError("sample has " + std::to_string(count) + " values, expected " +
                             std::to_string(open->dimension),
                         lineno);
      }
    }
  }
  if (open) throw ParseError("reference block not closed with 'end'", open->line);
  return library;
}

void save_references(std::ostream& out, const ReferenceLibrary& library) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& [task, trace] : library.traces()) {
    out << "reference " << task << ' ' << trace.dimension() << ' ' << trace.sample_period
        << '\n';
    for (Eigen::Index j = 0; j < trace.length(); ++j) {
      for (Eigen::Index d = 0; d < trace.dimension(); ++d) {
        out << (d ? " " : "") << trace.samples(d, j);
      }
      out << '\n';
    }
    out << "end\n";
  }
  out.precision(old_precision);
}

Trace synthetic_reference(TaskId task, Eigen::Index samples, Eigen::Index dimension,
                          double sample_period) {
  if (samples < 1 || dimension < 1) throw ContractViolation("synthetic reference needs size");
  Trace trace;
  trace.sample_period = sample_period;
  trace.samples.resize(dimension, samples);
  const double two_pi = 2.0 * std::numbers::pi;
  for (Eigen::Index j = 0; j < samples; ++j) {
    const double u = samples > 1 ? double(j) / double(samples - 1) : 0.0;
    for (Eigen::Index d = 0; d < dimension; ++d) {
      const double phase = 0.7 * task + 1.3 * double(d);
      const double frequency = 0.5 + 0.25 * double((task + d) % 3);
      // Channel 0 carries a ramp so consecutive samples never coincide.
      const double drift = d == 0 ? 0.5 : 0.1 * (d % 2 ? -1.0 : 1.0);
      trace.samples(d, j) = 0.3 * std::sin(two_pi * frequency * u + phase) + drift * u;
    }
  }
  return trace;
}

HumanMonitor::HumanMonitor(const JobSpec& job, const ReferenceLibrary& references)
    : job_(job), references_(references) {}

void HumanMonitor::start(TaskId task) {
  job_.task(task);
  task_ = task;
  best_ = 0.0;
  dtw_.reset();
  if (const Trace* ref = references_.find(task)) dtw_.emplace(ref->samples);
}

ProgressEstimate monitor_human(TaskId task, const SeriesMatrix<double>& live_prefix,
                               const ReferenceLibrary& references, const JobSpec& job,
                               double elapsed) {
  HumanMonitor monitor(job, references);
  monitor.start(task);
  if (!references.contains(task) || live_prefix.cols() == 0) {
    if (references.contains(task)) return estimate_remaining(task, 0.0, job);
    ProgressEstimate e = estimate_remaining(
        task, std::clamp(elapsed / job.task(task).human_duration, 0.0, 1.0), job);
    e.degraded = true;
    return e;
  }
  ProgressEstimate estimate;
  for (Eigen::Index i = 0; i < live_prefix.cols(); ++i) {
    estimate = monitor.observe(live_prefix.col(i), elapsed);
  }
  return estimate;
}

}  // namespace hrc
