#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hrc/errors.hpp"
#include "hrc/job.hpp"

namespace hrc {

/// Multivariate trace, one column per sample (rows = dimension D).
template <typename Scalar>
using SeriesMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct TimeSeries {
  SeriesMatrix<Scalar> samples;
  Scalar sample_period = Scalar(1);

  Eigen::Index dimension() const { return samples.rows(); }
  Eigen::Index length() const { return samples.cols(); }
};

using Trace = TimeSeries<double>;

/// Open-ended DTW against one reference, fed one input sample at a time.
///
/// Keeps the last row of the cumulative cost table: entry j is the cost of
/// aligning the whole input seen so far with reference samples 0..j under
/// the symmetric (match, insertion, deletion) step pattern and Euclidean
/// sample distance. Each push costs O(reference length).
template <typename Scalar>
class OpenEndedDtw {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit OpenEndedDtw(SeriesMatrix<Scalar> reference) : reference_(std::move(reference)) {
    if (reference_.cols() == 0) throw ContractViolation("OE-DTW reference is empty");
    row_.resize(reference_.cols());
  }

  template <typename Derived>
  void push(const Eigen::MatrixBase<Derived>& sample) {
    if (sample.size() != reference_.rows()) {
      throw ContractViolation("OE-DTW sample dimension " + std::to_string(sample.size()) +
                              " does not match reference dimension " +
                              std::to_string(reference_.rows()));
    }
    const Eigen::Index m = reference_.cols();
    if (samples_ == 0) {
      row_(0) = distance(sample, 0);
      for (Eigen::Index j = 1; j < m; ++j) row_(j) = distance(sample, j) + row_(j - 1);
    } else {
      Scalar diagonal = row_(0);  // previous row, column j - 1
      row_(0) = distance(sample, 0) + row_(0);
      for (Eigen::Index j = 1; j < m; ++j) {
        const Scalar above = row_(j);
        row_(j) = distance(sample, j) + std::min({diagonal, above, row_(j - 1)});
        diagonal = above;
      }
    }
    ++samples_;
  }

  Eigen::Index samples_seen() const { return samples_; }
  Eigen::Index reference_length() const { return reference_.cols(); }
  const Vector& cumulative_costs() const { return row_; }

  /// Reference index best matched by the input so far; on equal cost the
  /// later index wins. Meaningless before the first sample.
  Eigen::Index best_endpoint() const {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < row_.size(); ++j) {
      if (row_(j) <= row_(best)) best = j;
    }
    return best;
  }

  /// Fraction of the reference covered by the input, 0 with no input.
  Scalar completion() const {
    if (samples_ == 0) return Scalar(0);
    return Scalar(best_endpoint() + 1) / Scalar(reference_.cols());
  }

 private:
  // Sequential sum, so results do not depend on vectorization.
  template <typename Derived>
  Scalar distance(const Eigen::MatrixBase<Derived>& sample, Eigen::Index j) const {
    Scalar sum(0);
    for (Eigen::Index d = 0; d < reference_.rows(); ++d) {
      const Scalar diff = Scalar(sample(d)) - reference_(d, j);
      sum += diff * diff;
    }
    using std::sqrt;
    return sqrt(sum);
  }

  SeriesMatrix<Scalar> reference_;
  Vector row_;
  Eigen::Index samples_ = 0;
};

/// Completion fraction of an input prefix against a reference.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar oe_dtw_completion(const Eigen::MatrixBase<DerivedA>& prefix,
                                            const Eigen::MatrixBase<DerivedB>& reference) {
  using Scalar = typename DerivedA::Scalar;
  if (reference.cols() == 0) throw ContractViolation("OE-DTW reference is empty");
  if (prefix.cols() > 0 && prefix.rows() != reference.rows()) {
    throw ContractViolation("OE-DTW prefix and reference dimensions differ");
  }
  OpenEndedDtw<Scalar> dtw(reference.template cast<Scalar>());
  for (Eigen::Index i = 0; i < prefix.cols(); ++i) dtw.push(prefix.col(i));
  return dtw.completion();
}

struct ProgressEstimate {
  double completion = 0.0;  // in [0, 1]
  double remaining = 0.0;   // t_res, normalized units
  bool degraded = false;    // elapsed-time fallback, no reference
};

/// t_res = (1 - completion) * t_H. Throws ContractViolation for an unknown
/// task or a completion outside [0, 1].
ProgressEstimate estimate_remaining(TaskId task, double completion, const JobSpec& job);

/// One reference trace per monitored task.
class ReferenceLibrary {
 public:
  void add(TaskId task, Trace trace);
  const Trace* find(TaskId task) const;
  bool contains(TaskId task) const { return find(task) != nullptr; }
  std::size_t size() const { return traces_.size(); }
  const std::map<TaskId, Trace>& traces() const { return traces_; }

 private:
  std::map<TaskId, Trace> traces_;
};

// Reference library file:
//
//   reference <task id> <D> <sample_period seconds>
//   <x_1> ... <x_D>        one line per sample
//   end
//
ReferenceLibrary load_references(std::istream& in);
void save_references(std::ostream& out, const ReferenceLibrary& library);

/// Smooth synthetic wrist trajectory for a task: `dimension` channels,
/// `samples` columns, distinct per task id.
Trace synthetic_reference(TaskId task, Eigen::Index samples, Eigen::Index dimension,
                          double sample_period);

/// Progress monitor for one human task execution. Reported completion
/// never decreases while the same task runs.
class HumanMonitor {
 public:
  HumanMonitor(const JobSpec& job, const ReferenceLibrary& references);

  /// Starts monitoring a new execution of `task`.
  void start(TaskId task);
  MaybeTask task() const { return task_; }

  /// Feeds one live sample; `elapsed` (normalized) drives the fallback
  /// when the task has no reference.
  template <typename Derived>
  ProgressEstimate observe(const Eigen::MatrixBase<Derived>& sample, double elapsed) {
    if (!task_) throw ContractViolation("HumanMonitor: no task started");
    double raw = 0.0;
    bool degraded = false;
    if (dtw_) {
      dtw_->push(sample);
      raw = dtw_->completion();
    } else {
      degraded = true;
      raw = std::clamp(elapsed / job_.task(*task_).human_duration, 0.0, 1.0);
    }
    best_ = std::max(best_, raw);
    ProgressEstimate estimate = estimate_remaining(*task_, best_, job_);
    estimate.degraded = degraded;
    return estimate;
  }

  bool degraded() const { return task_ && !dtw_; }

 private:
  const JobSpec& job_;
  const ReferenceLibrary& references_;
  MaybeTask task_;
  std::optional<OpenEndedDtw<double>> dtw_;
  double best_ = 0.0;
};

/// monitorH on a whole live prefix: OE-DTW completion turned into t_res,
/// or the elapsed-time fallback when the task has no reference.
ProgressEstimate monitor_human(TaskId task, const SeriesMatrix<double>& live_prefix,
                               const ReferenceLibrary& references, const JobSpec& job,
                               double elapsed = 0.0);

}  // namespace hrc
