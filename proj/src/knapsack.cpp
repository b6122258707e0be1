#include "hrc/knapsack.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "hrc/errors.hpp"

namespace hrc {

namespace {

struct Item {
  TaskId id;
  double duration;
};

// Include-first depth-first search over items sorted by id. Partial sums
// accumulate in id order, so every total matches a left-to-right sum over
// the chosen ids.
class SubsetSearch {
 public:
  SubsetSearch(std::vector<Item> items, double budget) : items_(std::move(items)), budget_(budget) {
    tail_.assign(items_.size() + 1, 0.0);
    for (std::size_t i = items_.size(); i-- > 0;) tail_[i] = tail_[i + 1] + items_[i].duration;
  }

  std::vector<TaskId> run() {
    search(0, 0.0);
    return best_;
  }

 private:
  void search(std::size_t depth, double total) {
    if (total + tail_[depth] < best_total_ - kFillTolerance) return;
    if (depth == items_.size()) {
      offer(total);
      return;
    }
    const Item& item = items_[depth];
    if (total + item.duration <= budget_ + kFillTolerance) {
      chosen_.push_back(item.id);
      search(depth + 1, total + item.duration);
      chosen_.pop_back();
    }
    search(depth + 1, total);
  }

  void offer(double total) {
    const bool better = total > best_total_ + kFillTolerance;
    const bool tie = !better && total >= best_total_ - kFillTolerance;
    if (better || (tie && std::lexicographical_compare(chosen_.begin(), chosen_.end(),
                                                       best_.begin(), best_.end()))) {
      best_ = chosen_;
      best_total_ = total;
    }
  }

  std::vector<Item> items_;
  double budget_;
  std::vector<double> tail_;
  std::vector<TaskId> chosen_, best_;
  double best_total_ = -1.0;
};

}  // namespace

TaskList knapsack_fill(const TaskList& candidates, double budget,
                       std::span<const double> durations) {
  if (durations.size() != candidates.size()) {
    throw ContractViolation("knapsack_fill: one duration per candidate required");
  }
  if (budget <= 0.0 || candidates.empty()) return {};

  std::vector<Item> items;
  items.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) items.push_back({candidates[i], durations[i]});
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.id < b.id; });
  return TaskList(SubsetSearch(std::move(items), budget).run());
}

}  // namespace hrc
