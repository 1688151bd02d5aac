#include "dash/advantage.hpp"

#include <cmath>

#include "dash/errors.hpp"

namespace dash {

GroupIndex GroupIndex::contiguous(int n, int group_size) {
  if (n <= 0 || group_size <= 0 || n % group_size != 0)
    throw InputError("contiguous grouping requires group_size dividing n");
  GroupIndex g;
  for (int start = 0; start < n; start += group_size) {
    std::vector<int> grp(group_size);
    for (int i = 0; i < group_size; ++i) grp[i] = start + i;
    g.groups.push_back(std::move(grp));
  }
  return g;
}

GroupIndex GroupIndex::whole_batch(int n) { return contiguous(n, n); }

int GroupIndex::batch_size() const {
  int n = 0;
  for (const auto& g : groups) n += static_cast<int>(g.size());
  return n;
}

void GroupIndex::validate(int batch_size) const {
  std::vector<char> seen(batch_size, 0);
  int covered = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw InputError("group index contains an empty group");
    for (int i : g) {
      if (i < 0 || i >= batch_size) throw InputError("group index out of range");
      if (seen[i]) throw InputError("group index assigns an item twice");
      seen[i] = 1;
      ++covered;
    }
  }
  if (covered != batch_size) throw InputError("group index does not cover the batch");
}

int AdvantageBatch::kept_count() const {
  int n = 0;
  for (char k : kept) n += (k != 0);
  return n;
}

double AdvantageBatch::filtered_fraction() const {
  if (kept.empty()) return 0.0;
  return 1.0 - static_cast<double>(kept_count()) / static_cast<double>(kept.size());
}

double AdvantageBatch::mean_abs_kept() const {
  double s = 0.0;
  int n = 0;
  for (int i = 0; i < size(); ++i) {
    if (kept[i]) {
      s += std::fabs(advantages[i]);
      ++n;
    }
  }
  return n > 0 ? s / n : 0.0;
}

AdvantageBatch single_path_advantage(const std::vector<double>& rewards) {
  if (rewards.empty()) throw InputError("advantage of an empty batch");
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(rewards.size());
  AdvantageBatch out;
  out.baseline = BaselineKind::Batch;
  out.advantages.reserve(rewards.size());
  for (double r : rewards) out.advantages.push_back(r - mean);
  out.kept.assign(rewards.size(), 1);
  return out;
}

AdvantageBatch group_advantage(const std::vector<double>& rewards, const GroupIndex& groups) {
  if (rewards.empty()) throw InputError("advantage of an empty batch");
  groups.validate(static_cast<int>(rewards.size()));
  AdvantageBatch out;
  out.baseline = BaselineKind::Group;
  out.advantages.assign(rewards.size(), 0.0);
  for (const auto& g : groups.groups) {
    double mean = 0.0;
    for (int i : g) mean += rewards[i];
    mean /= static_cast<double>(g.size());
    for (int i : g) out.advantages[i] = rewards[i] - mean;
  }
  out.kept.assign(rewards.size(), 1);
  return out;
}

AdvantageBatch leave_one_out(const std::vector<double>& rewards, const GroupIndex& groups) {
  if (rewards.empty()) throw InputError("advantage of an empty batch");
  groups.validate(static_cast<int>(rewards.size()));
  for (const auto& g : groups.groups)
    if (g.size() < 2) throw InputError("leave-one-out needs every group size >= 2");
  AdvantageBatch out;
  out.baseline = BaselineKind::Group;
  out.advantages.assign(rewards.size(), 0.0);
  for (const auto& g : groups.groups) {
    double sum = 0.0;
    for (int i : g) sum += rewards[i];
    const double denom = static_cast<double>(g.size() - 1);
    for (int i : g) out.advantages[i] = rewards[i] - (sum - rewards[i]) / denom;
  }
  out.kept.assign(rewards.size(), 1);
  return out;
}

AdvantageBatch normalize_std(const AdvantageBatch& adv, const std::vector<double>& rewards,
                             const GroupIndex& groups, double eps) {
  if (adv.normalized) throw InputError("advantages are already normalized");
  if (static_cast<int>(rewards.size()) != adv.size())
    throw InputError("rewards and advantages disagree on batch size");
  groups.validate(adv.size());
  AdvantageBatch out = adv;
  for (const auto& g : groups.groups) {
    double mean = 0.0;
    for (int i : g) mean += rewards[i];
    mean /= static_cast<double>(g.size());
    double var = 0.0;
    for (int i : g) var += (rewards[i] - mean) * (rewards[i] - mean);
    var /= static_cast<double>(g.size());
    const double denom = std::sqrt(var) + eps;
    for (int i : g) out.advantages[i] = adv.advantages[i] / denom;
  }
  out.normalized = true;
  return out;
}

AdvantageBatch filter_by_threshold(const AdvantageBatch& adv, double tau) {
  if (!(tau >= 0.0)) throw InputError("filter threshold must be >= 0");
  AdvantageBatch out = adv;
  for (int i = 0; i < out.size(); ++i) out.kept[i] = std::fabs(out.advantages[i]) > tau;
  return out;
}

}  // namespace dash
