#pragma once

#include <vector>

namespace dash {

// Partition of batch indices 0..n-1 into groups that share one prompt.
struct GroupIndex {
  std::vector<std::vector<int>> groups;

  // n consecutive indices split into groups of `group_size`.
  static GroupIndex contiguous(int n, int group_size);
  // One group covering the whole batch.
  static GroupIndex whole_batch(int n);

  int batch_size() const;
  void validate(int batch_size) const;  // disjoint cover, every group nonempty
};

enum class BaselineKind { Batch, Group };

struct AdvantageBatch {
  std::vector<double> advantages;
  BaselineKind baseline = BaselineKind::Batch;
  bool normalized = false;
  std::vector<char> kept;  // only filter_by_threshold clears entries

  int size() const { return static_cast<int>(advantages.size()); }
  int kept_count() const;
  double filtered_fraction() const;
  double mean_abs_kept() const;
};

// A_n = r_n - mean(r): the centered reward with the batch-mean baseline.
AdvantageBatch single_path_advantage(const std::vector<double>& rewards);

// A_n = r_n - mean over n's group: the state-dependent baseline.
AdvantageBatch group_advantage(const std::vector<double>& rewards, const GroupIndex& groups);

// A_n = r_n - mean of n's group excluding n; requires every group size >= 2.
AdvantageBatch leave_one_out(const std::vector<double>& rewards, const GroupIndex& groups);

// Divides each advantage by (its group's reward std + eps). Off by default:
// bounded rewards keep the scale stable without it.
AdvantageBatch normalize_std(const AdvantageBatch& adv, const std::vector<double>& rewards,
                             const GroupIndex& groups, double eps);

// kept = |A_n| > tau, strictly: ties at tau drop, so tau = 0 drops exactly
// the identically-zero advantages. Advantage values are left unchanged.
AdvantageBatch filter_by_threshold(const AdvantageBatch& adv, double tau);

}  // namespace dash
