#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dash/policy.hpp"
#include "dash/trajectory.hpp"
#include "dash/vocab.hpp"

namespace dash {

enum class TaskKind { Add, Mod, Reverse, Parity, Micro };
enum class Verbosity { Terse, Stepwise };

TaskKind task_kind_from_string(const std::string& s);
std::string to_string(TaskKind k);

// A synthetic verifiable task: prompt generator, binary trajectory-level
// reward, and a programmatic expert-trace generator. The reasoning/answer
// boundary is the '#' delimiter; the reward parses the text after the final
// delimiter and compares it exactly with the canonical answer.
struct TaskSpec {
  TaskKind kind = TaskKind::Add;
  int difficulty = 1;
  Vocab vocab;

  static TaskSpec make(TaskKind kind, int difficulty);
};

struct ProblemInstance {
  std::vector<int> prompt;  // token ids, BOS first
  std::string answer;       // canonical answer text
  std::uint64_t seed = 0;
};

struct RewardValue {
  double r = 0.0;  // binary: 0 or 1
};

// Deterministic per seed; operands/strings uniform at the given difficulty.
ProblemInstance generate_instance(const TaskSpec& task, std::uint64_t seed);

// 1 iff the text after the final delimiter equals the canonical answer after
// whitespace trimming. No delimiter, or anything else, is an ordinary 0.
RewardValue reward(const TaskSpec& task, const ProblemInstance& instance,
                   const Trajectory& traj);

// Programmatic expert trace; always earns reward 1. Terse emits only
// "#answer"; Stepwise spells out per-element intermediate steps first.
// Expert traces are not generated by a policy, so their recorded per-token
// log-probs are filled with zeros.
Trajectory expert_trajectory(const TaskSpec& task, const ProblemInstance& instance,
                             Verbosity verbosity);

struct EnumeratedTrajectory {
  Trajectory traj;
  // Exact probability of this trajectory under the given parameters.
  std::function<double(const PolicyParams&)> probability;
};

// Exhaustive enumeration of completions up to max_len with EOS-termination
// semantics: sequences ending in EOS at length <= max_len, plus all
// EOS-free sequences of exactly max_len. BOS is never generated. Throws
// CapacityError when |sampleable|^max_len > 10^6.
std::vector<EnumeratedTrajectory> enumerate_all_trajectories(const Vocab& vocab,
                                                             const std::vector<int>& prompt,
                                                             int max_len);
std::vector<EnumeratedTrajectory> enumerate_all_trajectories(const TaskSpec& micro_task,
                                                             const std::vector<int>& prompt,
                                                             int max_len);

// Line-delimited export/import of instance sets for reproducible splits.
void export_instances(const std::string& path, const TaskSpec& task,
                      const std::vector<ProblemInstance>& instances);
std::vector<ProblemInstance> import_instances(const std::string& path, const TaskSpec& task);

}  // namespace dash
