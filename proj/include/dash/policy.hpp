#pragma once

#include <cstdint>
#include <vector>

#include "dash/tensors.hpp"
#include "dash/trajectory.hpp"

namespace dash {

struct LogProbResult {
  double total = 0.0;
  std::vector<double> per_token;
};

struct KlResult {
  double value = 0.0;
  GradientVector grad;
};

// Exact log-probability of the completion under `params`:
// per_token[t] = log softmax(logits_t)[y_t], total = sum. Deterministic, and
// bit-identical to the values recorded by sample() for the same params.
LogProbResult log_prob(const PolicyParams& params, const Trajectory& traj);

// Draws a completion token by token. Sampling uses softmax(logits /
// temperature); the recorded per-token log-probs are evaluated at
// temperature 1 (the training distribution). Stops at EOS or after max_len
// tokens (further capped by the context window). Deterministic per seed.
Trajectory sample(const PolicyParams& params, const std::vector<int>& prompt,
                  int max_len, double temperature, std::uint64_t seed);

// Argmax decoding (the temperature -> 0 limit; ties break to the lowest id).
std::vector<int> greedy_decode(const PolicyParams& params,
                               const std::vector<int>& prompt, int max_len);

// Exact gradient of log_prob(params, traj).total with respect to every
// parameter tensor, by a reverse-mode pass over the fixed architecture.
GradientVector grad_log_prob(const PolicyParams& params, const Trajectory& traj);

// Sum over the trajectory's token positions of the exact categorical KL
// D(pi_base(.|context) || pi_params(.|context)) between full next-token
// distributions, with its exact gradient w.r.t. `params`. The trajectory
// supplies the Monte Carlo sample of contexts.
KlResult kl_term(const PolicyParams& params, const PolicyParams& base,
                 const Trajectory& traj);

// Next-token distribution after the given context (temperature 1). BOS, when
// configured, has probability 0. Exposed for enumeration oracles and tests.
std::vector<double> next_token_probs(const PolicyParams& params,
                                     const std::vector<int>& context);

}  // namespace dash
