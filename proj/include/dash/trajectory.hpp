#pragma once

#include <vector>

namespace dash {

// A prompt plus an autoregressively generated completion. log_probs are
// per-completion-token log-probabilities in nats, evaluated at temperature 1
// under the snapshot that generated the completion. Completions end with EOS
// unless generation hit the length cap.
struct Trajectory {
  std::vector<int> prompt;
  std::vector<int> completion;
  std::vector<double> log_probs;

  int generation_length() const { return static_cast<int>(completion.size()); }
  double total_log_prob() const {
    double s = 0.0;
    for (double v : log_probs) s += v;
    return s;
  }
};

}  // namespace dash
