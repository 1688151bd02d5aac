#include "dash/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dash/errors.hpp"
#include "dash/rng.hpp"

namespace dash {
namespace {

const char* kBos = "<s>";
const char* kEos = "</s>";

std::vector<std::string> chars(const std::string& s) {
  std::vector<std::string> out;
  for (char c : s) out.emplace_back(1, c);
  return out;
}

Vocab build_vocab(TaskKind kind) {
  std::vector<std::string> toks{kBos, kEos};
  switch (kind) {
    case TaskKind::Add: {
      auto t = chars("0123456789+=,#");
      toks.insert(toks.end(), t.begin(), t.end());
      break;
    }
    case TaskKind::Mod: {
      auto t = chars("0123456789%=,#");
      toks.insert(toks.end(), t.begin(), t.end());
      break;
    }
    case TaskKind::Reverse: {
      auto t = chars("abcd>,#");
      toks.insert(toks.end(), t.begin(), t.end());
      break;
    }
    case TaskKind::Parity: {
      auto t = chars("01=,#");
      toks.insert(toks.end(), t.begin(), t.end());
      break;
    }
    case TaskKind::Micro: {
      auto t = chars("#ab");
      toks.insert(toks.end(), t.begin(), t.end());
      break;
    }
  }
  return Vocab::from_tokens(std::move(toks), kBos, kEos, "#");
}

std::uint64_t uniform_with_digits(Rng& rng, int digits) {
  if (digits == 1) return rng.below(10);
  std::uint64_t lo = 1;
  for (int i = 1; i < digits; ++i) lo *= 10;
  const std::uint64_t hi = lo * 10 - 1;
  return lo + rng.below(hi - lo + 1);
}

std::vector<int> encode_prompt(const Vocab& v, const std::string& body) {
  std::vector<int> out{v.bos()};
  auto ids = v.encode_chars(body);
  out.insert(out.end(), ids.begin(), ids.end());
  return out;
}

void append_chars(const Vocab& v, std::vector<int>& out, const std::string& s) {
  auto ids = v.encode_chars(s);
  out.insert(out.end(), ids.begin(), ids.end());
}

}  // namespace

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "add") return TaskKind::Add;
  if (s == "mod") return TaskKind::Mod;
  if (s == "reverse") return TaskKind::Reverse;
  if (s == "parity") return TaskKind::Parity;
  if (s == "micro") return TaskKind::Micro;
  throw InputError("unknown task kind: " + s);
}

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::Add: return "add";
    case TaskKind::Mod: return "mod";
    case TaskKind::Reverse: return "reverse";
    case TaskKind::Parity: return "parity";
    case TaskKind::Micro: return "micro";
  }
  return "?";
}

TaskSpec TaskSpec::make(TaskKind kind, int difficulty) {
  if (difficulty < 1) throw InputError("task difficulty must be >= 1");
  TaskSpec t{kind, difficulty, build_vocab(kind)};
  if (kind == TaskKind::Micro && t.vocab.size() > 5)
    throw InputError("micro task vocab must stay enumerable");
  return t;
}

ProblemInstance generate_instance(const TaskSpec& task, std::uint64_t seed) {
  Rng rng(seed);
  const Vocab& v = task.vocab;
  ProblemInstance inst;
  inst.seed = seed;
  switch (task.kind) {
    case TaskKind::Add: {
      const std::uint64_t a = uniform_with_digits(rng, task.difficulty);
      const std::uint64_t b = uniform_with_digits(rng, task.difficulty);
      inst.prompt = encode_prompt(v, std::to_string(a) + "+" + std::to_string(b) + "=");
      inst.answer = std::to_string(a + b);
      break;
    }
    case TaskKind::Mod: {
      const std::uint64_t a = uniform_with_digits(rng, task.difficulty);
      const std::uint64_t m = 2 + rng.below(8);  // modulus in [2, 9]
      inst.prompt = encode_prompt(v, std::to_string(a) + "%" + std::to_string(m) + "=");
      inst.answer = std::to_string(a % m);
      break;
    }
    case TaskKind::Reverse: {
      std::string s;
      for (int i = 0; i < task.difficulty; ++i) s += static_cast<char>('a' + rng.below(4));
      std::string r(s.rbegin(), s.rend());
      inst.prompt = encode_prompt(v, s + ">");
      inst.answer = r;
      break;
    }
    case TaskKind::Parity: {
      std::string s;
      int ones = 0;
      for (int i = 0; i < task.difficulty; ++i) {
        const int bit = static_cast<int>(rng.below(2));
        ones += bit;
        s += static_cast<char>('0' + bit);
      }
      inst.prompt = encode_prompt(v, s + "=");
      inst.answer = (ones % 2 == 1) ? "1" : "0";
      break;
    }
    case TaskKind::Micro: {
      const char q = rng.below(2) == 0 ? 'a' : 'b';
      inst.prompt = encode_prompt(v, std::string(1, q));
      inst.answer = std::string(1, q);
      break;
    }
  }
  return inst;
}

RewardValue reward(const TaskSpec& task, const ProblemInstance& instance,
                   const Trajectory& traj) {
  const Vocab& v = task.vocab;
  int last_delim = -1;
  int end = static_cast<int>(traj.completion.size());
  for (int i = 0; i < static_cast<int>(traj.completion.size()); ++i) {
    const int tok = traj.completion[i];
    if (tok == v.eos()) {
      end = i;
      break;
    }
    if (tok == v.delim()) last_delim = i;
  }
  if (last_delim < 0) return {0.0};
  std::string text;
  for (int i = last_delim + 1; i < end; ++i) text += v.token(traj.completion[i]);
  const auto first = text.find_first_not_of(" \t");
  const auto last = text.find_last_not_of(" \t");
  text = (first == std::string::npos) ? "" : text.substr(first, last - first + 1);
  return {text == instance.answer ? 1.0 : 0.0};
}

Trajectory expert_trajectory(const TaskSpec& task, const ProblemInstance& instance,
                             Verbosity verbosity) {
  const Vocab& v = task.vocab;
  Trajectory traj;
  traj.prompt = instance.prompt;
  std::vector<int>& out = traj.completion;
  const std::string body = v.decode(std::vector<int>(instance.prompt.begin() + 1,
                                                     instance.prompt.end()));
  if (verbosity == Verbosity::Stepwise) {
    switch (task.kind) {
      case TaskKind::Add: {
        const auto plus = body.find('+');
        const auto eq = body.find('=');
        std::string a = body.substr(0, plus);
        std::string b = body.substr(plus + 1, eq - plus - 1);
        const int w = static_cast<int>(std::max(a.size(), b.size()));
        // One column per step, least significant first: "a_i+b_i[+1]=ct,"
        // where c is the outgoing carry and t the column digit.
        int carry = 0;
        for (int i = 0; i < w; ++i) {
          const int da = i < static_cast<int>(a.size()) ? a[a.size() - 1 - i] - '0' : 0;
          const int db = i < static_cast<int>(b.size()) ? b[b.size() - 1 - i] - '0' : 0;
          const int total = da + db + carry;
          std::string step = std::to_string(da) + "+" + std::to_string(db);
          if (carry) step += "+1";
          step += "=";
          step += static_cast<char>('0' + total / 10);
          step += static_cast<char>('0' + total % 10);
          step += ",";
          append_chars(v, out, step);
          carry = total / 10;
        }
        break;
      }
      case TaskKind::Mod: {
        const auto pct = body.find('%');
        const auto eq = body.find('=');
        const std::string a = body.substr(0, pct);
        const int m = std::stoi(body.substr(pct + 1, eq - pct - 1));
        long long r = 0;
        for (char c : a) {
          r = (r * 10 + (c - '0')) % m;
          append_chars(v, out, std::to_string(r) + ",");
        }
        break;
      }
      case TaskKind::Reverse: {
        const std::string s = body.substr(0, body.size() - 1);  // strip '>'
        for (auto it = s.rbegin(); it != s.rend(); ++it)
          append_chars(v, out, std::string(1, *it) + ",");
        break;
      }
      case TaskKind::Parity: {
        const std::string s = body.substr(0, body.size() - 1);  // strip '='
        int r = 0;
        for (char c : s) {
          r ^= (c - '0');
          append_chars(v, out, std::string(1, static_cast<char>('0' + r)) + ",");
        }
        break;
      }
      case TaskKind::Micro:
        break;  // nothing to spell out
    }
  }
  out.push_back(v.delim());
  append_chars(v, out, instance.answer);
  out.push_back(v.eos());
  traj.log_probs.assign(out.size(), 0.0);
  return traj;
}

std::vector<EnumeratedTrajectory> enumerate_all_trajectories(const Vocab& vocab,
                                                             const std::vector<int>& prompt,
                                                             int max_len) {
  if (max_len < 0) throw InputError("max_len must be nonnegative");
  const int n_sampleable = vocab.num_sampleable();
  double bound = 1.0;
  for (int i = 0; i < max_len; ++i) {
    bound *= n_sampleable;
    if (bound > 1e6) throw CapacityError("trajectory enumeration bound exceeded");
  }

  std::vector<EnumeratedTrajectory> out;
  std::vector<int> ids;
  for (int i = 0; i < vocab.size(); ++i)
    if (vocab.sampleable(i)) ids.push_back(i);

  auto emit = [&](const std::vector<int>& completion) {
    Trajectory t;
    t.prompt = prompt;
    t.completion = completion;
    t.log_probs.assign(completion.size(), 0.0);
    out.push_back(EnumeratedTrajectory{
        t, [t](const PolicyParams& p) { return std::exp(log_prob(p, t).total); }});
  };

  // Depth-first over EOS-free prefixes; each prefix spawns its EOS-terminated
  // extension, and prefixes of exactly max_len stand as truncated sequences.
  // The emitted set partitions the sequence space, so probabilities sum to 1.
  std::vector<int> prefix;
  std::function<void()> walk = [&]() {
    if (static_cast<int>(prefix.size()) == max_len) {
      emit(prefix);
      return;
    }
    for (int id : ids) {
      prefix.push_back(id);
      if (id == vocab.eos()) {
        emit(prefix);
      } else {
        walk();
      }
      prefix.pop_back();
    }
  };
  walk();
  return out;
}

std::vector<EnumeratedTrajectory> enumerate_all_trajectories(const TaskSpec& micro_task,
                                                             const std::vector<int>& prompt,
                                                             int max_len) {
  if (micro_task.kind != TaskKind::Micro)
    throw InputError("trajectory enumeration requires the micro task");
  return enumerate_all_trajectories(micro_task.vocab, prompt, max_len);
}

void export_instances(const std::string& path, const TaskSpec& task,
                      const std::vector<ProblemInstance>& instances) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw InputError("cannot open for writing: " + path);
  for (const auto& inst : instances) {
    const std::string body = task.vocab.decode(
        std::vector<int>(inst.prompt.begin() + 1, inst.prompt.end()));
    f << body << '\t' << inst.answer << '\t' << inst.seed << '\n';
  }
}

std::vector<ProblemInstance> import_instances(const std::string& path, const TaskSpec& task) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open for reading: " + path);
  std::vector<ProblemInstance> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string body, answer, seed;
    if (!std::getline(ss, body, '\t') || !std::getline(ss, answer, '\t') ||
        !std::getline(ss, seed, '\t'))
      throw InputError("malformed instance line: " + line);
    ProblemInstance inst;
    inst.prompt = std::vector<int>{task.vocab.bos()};
    auto ids = task.vocab.encode_chars(body);
    inst.prompt.insert(inst.prompt.end(), ids.begin(), ids.end());
    inst.answer = answer;
    inst.seed = std::stoull(seed);
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace dash
