#pragma once

#include <string>
#include <vector>

namespace dash {

// Token alphabet. EOS is mandatory; BOS and the answer delimiter are
// optional. BOS, when present, marks the start of prompts and is never
// sampled: the next-token distribution excludes it.
class Vocab {
 public:
  Vocab(std::vector<std::string> tokens, int bos_id, int eos_id, int delim_id);

  static Vocab from_tokens(std::vector<std::string> tokens,
                           const std::string& bos, const std::string& eos,
                           const std::string& delim);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(int id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  int bos() const { return bos_id_; }    // -1 if absent
  int eos() const { return eos_id_; }
  int delim() const { return delim_id_; }  // -1 if absent

  bool has_bos() const { return bos_id_ >= 0; }
  bool sampleable(int id) const { return id != bos_id_; }
  int num_sampleable() const { return size() - (has_bos() ? 1 : 0); }

  // -1 if the text is not a token.
  int find(const std::string& text) const;

  // Token ids for a string of single-character tokens; throws InputError on
  // unknown characters.
  std::vector<int> encode_chars(const std::string& text) const;
  std::string decode(const std::vector<int>& ids, bool stop_at_eos = true) const;

  bool operator==(const Vocab&) const = default;

 private:
  std::vector<std::string> tokens_;
  int bos_id_;
  int eos_id_;
  int delim_id_;
};

}  // namespace dash
