#include "dash/vocab.hpp"

#include <unordered_set>

#include "dash/errors.hpp"

namespace dash {

Vocab::Vocab(std::vector<std::string> tokens, int bos_id, int eos_id, int delim_id)
    : tokens_(std::move(tokens)), bos_id_(bos_id), eos_id_(eos_id), delim_id_(delim_id) {
  const int n = size();
  if (n < 3) throw InputError("vocab must have at least 3 tokens");
  std::unordered_set<std::string> seen;
  for (const auto& t : tokens_) {
    if (!seen.insert(t).second) throw InputError("duplicate vocab token: " + t);
  }
  if (eos_id_ < 0 || eos_id_ >= n) throw InputError("vocab requires a valid EOS id");
  if (bos_id_ < -1 || bos_id_ >= n || bos_id_ == eos_id_)
    throw InputError("invalid BOS id");
  if (delim_id_ < -1 || delim_id_ >= n || delim_id_ == eos_id_ || (delim_id_ >= 0 && delim_id_ == bos_id_))
    throw InputError("invalid delimiter id");
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens, const std::string& bos,
                         const std::string& eos, const std::string& delim) {
  auto index_of = [&](const std::string& s) -> int {
    for (int i = 0; i < static_cast<int>(tokens.size()); ++i)
      if (tokens[i] == s) return i;
    return -1;
  };
  const int eos_id = index_of(eos);
  if (eos_id < 0) throw InputError("EOS token not present in token list");
  return Vocab(std::move(tokens), bos.empty() ? -1 : index_of(bos), eos_id,
               delim.empty() ? -1 : index_of(delim));
}

int Vocab::find(const std::string& text) const {
  for (int i = 0; i < size(); ++i)
    if (tokens_[i] == text) return i;
  return -1;
}

std::vector<int> Vocab::encode_chars(const std::string& text) const {
  std::vector<int> out;
  out.reserve(text.size());
  for (char c : text) {
    const int id = find(std::string(1, c));
    if (id < 0) throw InputError(std::string("character not in vocab: ") + c);
    out.push_back(id);
  }
  return out;
}

std::string Vocab::decode(const std::vector<int>& ids, bool stop_at_eos) const {
  std::string out;
  for (int id : ids) {
    if (id == eos_id_ && stop_at_eos) break;
    out += token(id);
  }
  return out;
}

}  // namespace dash
