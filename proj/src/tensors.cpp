#include "dash/tensors.hpp"

#include <cmath>
#include <cstring>

#include "dash/errors.hpp"
#include "dash/rng.hpp"

namespace dash {

void ArchConfig::validate() const {
  if (vocab_size < 3) throw InputError("arch: vocab_size must be >= 3");
  if (embed_dim < 1) throw InputError("arch: embed_dim must be >= 1");
  if (context_len < 2) throw InputError("arch: context_len must be >= 2");
  if (ffn_hidden < 1) throw InputError("arch: ffn_hidden must be >= 1");
  if (n_layers < 1) throw InputError("arch: n_layers must be >= 1");
  if (eos_id < 0 || eos_id >= vocab_size) throw InputError("arch: eos_id out of range");
  if (bos_id < -1 || bos_id >= vocab_size || bos_id == eos_id)
    throw InputError("arch: bos_id out of range");
  if (bos_id >= 0 && vocab_size < 4)
    throw InputError("arch: need at least 3 sampleable tokens besides BOS");
}

ParamTensors ParamTensors::zeros(const ArchConfig& a) {
  a.validate();
  ParamTensors p;
  p.arch = a;
  const std::size_t d = static_cast<std::size_t>(a.embed_dim);
  const std::size_t h = static_cast<std::size_t>(a.ffn_hidden);
  const std::size_t v = static_cast<std::size_t>(a.vocab_size);
  p.token_embed.assign(v * d, 0.0);
  p.pos_embed.assign(static_cast<std::size_t>(a.context_len) * d, 0.0);
  p.layers.resize(a.n_layers);
  for (auto& blk : p.layers) {
    blk.wq.assign(d * d, 0.0);
    blk.wk.assign(d * d, 0.0);
    blk.wv.assign(d * d, 0.0);
    blk.wo.assign(d * d, 0.0);
    blk.w1.assign(h * d, 0.0);
    blk.b1.assign(h, 0.0);
    blk.w2.assign(d * h, 0.0);
    blk.b2.assign(d, 0.0);
  }
  p.w_out.assign(v * d, 0.0);
  p.b_out.assign(v, 0.0);
  return p;
}

std::vector<TensorView> ParamTensors::views() {
  const int d = arch.embed_dim, h = arch.ffn_hidden, v = arch.vocab_size;
  std::vector<TensorView> out;
  auto add = [&out](std::string name, std::vector<int> shape, std::vector<double>& t) {
    out.push_back(TensorView{std::move(name), std::move(shape), t.data(), t.size()});
  };
  add("token_embed", {v, d}, token_embed);
  add("pos_embed", {arch.context_len, d}, pos_embed);
  for (int l = 0; l < arch.n_layers; ++l) {
    const std::string pre = "layers." + std::to_string(l) + ".";
    add(pre + "wq", {d, d}, layers[l].wq);
    add(pre + "wk", {d, d}, layers[l].wk);
    add(pre + "wv", {d, d}, layers[l].wv);
    add(pre + "wo", {d, d}, layers[l].wo);
    add(pre + "w1", {h, d}, layers[l].w1);
    add(pre + "b1", {h}, layers[l].b1);
    add(pre + "w2", {d, h}, layers[l].w2);
    add(pre + "b2", {d}, layers[l].b2);
  }
  add("w_out", {v, d}, w_out);
  add("b_out", {v}, b_out);
  return out;
}

std::vector<ConstTensorView> ParamTensors::views() const {
  auto mut = const_cast<ParamTensors*>(this)->views();
  std::vector<ConstTensorView> out;
  out.reserve(mut.size());
  for (auto& t : mut)
    out.push_back(ConstTensorView{std::move(t.name), std::move(t.shape), t.data, t.size});
  return out;
}

std::size_t ParamTensors::num_params() const {
  std::size_t n = 0;
  for (const auto& t : views()) n += t.size;
  return n;
}

bool ParamTensors::all_finite() const {
  for (const auto& t : views())
    for (std::size_t i = 0; i < t.size; ++i)
      if (!std::isfinite(t.data[i])) return false;
  return true;
}

std::uint64_t ParamTensors::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const void* bytes, std::size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ull;
    }
  };
  mix(&arch, sizeof(arch));
  for (const auto& t : views()) mix(t.data, t.size * sizeof(double));
  return h;
}

void ParamTensors::add_scaled(const ParamTensors& other, double s) {
  if (!(arch == other.arch)) throw InputError("tensor arch mismatch in add_scaled");
  auto a = views();
  auto b = other.views();
  for (std::size_t t = 0; t < a.size(); ++t)
    for (std::size_t i = 0; i < a[t].size; ++i) a[t].data[i] += s * b[t].data[i];
}

void ParamTensors::scale(double s) {
  for (auto& t : views())
    for (std::size_t i = 0; i < t.size; ++i) t.data[i] *= s;
}

void ParamTensors::set_zero() {
  for (auto& t : views()) std::memset(t.data, 0, t.size * sizeof(double));
}

double ParamTensors::max_abs() const {
  double m = 0.0;
  for (const auto& t : views())
    for (std::size_t i = 0; i < t.size; ++i) m = std::max(m, std::fabs(t.data[i]));
  return m;
}

double ParamTensors::max_abs_diff(const ParamTensors& other) const {
  if (!(arch == other.arch)) throw InputError("tensor arch mismatch in max_abs_diff");
  auto a = views();
  auto b = other.views();
  double m = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t)
    for (std::size_t i = 0; i < a[t].size; ++i)
      m = std::max(m, std::fabs(a[t].data[i] - b[t].data[i]));
  return m;
}

PolicyParams PolicyParams::zeros(const ArchConfig& a) {
  PolicyParams p;
  static_cast<ParamTensors&>(p) = ParamTensors::zeros(a);
  return p;
}

PolicyParams PolicyParams::init(const ArchConfig& a, double scale, std::uint64_t seed) {
  PolicyParams p = zeros(a);
  if (scale != 0.0) {
    Rng rng(seed);
    for (auto& t : p.views())
      for (std::size_t i = 0; i < t.size; ++i) t.data[i] = scale * rng.normal();
  }
  return p;
}

GradientVector GradientVector::zeros(const ArchConfig& a) {
  GradientVector g;
  static_cast<ParamTensors&>(g) = ParamTensors::zeros(a);
  return g;
}

}  // namespace dash
