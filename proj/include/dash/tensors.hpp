#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dash {

// Shape descriptor of the policy network: token/positional embeddings, a
// stack of causal-attention blocks with two-layer feedforwards, and an
// output projection. Two parameter sets with equal descriptors are
// element-wise comparable.
struct ArchConfig {
  int vocab_size = 0;
  int embed_dim = 32;
  int context_len = 64;
  int ffn_hidden = 128;
  int n_layers = 1;
  int bos_id = -1;  // excluded from the next-token distribution when >= 0
  int eos_id = -1;

  bool operator==(const ArchConfig&) const = default;
  void validate() const;
};

struct TensorView {
  std::string name;
  std::vector<int> shape;
  double* data = nullptr;
  std::size_t size = 0;
};

struct ConstTensorView {
  std::string name;
  std::vector<int> shape;
  const double* data = nullptr;
  std::size_t size = 0;
};

// One attention block plus its feedforward. Matrices are row-major with
// shape [out x in]; y = W x.
struct BlockTensors {
  std::vector<double> wq, wk, wv, wo;  // [d x d]
  std::vector<double> w1, b1;          // [hidden x d], [hidden]
  std::vector<double> w2, b2;          // [d x hidden], [d]
};

// Named parameter tensors. PolicyParams and GradientVector share this
// layout so elementwise combination is direct.
struct ParamTensors {
  ArchConfig arch;
  std::vector<double> token_embed;  // [V x d]
  std::vector<double> pos_embed;    // [context x d]
  std::vector<BlockTensors> layers;
  std::vector<double> w_out;  // [V x d]
  std::vector<double> b_out;  // [V]

  static ParamTensors zeros(const ArchConfig& arch);

  std::vector<TensorView> views();
  std::vector<ConstTensorView> views() const;
  std::size_t num_params() const;
  bool all_finite() const;
  std::uint64_t content_hash() const;

  // this += s * other; shapes must match.
  void add_scaled(const ParamTensors& other, double s);
  void scale(double s);
  void set_zero();
  double max_abs() const;
  double max_abs_diff(const ParamTensors& other) const;
};

struct PolicyParams : ParamTensors {
  static PolicyParams zeros(const ArchConfig& arch);
  // Gaussian init with the given scale; scale 0 gives the uniform policy.
  static PolicyParams init(const ArchConfig& arch, double scale, std::uint64_t seed);
};

struct GradientVector : ParamTensors {
  static GradientVector zeros(const ArchConfig& arch);
};

}  // namespace dash
