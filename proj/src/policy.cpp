#include "dash/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dash/errors.hpp"
#include "dash/rng.hpp"

namespace dash {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double* rowp(std::vector<double>& v, int t, int w) { return &v[static_cast<std::size_t>(t) * w]; }
inline const double* rowp(const std::vector<double>& v, int t, int w) {
  return &v[static_cast<std::size_t>(t) * w];
}

// y = W x, W row-major [out x in]
void matvec(const double* w, const double* x, double* y, int out, int in) {
  for (int o = 0; o < out; ++o) {
    const double* r = w + static_cast<std::size_t>(o) * in;
    double s = 0.0;
    for (int i = 0; i < in; ++i) s += r[i] * x[i];
    y[o] = s;
  }
}

// Wg += dout (x) xin ; dx += W^T dout
void proj_backward(const double* w, double* wg, const double* dout, const double* xin,
                   double* dx, int out, int in) {
  for (int o = 0; o < out; ++o) {
    const double dv = dout[o];
    if (dv == 0.0) continue;
    double* wgr = wg + static_cast<std::size_t>(o) * in;
    const double* wr = w + static_cast<std::size_t>(o) * in;
    for (int i = 0; i < in; ++i) {
      wgr[i] += dv * xin[i];
      dx[i] += dv * wr[i];
    }
  }
}

struct LayerCache {
  std::vector<double> x, q, k, v, ctx, h, tanh_u, y;
  std::vector<double> attn;  // [cap x cap], row t holds weights over j <= t
};

// Activations for positions 0..n-1. advance() appends one position; the math
// for a position depends only on positions <= t, so incremental decoding and
// full-sequence replay produce bit-identical logits.
struct Cache {
  int cap = 0;
  int n = 0;
  std::vector<int> tokens;
  std::vector<LayerCache> layers;
  std::vector<double> logits;  // [cap x V]

  Cache(const ArchConfig& a, int capacity) : cap(capacity) {
    const std::size_t d = static_cast<std::size_t>(a.embed_dim);
    const std::size_t hh = static_cast<std::size_t>(a.ffn_hidden);
    layers.resize(a.n_layers);
    for (auto& lc : layers) {
      lc.x.resize(cap * d);
      lc.q.resize(cap * d);
      lc.k.resize(cap * d);
      lc.v.resize(cap * d);
      lc.ctx.resize(cap * d);
      lc.h.resize(cap * d);
      lc.tanh_u.resize(cap * hh);
      lc.y.resize(cap * d);
      lc.attn.resize(static_cast<std::size_t>(cap) * cap);
    }
    logits.resize(static_cast<std::size_t>(cap) * a.vocab_size);
    tokens.reserve(cap);
  }
};

void advance(const PolicyParams& p, Cache& c, int token) {
  const ArchConfig& a = p.arch;
  const int d = a.embed_dim, hh = a.ffn_hidden, vv = a.vocab_size;
  const int t = c.n;
  if (t >= c.cap) throw CapacityError("context window exceeded");
  c.tokens.push_back(token);

  {
    double* x = rowp(c.layers[0].x, t, d);
    const double* e = &p.token_embed[static_cast<std::size_t>(token) * d];
    const double* pe = &p.pos_embed[static_cast<std::size_t>(t) * d];
    for (int i = 0; i < d; ++i) x[i] = e[i] + pe[i];
  }
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  for (int l = 0; l < a.n_layers; ++l) {
    LayerCache& lc = c.layers[l];
    const BlockTensors& b = p.layers[l];
    const double* x = rowp(lc.x, t, d);
    double* q = rowp(lc.q, t, d);
    double* k = rowp(lc.k, t, d);
    double* v = rowp(lc.v, t, d);
    matvec(b.wq.data(), x, q, d, d);
    matvec(b.wk.data(), x, k, d, d);
    matvec(b.wv.data(), x, v, d, d);

    double* arow = &lc.attn[static_cast<std::size_t>(t) * c.cap];
    double mx = kNegInf;
    for (int j = 0; j <= t; ++j) {
      const double* kj = rowp(lc.k, j, d);
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += q[i] * kj[i];
      s *= inv_sqrt_d;
      arow[j] = s;
      mx = std::max(mx, s);
    }
    double den = 0.0;
    for (int j = 0; j <= t; ++j) {
      arow[j] = std::exp(arow[j] - mx);
      den += arow[j];
    }
    const double invden = 1.0 / den;
    for (int j = 0; j <= t; ++j) arow[j] *= invden;

    double* ctx = rowp(lc.ctx, t, d);
    std::fill(ctx, ctx + d, 0.0);
    for (int j = 0; j <= t; ++j) {
      const double w = arow[j];
      const double* vj = rowp(lc.v, j, d);
      for (int i = 0; i < d; ++i) ctx[i] += w * vj[i];
    }

    double* h = rowp(lc.h, t, d);
    matvec(b.wo.data(), ctx, h, d, d);
    for (int i = 0; i < d; ++i) h[i] += x[i];

    double* tu = rowp(lc.tanh_u, t, hh);
    matvec(b.w1.data(), h, tu, hh, d);
    for (int j = 0; j < hh; ++j) tu[j] = std::tanh(tu[j] + b.b1[j]);

    double* y = rowp(lc.y, t, d);
    matvec(b.w2.data(), tu, y, d, hh);
    for (int i = 0; i < d; ++i) y[i] += b.b2[i] + h[i];

    if (l + 1 < a.n_layers) {
      double* xn = rowp(c.layers[l + 1].x, t, d);
      std::copy(y, y + d, xn);
    }
  }
  const double* ytop = rowp(c.layers.back().y, t, d);
  double* lg = &c.logits[static_cast<std::size_t>(t) * vv];
  matvec(p.w_out.data(), ytop, lg, vv, d);
  for (int o = 0; o < vv; ++o) lg[o] += p.b_out[o];
  ++c.n;
}

// log-sum-exp over non-BOS entries, max-subtraction stabilized.
double lse_masked(const double* lg, int vv, int bos) {
  double mx = kNegInf;
  for (int i = 0; i < vv; ++i)
    if (i != bos) mx = std::max(mx, lg[i]);
  double den = 0.0;
  for (int i = 0; i < vv; ++i)
    if (i != bos) den += std::exp(lg[i] - mx);
  return mx + std::log(den);
}

void softmax_masked(const double* lg, int vv, int bos, double* probs) {
  double mx = kNegInf;
  for (int i = 0; i < vv; ++i)
    if (i != bos) mx = std::max(mx, lg[i]);
  double den = 0.0;
  for (int i = 0; i < vv; ++i) {
    if (i == bos) {
      probs[i] = 0.0;
    } else {
      probs[i] = std::exp(lg[i] - mx);
      den += probs[i];
    }
  }
  const double invden = 1.0 / den;
  for (int i = 0; i < vv; ++i) probs[i] *= invden;
}

void validate_tokens(const ArchConfig& a, const std::vector<int>& toks, bool is_completion) {
  for (int tok : toks) {
    if (tok < 0 || tok >= a.vocab_size) throw InputError("token out of vocab");
    if (is_completion && tok == a.bos_id)
      throw InputError("completion contains BOS, which the policy never emits");
  }
}

void validate_traj(const PolicyParams& p, const Trajectory& traj) {
  if (traj.prompt.empty()) throw InputError("prompt must be nonempty");
  validate_tokens(p.arch, traj.prompt, false);
  validate_tokens(p.arch, traj.completion, true);
  if (static_cast<int>(traj.prompt.size() + traj.completion.size()) > p.arch.context_len)
    throw CapacityError("prompt plus completion exceeds the context window");
}

// Shared reverse pass. dlogits has one row per cached position; rows that
// carry no loss must be zero.
GradientVector backward(const PolicyParams& p, const Cache& c,
                        const std::vector<double>& dlogits) {
  const ArchConfig& a = p.arch;
  const int d = a.embed_dim, hh = a.ffn_hidden, vv = a.vocab_size, n = c.n;
  GradientVector g = GradientVector::zeros(a);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  std::vector<double> dy(static_cast<std::size_t>(n) * d, 0.0);
  for (int t = 0; t < n; ++t) {
    const double* dz = &dlogits[static_cast<std::size_t>(t) * vv];
    const double* y = rowp(c.layers.back().y, t, d);
    double* dyt = &dy[static_cast<std::size_t>(t) * d];
    for (int o = 0; o < vv; ++o) {
      const double dv = dz[o];
      if (dv == 0.0) continue;
      double* wgr = &g.w_out[static_cast<std::size_t>(o) * d];
      const double* wr = &p.w_out[static_cast<std::size_t>(o) * d];
      for (int i = 0; i < d; ++i) {
        wgr[i] += dv * y[i];
        dyt[i] += dv * wr[i];
      }
      g.b_out[o] += dv;
    }
  }

  std::vector<double> dx, dh, dq, dk, dvv, dctx;
  std::vector<double> dtanh(hh);
  std::vector<double> da;
  for (int l = a.n_layers - 1; l >= 0; --l) {
    const LayerCache& lc = c.layers[l];
    const BlockTensors& b = p.layers[l];
    BlockTensors& bg = g.layers[l];
    const std::size_t nd = static_cast<std::size_t>(n) * d;
    dx.assign(nd, 0.0);
    dh.assign(nd, 0.0);
    dq.assign(nd, 0.0);
    dk.assign(nd, 0.0);
    dvv.assign(nd, 0.0);
    dctx.assign(nd, 0.0);

    // y = h + W2 tanh(W1 h + b1) + b2
    for (int t = 0; t < n; ++t) {
      const double* dyt = &dy[static_cast<std::size_t>(t) * d];
      const double* tu = rowp(lc.tanh_u, t, hh);
      const double* h = rowp(lc.h, t, d);
      std::fill(dtanh.begin(), dtanh.end(), 0.0);
      for (int o = 0; o < d; ++o) {
        const double dv = dyt[o];
        if (dv == 0.0) continue;
        double* w2g = &bg.w2[static_cast<std::size_t>(o) * hh];
        const double* w2 = &b.w2[static_cast<std::size_t>(o) * hh];
        for (int j = 0; j < hh; ++j) {
          w2g[j] += dv * tu[j];
          dtanh[j] += dv * w2[j];
        }
        bg.b2[o] += dv;
      }
      double* dht = &dh[static_cast<std::size_t>(t) * d];
      for (int i = 0; i < d; ++i) dht[i] = dyt[i];
      for (int j = 0; j < hh; ++j) {
        const double du = dtanh[j] * (1.0 - tu[j] * tu[j]);
        if (du == 0.0) continue;
        double* w1g = &bg.w1[static_cast<std::size_t>(j) * d];
        const double* w1 = &b.w1[static_cast<std::size_t>(j) * d];
        for (int i = 0; i < d; ++i) {
          w1g[i] += du * h[i];
          dht[i] += du * w1[i];
        }
        bg.b1[j] += du;
      }
    }

    // h = x + Wo ctx
    for (int t = 0; t < n; ++t) {
      const double* dht = &dh[static_cast<std::size_t>(t) * d];
      const double* ctx = rowp(lc.ctx, t, d);
      double* dxt = &dx[static_cast<std::size_t>(t) * d];
      double* dctxt = &dctx[static_cast<std::size_t>(t) * d];
      for (int o = 0; o < d; ++o) {
        const double dv = dht[o];
        dxt[o] += dv;
        if (dv == 0.0) continue;
        double* wog = &bg.wo[static_cast<std::size_t>(o) * d];
        const double* wo = &b.wo[static_cast<std::size_t>(o) * d];
        for (int i = 0; i < d; ++i) {
          wog[i] += dv * ctx[i];
          dctxt[i] += dv * wo[i];
        }
      }
    }

    // ctx_t = sum_{j<=t} a_tj v_j with a_t = softmax(q_t . k_j / sqrt(d))
    for (int t = 0; t < n; ++t) {
      const double* arow = &lc.attn[static_cast<std::size_t>(t) * c.cap];
      const double* dctxt = &dctx[static_cast<std::size_t>(t) * d];
      const double* qt = rowp(lc.q, t, d);
      da.assign(t + 1, 0.0);
      double wsum = 0.0;
      for (int j = 0; j <= t; ++j) {
        const double* vj = rowp(lc.v, j, d);
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += vj[i] * dctxt[i];
        da[j] = s;
        wsum += arow[j] * s;
        const double atj = arow[j];
        if (atj != 0.0) {
          double* dvj = &dvv[static_cast<std::size_t>(j) * d];
          for (int i = 0; i < d; ++i) dvj[i] += atj * dctxt[i];
        }
      }
      double* dqt = &dq[static_cast<std::size_t>(t) * d];
      for (int j = 0; j <= t; ++j) {
        const double ds = arow[j] * (da[j] - wsum) * inv_sqrt_d;
        if (ds == 0.0) continue;
        const double* kj = rowp(lc.k, j, d);
        double* dkj = &dk[static_cast<std::size_t>(j) * d];
        for (int i = 0; i < d; ++i) {
          dqt[i] += ds * kj[i];
          dkj[i] += ds * qt[i];
        }
      }
    }

    for (int t = 0; t < n; ++t) {
      const double* x = rowp(lc.x, t, d);
      double* dxt = &dx[static_cast<std::size_t>(t) * d];
      proj_backward(b.wq.data(), bg.wq.data(), &dq[static_cast<std::size_t>(t) * d], x, dxt, d, d);
      proj_backward(b.wk.data(), bg.wk.data(), &dk[static_cast<std::size_t>(t) * d], x, dxt, d, d);
      proj_backward(b.wv.data(), bg.wv.data(), &dvv[static_cast<std::size_t>(t) * d], x, dxt, d, d);
    }

    if (l > 0) dy = dx;
  }

  for (int t = 0; t < n; ++t) {
    const int tok = c.tokens[t];
    const double* dxt = &dx[static_cast<std::size_t>(t) * d];
    double* e = &g.token_embed[static_cast<std::size_t>(tok) * d];
    double* pe = &g.pos_embed[static_cast<std::size_t>(t) * d];
    for (int i = 0; i < d; ++i) {
      e[i] += dxt[i];
      pe[i] += dxt[i];
    }
  }
  return g;
}

// Runs the forward pass over all positions a loss can attach to:
// prompt plus all completion tokens except the last (which is never fed).
Cache forward_for_loss(const PolicyParams& p, const Trajectory& traj) {
  const int m = static_cast<int>(traj.prompt.size());
  const int len = static_cast<int>(traj.completion.size());
  const int n_pos = m + std::max(len - 1, 0);
  Cache c(p.arch, std::max(n_pos, 1));
  for (int i = 0; i < m; ++i) advance(p, c, traj.prompt[i]);
  for (int j = 0; j + 1 < len; ++j) advance(p, c, traj.completion[j]);
  return c;
}

}  // namespace

LogProbResult log_prob(const PolicyParams& params, const Trajectory& traj) {
  validate_traj(params, traj);
  LogProbResult res;
  const int len = static_cast<int>(traj.completion.size());
  if (len == 0) return res;
  const int m = static_cast<int>(traj.prompt.size());
  const int vv = params.arch.vocab_size;
  Cache c = forward_for_loss(params, traj);
  res.per_token.resize(len);
  for (int j = 0; j < len; ++j) {
    const double* lg = &c.logits[static_cast<std::size_t>(m - 1 + j) * vv];
    res.per_token[j] = lg[traj.completion[j]] - lse_masked(lg, vv, params.arch.bos_id);
    res.total += res.per_token[j];
  }
  return res;
}

Trajectory sample(const PolicyParams& params, const std::vector<int>& prompt,
                  int max_len, double temperature, std::uint64_t seed) {
  if (!(temperature > 0.0)) throw InputError("temperature must be positive");
  if (max_len < 0) throw InputError("max_len must be nonnegative");
  if (prompt.empty()) throw InputError("prompt must be nonempty");
  validate_tokens(params.arch, prompt, false);
  const int m = static_cast<int>(prompt.size());
  if (m > params.arch.context_len) throw CapacityError("prompt exceeds context window");
  const int cap_len = std::min(max_len, params.arch.context_len - m);
  const int vv = params.arch.vocab_size;
  const int bos = params.arch.bos_id;

  Trajectory traj;
  traj.prompt = prompt;
  if (cap_len == 0) return traj;

  Cache c(params.arch, m + cap_len);
  for (int tok : prompt) advance(params, c, tok);
  Rng rng(seed);
  std::vector<double> probs(vv);
  for (int g = 0; g < cap_len; ++g) {
    const double* lg = &c.logits[static_cast<std::size_t>(m - 1 + g) * vv];
    // Sampling distribution at the requested temperature.
    double mx = kNegInf;
    for (int i = 0; i < vv; ++i)
      if (i != bos) mx = std::max(mx, lg[i] / temperature);
    double den = 0.0;
    for (int i = 0; i < vv; ++i) {
      if (i == bos) {
        probs[i] = 0.0;
      } else {
        probs[i] = std::exp(lg[i] / temperature - mx);
        den += probs[i];
      }
    }
    const double u = rng.uniform01() * den;
    int picked = -1;
    double cum = 0.0;
    for (int i = 0; i < vv; ++i) {
      if (i == bos) continue;
      cum += probs[i];
      picked = i;
      if (u < cum) break;
    }
    traj.completion.push_back(picked);
    traj.log_probs.push_back(lg[picked] - lse_masked(lg, vv, bos));
    if (picked == params.arch.eos_id) break;
    if (g + 1 < cap_len) advance(params, c, picked);
  }
  return traj;
}

std::vector<int> greedy_decode(const PolicyParams& params, const std::vector<int>& prompt,
                               int max_len) {
  if (max_len < 0) throw InputError("max_len must be nonnegative");
  if (prompt.empty()) throw InputError("prompt must be nonempty");
  validate_tokens(params.arch, prompt, false);
  const int m = static_cast<int>(prompt.size());
  if (m > params.arch.context_len) throw CapacityError("prompt exceeds context window");
  const int cap_len = std::min(max_len, params.arch.context_len - m);
  const int vv = params.arch.vocab_size;

  std::vector<int> completion;
  if (cap_len == 0) return completion;
  Cache c(params.arch, m + cap_len);
  for (int tok : prompt) advance(params, c, tok);
  for (int g = 0; g < cap_len; ++g) {
    const double* lg = &c.logits[static_cast<std::size_t>(m - 1 + g) * vv];
    int best = -1;
    double bv = kNegInf;
    for (int i = 0; i < vv; ++i) {
      if (i == params.arch.bos_id) continue;
      if (lg[i] > bv) {
        bv = lg[i];
        best = i;
      }
    }
    completion.push_back(best);
    if (best == params.arch.eos_id) break;
    if (g + 1 < cap_len) advance(params, c, best);
  }
  return completion;
}

GradientVector grad_log_prob(const PolicyParams& params, const Trajectory& traj) {
  validate_traj(params, traj);
  const int len = static_cast<int>(traj.completion.size());
  if (len == 0) return GradientVector::zeros(params.arch);
  const int m = static_cast<int>(traj.prompt.size());
  const int vv = params.arch.vocab_size;
  Cache c = forward_for_loss(params, traj);

  std::vector<double> dlogits(static_cast<std::size_t>(c.n) * vv, 0.0);
  std::vector<double> probs(vv);
  for (int j = 0; j < len; ++j) {
    const int t = m - 1 + j;
    const double* lg = &c.logits[static_cast<std::size_t>(t) * vv];
    softmax_masked(lg, vv, params.arch.bos_id, probs.data());
    double* dz = &dlogits[static_cast<std::size_t>(t) * vv];
    for (int i = 0; i < vv; ++i) {
      if (i == params.arch.bos_id) continue;
      dz[i] -= probs[i];
    }
    dz[traj.completion[j]] += 1.0;
  }
  return backward(params, c, dlogits);
}

KlResult kl_term(const PolicyParams& params, const PolicyParams& base,
                 const Trajectory& traj) {
  if (!(params.arch == base.arch))
    throw InputError("kl_term: parameter sets have different architectures");
  validate_traj(params, traj);
  const int len = static_cast<int>(traj.completion.size());
  KlResult res;
  res.grad = GradientVector::zeros(params.arch);
  if (len == 0) return res;
  const int m = static_cast<int>(traj.prompt.size());
  const int vv = params.arch.vocab_size;
  const int bos = params.arch.bos_id;

  Cache cur = forward_for_loss(params, traj);
  Cache bas = forward_for_loss(base, traj);

  std::vector<double> dlogits(static_cast<std::size_t>(cur.n) * vv, 0.0);
  std::vector<double> pc(vv), pb(vv);
  for (int j = 0; j < len; ++j) {
    const int t = m - 1 + j;
    const double* lgc = &cur.logits[static_cast<std::size_t>(t) * vv];
    const double* lgb = &bas.logits[static_cast<std::size_t>(t) * vv];
    softmax_masked(lgc, vv, bos, pc.data());
    softmax_masked(lgb, vv, bos, pb.data());
    const double lse_c = lse_masked(lgc, vv, bos);
    const double lse_b = lse_masked(lgb, vv, bos);
    double* dz = &dlogits[static_cast<std::size_t>(t) * vv];
    for (int i = 0; i < vv; ++i) {
      if (i == bos) continue;
      res.value += pb[i] * ((lgb[i] - lse_b) - (lgc[i] - lse_c));
      dz[i] = pc[i] - pb[i];
    }
  }
  res.grad = backward(params, cur, dlogits);
  return res;
}

std::vector<double> next_token_probs(const PolicyParams& params,
                                     const std::vector<int>& context) {
  if (context.empty()) throw InputError("context must be nonempty");
  validate_tokens(params.arch, context, false);
  const int m = static_cast<int>(context.size());
  if (m > params.arch.context_len) throw CapacityError("context exceeds window");
  Cache c(params.arch, m);
  for (int tok : context) advance(params, c, tok);
  const int vv = params.arch.vocab_size;
  std::vector<double> probs(vv);
  softmax_masked(&c.logits[static_cast<std::size_t>(m - 1) * vv], vv, params.arch.bos_id,
                 probs.data());
  return probs;
}

}  // namespace dash
