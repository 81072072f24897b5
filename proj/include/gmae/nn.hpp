// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "gmae/rng.hpp"
#include "gmae/types.hpp"

namespace gmae {

// Named handle to a parameter tensor; the collect() functions below emit
// these in a fixed traversal order shared with the gradient collectors.
struct ParamRef {
  std::string name;
  Mat* value;
};

namespace nn {

// Every layer follows the same scheme: forward() optionally fills a Cache
// with the activations its backward() needs; backward() consumes the cache,
// accumulates (+=) into a Grads struct sized by resize(), and returns the
// gradient with respect to its input.  Rows are tokens, columns features.

struct Linear {
  Mat W;  // in x out
  Mat b;  // 1 x out

  Linear() = default;
  Linear(int in, int out) : W(Mat::Zero(in, out)), b(Mat::Zero(1, out)) {}

  struct Cache {
    Mat x;
  };
  struct Grads {
    Mat W, b;
    void resize(const Linear& l) {
      W = Mat::Zero(l.W.rows(), l.W.cols());
      b = Mat::Zero(1, l.b.cols());
    }
  };

  void init_xavier(Rng& rng);
  Mat forward(const Mat& x, Cache* cache = nullptr) const;
  Mat backward(const Mat& dy, const Cache& cache, Grads& g) const;
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
  static void collect_grads(Grads& g, std::vector<Mat*>& out);
};

struct LayerNorm {
  Mat gamma;  // 1 x dim
  Mat beta;   // 1 x dim
  static constexpr double kEps = 1e-6;

  LayerNorm() = default;
  explicit LayerNorm(int dim)
      : gamma(Mat::Ones(1, dim)), beta(Mat::Zero(1, dim)) {}

  struct Cache {
    Mat xhat;
    Vec inv_std;
  };
  struct Grads {
    Mat gamma, beta;
    void resize(const LayerNorm& l) {
      gamma = Mat::Zero(1, l.gamma.cols());
      beta = Mat::Zero(1, l.beta.cols());
    }
  };

  Mat forward(const Mat& x, Cache* cache = nullptr) const;
  Mat backward(const Mat& dy, const Cache& cache, Grads& g) const;
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
  static void collect_grads(Grads& g, std::vector<Mat*>& out);
};

// Exact GELU, x/2 * (1 + erf(x / sqrt(2))).
Mat gelu(const Mat& x);
Mat gelu_backward(const Mat& dy, const Mat& x);

struct SelfAttention {
  int heads = 1;
  Linear qkv;   // dim -> 3 * dim
  Linear proj;  // dim -> dim

  SelfAttention() = default;
  SelfAttention(int dim, int heads_)
      : heads(heads_), qkv(dim, 3 * dim), proj(dim, dim) {}

  struct Cache {
    Linear::Cache qkv_c, proj_c;
    Mat qkv_out;            // s x 3 dim
    std::vector<Mat> attn;  // per-head s x s softmax weights
  };
  struct Grads {
    Linear::Grads qkv, proj;
    void resize(const SelfAttention& a) {
      qkv.resize(a.qkv);
      proj.resize(a.proj);
    }
  };

  Mat forward(const Mat& x, Cache* cache = nullptr) const;
  Mat backward(const Mat& dy, const Cache& cache, Grads& g) const;
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
  static void collect_grads(Grads& g, std::vector<Mat*>& out);
};

struct Mlp {
  Linear fc1, fc2;

  Mlp() = default;
  Mlp(int dim, int hidden) : fc1(dim, hidden), fc2(hidden, dim) {}

  struct Cache {
    Linear::Cache fc1_c, fc2_c;
    Mat pre;  // fc1 output before GELU
  };
  struct Grads {
    Linear::Grads fc1, fc2;
    void resize(const Mlp& m) {
      fc1.resize(m.fc1);
      fc2.resize(m.fc2);
    }
  };

  Mat forward(const Mat& x, Cache* cache = nullptr) const;
  Mat backward(const Mat& dy, const Cache& cache, Grads& g) const;
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
  static void collect_grads(Grads& g, std::vector<Mat*>& out);
};

// Pre-norm transformer block: x + attn(ln1(x)), then x + mlp(ln2(x)).
struct Block {
  LayerNorm ln1, ln2;
  SelfAttention attn;
  Mlp mlp;

  Block() = default;
  Block(int dim, int heads)
      : ln1(dim), ln2(dim), attn(dim, heads), mlp(dim, 4 * dim) {}

  struct Cache {
    LayerNorm::Cache ln1_c, ln2_c;
    SelfAttention::Cache attn_c;
    Mlp::Cache mlp_c;
  };
  struct Grads {
    LayerNorm::Grads ln1, ln2;
    SelfAttention::Grads attn;
    Mlp::Grads mlp;
    void resize(const Block& b) {
      ln1.resize(b.ln1);
      ln2.resize(b.ln2);
      attn.resize(b.attn);
      mlp.resize(b.mlp);
    }
  };

  Mat forward(const Mat& x, Cache* cache = nullptr) const;
  Mat backward(const Mat& dy, const Cache& cache, Grads& g) const;
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
  static void collect_grads(Grads& g, std::vector<Mat*>& out);
};

}  // namespace nn
}  // namespace gmae
