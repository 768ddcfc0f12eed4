#pragma once

#include "dgcn/matrix.hpp"

#include <memory>
#include <random>
#include <string>
#include <vector>

namespace dgcn {

using Rng = std::mt19937_64;

struct NamedParam {
  std::string name;
  Matrix* value;
  Matrix* grad;
};

// Glorot uniform on +-sqrt(6/(fan_in+fan_out)).
Matrix glorot_uniform(int rows, int cols, int fan_in, int fan_out, Rng& rng);

// A layer maps a matrix sequence to a matrix sequence and caches whatever
// the backward pass needs. backward() consumes the cache of the most
// recent forward() and throws if none exists.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual MatrixSequence forward(const MatrixSequence& in, bool train,
                                 Rng& rng) = 0;
  virtual MatrixSequence backward(const MatrixSequence& grad_out) = 0;

  virtual void collect_params(std::vector<NamedParam>& out) {}
  virtual long param_count() const { return 0; }
  virtual std::string describe() const = 0;

  void zero_grad();

 protected:
  void require_forward_cache(bool have) const;
};

enum class GraphConvMode {
  Waterfall,    // relu(Â X B), the wd-GC step
  Concat,       // [X, relu(Â X B)], the cd-GC step
  SoftmaxHead,  // softmax_rows(Â X B), classification head of the GC+GC baseline
};

// Per-step graph convolution with one weight matrix shared across steps.
// The renormalized adjacencies are bound by the owning model before each
// forward pass.
class GraphConvLayer : public Layer {
 public:
  GraphConvLayer(std::string name, GraphConvMode mode, int in_dim, int out_dim,
                 Rng& rng);

  void bind_renormalized(const MatrixSequence* a_hat) { a_hat_ = a_hat; }

  MatrixSequence forward(const MatrixSequence& in, bool train, Rng& rng) override;
  MatrixSequence backward(const MatrixSequence& grad_out) override;
  void collect_params(std::vector<NamedParam>& out) override;
  long param_count() const override;
  std::string describe() const override;

 private:
  std::string name_;
  GraphConvMode mode_;
  int in_dim_, out_dim_;
  Matrix weight_, weight_grad_;
  const MatrixSequence* a_hat_ = nullptr;

  MatrixSequence mixed_;  // Â X per step
  MatrixSequence act_;    // layer output of the conv part
  bool have_cache_ = false;
};

// Returning-sequence LSTM applied to every row of the input matrices with
// shared weights (the v-LSTM layer; L = 1 recovers the plain sequence
// LSTM). Two bias vectors per gate: input-side and recurrent-side.
class VertexLstmLayer : public Layer {
 public:
  VertexLstmLayer(std::string name, int in_dim, int hidden_dim,
                  bool candidate_tanh, Rng& rng);

  MatrixSequence forward(const MatrixSequence& in, bool train, Rng& rng) override;
  MatrixSequence backward(const MatrixSequence& grad_out) override;
  void collect_params(std::vector<NamedParam>& out) override;
  long param_count() const override;
  std::string describe() const override;

 private:
  std::string name_;
  int in_dim_, hidden_dim_;
  bool candidate_tanh_;

  struct Gate {
    Matrix w, u;          // in x N, N x N
    Matrix b_in, b_rec;   // 1 x N each
    Matrix w_g, u_g, b_in_g, b_rec_g;
  };
  Gate out_gate_, forget_, input_, cand_;

  struct StepCache {
    Matrix x, o, f, j, cand, c, c_tanh, h_prev, c_prev;
  };
  std::vector<StepCache> cache_;
  bool have_cache_ = false;

  void init_gate(Gate& g, Rng& rng);
  void collect_gate(std::vector<NamedParam>& out, Gate& g, const char* tag);
};

enum class DenseActivation { Relu, SoftmaxRows };

// Per-step fully connected layer with shared weights: act(Z W + 1 b^T).
// Row softmax makes it the vs-FC head; relu makes it the FC /
// vs-FC-internal baseline layer.
class DenseSeqLayer : public Layer {
 public:
  DenseSeqLayer(std::string name, int in_dim, int out_dim, DenseActivation act,
                Rng& rng);

  MatrixSequence forward(const MatrixSequence& in, bool train, Rng& rng) override;
  MatrixSequence backward(const MatrixSequence& grad_out) override;
  void collect_params(std::vector<NamedParam>& out) override;
  long param_count() const override;
  std::string describe() const override;

  bool softmax() const { return softmax_; }

 private:
  std::string name_;
  int in_dim_, out_dim_;
  bool softmax_;  // softmax head when true, else elementwise relu
  Matrix weight_, bias_, weight_grad_, bias_grad_;

  MatrixSequence in_, out_;
  bool have_cache_ = false;
};

// gs-FC: softmax(W2 relu(Z W1 + 1 b1^T) + b2), collapsing the vertex
// dimension into one probability vector per step.
class GraphPoolLayer : public Layer {
 public:
  GraphPoolLayer(std::string name, int in_dim, int num_vertices, int num_classes,
                 Rng& rng);

  MatrixSequence forward(const MatrixSequence& in, bool train, Rng& rng) override;
  MatrixSequence backward(const MatrixSequence& grad_out) override;
  void collect_params(std::vector<NamedParam>& out) override;
  long param_count() const override;
  std::string describe() const override;

 private:
  std::string name_;
  int in_dim_, num_vertices_, num_classes_;
  Matrix w1_, b1_, w2_, b2_;
  Matrix w1_grad_, b1_grad_, w2_grad_, b2_grad_;

  MatrixSequence in_, hidden_, out_;
  bool have_cache_ = false;
};

// Inverted dropout; identity in eval mode.
class DropoutLayer : public Layer {
 public:
  DropoutLayer(double rate);

  MatrixSequence forward(const MatrixSequence& in, bool train, Rng& rng) override;
  MatrixSequence backward(const MatrixSequence& grad_out) override;
  std::string describe() const override;

 private:
  double rate_;
  MatrixSequence scaled_mask_;
  bool have_cache_ = false;
};

}  // namespace dgcn
