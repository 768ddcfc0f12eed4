#include "dgcn/layers.hpp"

#include <cmath>

namespace dgcn {

Matrix glorot_uniform(int rows, int cols, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = dist(rng);
  }
  return m;
}

void Layer::zero_grad() {
  std::vector<NamedParam> params;
  collect_params(params);
  for (auto& p : params) p.grad->setZero();
}

void Layer::require_forward_cache(bool have) const {
  if (!have) {
    throw std::logic_error(describe() + ": backward called without a cached forward");
  }
}

namespace {

// Backward through a row-wise softmax given grad wrt its output.
Matrix softmax_rows_backward(const Matrix& probs, const Matrix& grad_out) {
  Matrix grad_pre(probs.rows(), probs.cols());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const double dot = probs.row(i).dot(grad_out.row(i));
    grad_pre.row(i) =
        probs.row(i).cwiseProduct(grad_out.row(i)) - dot * probs.row(i);
  }
  return grad_pre;
}

}  // namespace

// ---------------------------------------------------------------------------
// GraphConvLayer

GraphConvLayer::GraphConvLayer(std::string name, GraphConvMode mode, int in_dim,
                               int out_dim, Rng& rng)
    : name_(std::move(name)),
      mode_(mode),
      in_dim_(in_dim),
      out_dim_(out_dim),
      weight_(glorot_uniform(in_dim, out_dim, in_dim, out_dim, rng)),
      weight_grad_(Matrix::Zero(in_dim, out_dim)) {}

MatrixSequence GraphConvLayer::forward(const MatrixSequence& in, bool, Rng&) {
  if (a_hat_ == nullptr || a_hat_->size() != in.size()) {
    throw std::logic_error(describe() + ": renormalized adjacencies not bound");
  }
  if (in.front().cols() != in_dim_) {
    throw ShapeError(describe() + ": expected " + std::to_string(in_dim_) +
                     " input columns, got " + shape_str(in.front()));
  }
  mixed_.clear();
  act_.clear();
  MatrixSequence out;
  for (size_t t = 0; t < in.size(); ++t) {
    Matrix mixed = (*a_hat_)[t] * in[t];
    Matrix pre = mixed * weight_;
    switch (mode_) {
      case GraphConvMode::Waterfall: {
        Matrix a = activate(pre, Activation::Relu);
        act_.push_back(a);
        out.push_back(std::move(a));
        break;
      }
      case GraphConvMode::Concat: {
        Matrix a = activate(pre, Activation::Relu);
        act_.push_back(a);
        out.push_back(concat_cols(in[t], a));
        break;
      }
      case GraphConvMode::SoftmaxHead: {
        Matrix a = softmax_rows(pre);
        act_.push_back(a);
        out.push_back(a);
        break;
      }
    }
    mixed_.push_back(std::move(mixed));
  }
  have_cache_ = true;
  return out;
}

MatrixSequence GraphConvLayer::backward(const MatrixSequence& grad_out) {
  require_forward_cache(have_cache_);
  MatrixSequence grad_in;
  for (size_t t = 0; t < grad_out.size(); ++t) {
    Matrix grad_act;
    Matrix grad_pass;  // grad of the concatenated passthrough, if any
    if (mode_ == GraphConvMode::Concat) {
      grad_pass = grad_out[t].leftCols(in_dim_);
      grad_act = grad_out[t].rightCols(out_dim_);
    } else {
      grad_act = grad_out[t];
    }
    Matrix grad_pre;
    if (mode_ == GraphConvMode::SoftmaxHead) {
      grad_pre = softmax_rows_backward(act_[t], grad_act);
    } else {
      grad_pre = grad_act.cwiseProduct(
          activate_grad_from_output(act_[t], Activation::Relu));
    }
    weight_grad_ += mixed_[t].transpose() * grad_pre;
    Matrix gin = (*a_hat_)[t].transpose() * (grad_pre * weight_.transpose());
    if (mode_ == GraphConvMode::Concat) gin += grad_pass;
    grad_in.push_back(std::move(gin));
  }
  have_cache_ = false;
  return grad_in;
}

void GraphConvLayer::collect_params(std::vector<NamedParam>& out) {
  out.push_back({name_ + ".B", &weight_, &weight_grad_});
}

long GraphConvLayer::param_count() const {
  return static_cast<long>(in_dim_) * out_dim_;
}

std::string GraphConvLayer::describe() const {
  switch (mode_) {
    case GraphConvMode::Waterfall: return name_ + " wd-GC(" + std::to_string(out_dim_) + ")";
    case GraphConvMode::Concat: return name_ + " cd-GC(" + std::to_string(out_dim_) + ")";
    default: return name_ + " GC-softmax(" + std::to_string(out_dim_) + ")";
  }
}

// ---------------------------------------------------------------------------
// VertexLstmLayer

VertexLstmLayer::VertexLstmLayer(std::string name, int in_dim, int hidden_dim,
                                 bool candidate_tanh, Rng& rng)
    : name_(std::move(name)),
      in_dim_(in_dim),
      hidden_dim_(hidden_dim),
      candidate_tanh_(candidate_tanh) {
  init_gate(out_gate_, rng);
  init_gate(forget_, rng);
  init_gate(input_, rng);
  init_gate(cand_, rng);
}

void VertexLstmLayer::init_gate(Gate& g, Rng& rng) {
  g.w = glorot_uniform(in_dim_, hidden_dim_, in_dim_, hidden_dim_, rng);
  g.u = glorot_uniform(hidden_dim_, hidden_dim_, hidden_dim_, hidden_dim_, rng);
  g.b_in = Matrix::Zero(1, hidden_dim_);
  g.b_rec = Matrix::Zero(1, hidden_dim_);
  g.w_g = Matrix::Zero(in_dim_, hidden_dim_);
  g.u_g = Matrix::Zero(hidden_dim_, hidden_dim_);
  g.b_in_g = Matrix::Zero(1, hidden_dim_);
  g.b_rec_g = Matrix::Zero(1, hidden_dim_);
}

MatrixSequence VertexLstmLayer::forward(const MatrixSequence& in, bool, Rng&) {
  if (in.front().cols() != in_dim_) {
    throw ShapeError(describe() + ": expected " + std::to_string(in_dim_) +
                     " input columns, got " + shape_str(in.front()));
  }
  const Eigen::Index rows = in.front().rows();
  const Activation cand_act =
      candidate_tanh_ ? Activation::Tanh : Activation::Sigmoid;

  Matrix h = Matrix::Zero(rows, hidden_dim_);
  Matrix c = Matrix::Zero(rows, hidden_dim_);
  cache_.clear();
  MatrixSequence out;
  auto gate_pre = [&](const Gate& g, const Matrix& x) {
    return ((x * g.w + h * g.u).rowwise() +
            (g.b_in + g.b_rec).row(0))
        .eval();
  };
  for (const Matrix& x : in) {
    StepCache s;
    s.x = x;
    s.h_prev = h;
    s.c_prev = c;
    s.o = activate(gate_pre(out_gate_, x), Activation::Sigmoid);
    s.f = activate(gate_pre(forget_, x), Activation::Sigmoid);
    s.j = activate(gate_pre(input_, x), Activation::Sigmoid);
    s.cand = activate(gate_pre(cand_, x), cand_act);
    c = s.j.cwiseProduct(s.cand) + s.f.cwiseProduct(c);
    s.c = c;
    s.c_tanh = activate(c, Activation::Tanh);
    h = s.o.cwiseProduct(s.c_tanh);
    out.push_back(h);
    cache_.push_back(std::move(s));
  }
  have_cache_ = true;
  return out;
}

MatrixSequence VertexLstmLayer::backward(const MatrixSequence& grad_out) {
  require_forward_cache(have_cache_);
  const Eigen::Index rows = cache_.front().x.rows();
  const Activation cand_act =
      candidate_tanh_ ? Activation::Tanh : Activation::Sigmoid;

  MatrixSequence grad_in(cache_.size());
  Matrix dh_rec = Matrix::Zero(rows, hidden_dim_);
  Matrix dc = Matrix::Zero(rows, hidden_dim_);
  for (int t = static_cast<int>(cache_.size()) - 1; t >= 0; --t) {
    const StepCache& s = cache_[t];
    Matrix dh = grad_out[t] + dh_rec;
    Matrix do_ = dh.cwiseProduct(s.c_tanh);
    dc += dh.cwiseProduct(s.o).cwiseProduct(
        activate_grad_from_output(s.c_tanh, Activation::Tanh));
    Matrix dj = dc.cwiseProduct(s.cand);
    Matrix dcand = dc.cwiseProduct(s.j);
    Matrix df = dc.cwiseProduct(s.c_prev);
    Matrix dc_prev = dc.cwiseProduct(s.f);

    Matrix dx = Matrix::Zero(rows, in_dim_);
    dh_rec = Matrix::Zero(rows, hidden_dim_);
    auto through_gate = [&](Gate& g, const Matrix& gate_out, const Matrix& dgate,
                            Activation act) {
      Matrix dpre = dgate.cwiseProduct(activate_grad_from_output(gate_out, act));
      g.w_g += s.x.transpose() * dpre;
      g.u_g += s.h_prev.transpose() * dpre;
      Matrix colsum = dpre.colwise().sum();
      g.b_in_g += colsum;
      g.b_rec_g += colsum;
      dx += dpre * g.w.transpose();
      dh_rec += dpre * g.u.transpose();
    };
    through_gate(out_gate_, s.o, do_, Activation::Sigmoid);
    through_gate(forget_, s.f, df, Activation::Sigmoid);
    through_gate(input_, s.j, dj, Activation::Sigmoid);
    through_gate(cand_, s.cand, dcand, cand_act);

    grad_in[t] = std::move(dx);
    dc = std::move(dc_prev);
  }
  have_cache_ = false;
  return grad_in;
}

void VertexLstmLayer::collect_gate(std::vector<NamedParam>& out, Gate& g,
                                   const char* tag) {
  out.push_back({name_ + ".W_" + tag, &g.w, &g.w_g});
  out.push_back({name_ + ".U_" + tag, &g.u, &g.u_g});
  out.push_back({name_ + ".b_" + tag, &g.b_in, &g.b_in_g});
  out.push_back({name_ + ".r_" + tag, &g.b_rec, &g.b_rec_g});
}

void VertexLstmLayer::collect_params(std::vector<NamedParam>& out) {
  collect_gate(out, out_gate_, "o");
  collect_gate(out, forget_, "f");
  collect_gate(out, input_, "j");
  collect_gate(out, cand_, "c");
}

long VertexLstmLayer::param_count() const {
  const long n = hidden_dim_;
  return 4 * (static_cast<long>(in_dim_) * n + n * n + 2 * n);
}

std::string VertexLstmLayer::describe() const {
  return name_ + " v-LSTM(" + std::to_string(hidden_dim_) + ")";
}

// ---------------------------------------------------------------------------
// DenseSeqLayer

DenseSeqLayer::DenseSeqLayer(std::string name, int in_dim, int out_dim,
                             DenseActivation act, Rng& rng)
    : name_(std::move(name)),
      in_dim_(in_dim),
      out_dim_(out_dim),
      softmax_(act == DenseActivation::SoftmaxRows),
      weight_(glorot_uniform(in_dim, out_dim, in_dim, out_dim, rng)),
      bias_(Matrix::Zero(1, out_dim)),
      weight_grad_(Matrix::Zero(in_dim, out_dim)),
      bias_grad_(Matrix::Zero(1, out_dim)) {}

MatrixSequence DenseSeqLayer::forward(const MatrixSequence& in, bool, Rng&) {
  if (in.front().cols() != in_dim_) {
    throw ShapeError(describe() + ": expected " + std::to_string(in_dim_) +
                     " input columns, got " + shape_str(in.front()));
  }
  in_ = in;
  out_.clear();
  for (const Matrix& z : in) {
    Matrix pre = (z * weight_).rowwise() + bias_.row(0);
    out_.push_back(softmax_ ? softmax_rows(pre) : activate(pre, Activation::Relu));
  }
  have_cache_ = true;
  return out_;
}

MatrixSequence DenseSeqLayer::backward(const MatrixSequence& grad_out) {
  require_forward_cache(have_cache_);
  MatrixSequence grad_in;
  for (size_t t = 0; t < grad_out.size(); ++t) {
    Matrix grad_pre =
        softmax_
            ? softmax_rows_backward(out_[t], grad_out[t])
            : grad_out[t]
                  .cwiseProduct(
                      activate_grad_from_output(out_[t], Activation::Relu))
                  .eval();
    weight_grad_ += in_[t].transpose() * grad_pre;
    bias_grad_ += grad_pre.colwise().sum();
    grad_in.push_back(grad_pre * weight_.transpose());
  }
  have_cache_ = false;
  return grad_in;
}

void DenseSeqLayer::collect_params(std::vector<NamedParam>& out) {
  out.push_back({name_ + ".W", &weight_, &weight_grad_});
  out.push_back({name_ + ".b", &bias_, &bias_grad_});
}

long DenseSeqLayer::param_count() const {
  return static_cast<long>(in_dim_) * out_dim_ + out_dim_;
}

std::string DenseSeqLayer::describe() const {
  return name_ + (softmax_ ? " vs-FC-softmax(" : " FC-relu(") +
         std::to_string(out_dim_) + ")";
}

// ---------------------------------------------------------------------------
// GraphPoolLayer

GraphPoolLayer::GraphPoolLayer(std::string name, int in_dim, int num_vertices,
                               int num_classes, Rng& rng)
    : name_(std::move(name)),
      in_dim_(in_dim),
      num_vertices_(num_vertices),
      num_classes_(num_classes),
      w1_(glorot_uniform(in_dim, num_classes, in_dim, num_classes, rng)),
      b1_(Matrix::Zero(1, num_classes)),
      w2_(glorot_uniform(1, num_vertices, num_vertices, 1, rng)),
      b2_(Matrix::Zero(1, num_classes)),
      w1_grad_(Matrix::Zero(in_dim, num_classes)),
      b1_grad_(Matrix::Zero(1, num_classes)),
      w2_grad_(Matrix::Zero(1, num_vertices)),
      b2_grad_(Matrix::Zero(1, num_classes)) {}

MatrixSequence GraphPoolLayer::forward(const MatrixSequence& in, bool, Rng&) {
  if (in.front().cols() != in_dim_ || in.front().rows() != num_vertices_) {
    throw ShapeError(describe() + ": expected " +
                     std::to_string(num_vertices_) + "x" +
                     std::to_string(in_dim_) + " input, got " +
                     shape_str(in.front()));
  }
  in_ = in;
  hidden_.clear();
  out_.clear();
  for (const Matrix& z : in) {
    Matrix h = activate(((z * w1_).rowwise() + b1_.row(0)).eval(),
                        Activation::Relu);                    // L x k
    Matrix pre2 = w2_ * h + b2_;                              // 1 x k
    hidden_.push_back(std::move(h));
    out_.push_back(softmax_rows(pre2));
  }
  have_cache_ = true;
  return out_;
}

MatrixSequence GraphPoolLayer::backward(const MatrixSequence& grad_out) {
  require_forward_cache(have_cache_);
  MatrixSequence grad_in;
  for (size_t t = 0; t < grad_out.size(); ++t) {
    Matrix dpre2 = softmax_rows_backward(out_[t], grad_out[t]);  // 1 x k
    w2_grad_ += dpre2 * hidden_[t].transpose();
    b2_grad_ += dpre2;
    Matrix dh = w2_.transpose() * dpre2;  // L x k
    Matrix dpre1 = dh.cwiseProduct(
        activate_grad_from_output(hidden_[t], Activation::Relu));
    w1_grad_ += in_[t].transpose() * dpre1;
    b1_grad_ += dpre1.colwise().sum();
    grad_in.push_back(dpre1 * w1_.transpose());
  }
  have_cache_ = false;
  return grad_in;
}

void GraphPoolLayer::collect_params(std::vector<NamedParam>& out) {
  out.push_back({name_ + ".W1", &w1_, &w1_grad_});
  out.push_back({name_ + ".b1", &b1_, &b1_grad_});
  out.push_back({name_ + ".W2", &w2_, &w2_grad_});
  out.push_back({name_ + ".b2", &b2_, &b2_grad_});
}

long GraphPoolLayer::param_count() const {
  return static_cast<long>(in_dim_) * num_classes_ + num_classes_ +
         num_vertices_ + num_classes_;
}

std::string GraphPoolLayer::describe() const {
  return name_ + " gs-FC(" + std::to_string(num_classes_) + ")";
}

// ---------------------------------------------------------------------------
// DropoutLayer

DropoutLayer::DropoutLayer(double rate) : rate_(rate) {
  if (rate < 0.0 || rate >= 1.0) {
    throw std::invalid_argument("dropout rate must be in [0, 1), got " +
                                std::to_string(rate));
  }
}

MatrixSequence DropoutLayer::forward(const MatrixSequence& in, bool train,
                                     Rng& rng) {
  if (!train || rate_ == 0.0) {
    scaled_mask_.clear();
    have_cache_ = true;
    return in;
  }
  std::bernoulli_distribution keep(1.0 - rate_);
  const double scale = 1.0 / (1.0 - rate_);
  scaled_mask_.clear();
  MatrixSequence out;
  for (const Matrix& m : in) {
    Matrix mask(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        mask(i, j) = keep(rng) ? scale : 0.0;
      }
    }
    out.push_back(m.cwiseProduct(mask));
    scaled_mask_.push_back(std::move(mask));
  }
  have_cache_ = true;
  return out;
}

MatrixSequence DropoutLayer::backward(const MatrixSequence& grad_out) {
  require_forward_cache(have_cache_);
  have_cache_ = false;
  if (scaled_mask_.empty()) return grad_out;
  MatrixSequence grad_in;
  for (size_t t = 0; t < grad_out.size(); ++t) {
    grad_in.push_back(grad_out[t].cwiseProduct(scaled_mask_[t]));
  }
  return grad_in;
}

std::string DropoutLayer::describe() const {
  return "dropout(" + std::to_string(rate_) + ")";
}

}  // namespace dgcn
