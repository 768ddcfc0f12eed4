#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dgcn/gradcheck.hpp"
#include "dgcn/graph.hpp"
#include "dgcn/layers.hpp"

#include <cmath>
#include <map>

using namespace dgcn;

namespace {

std::map<std::string, Matrix*> param_map(Layer& layer) {
  std::vector<NamedParam> params;
  layer.collect_params(params);
  std::map<std::string, Matrix*> out;
  for (auto& p : params) out[p.name] = p.value;
  return out;
}

void zero_params(Layer& layer) {
  std::vector<NamedParam> params;
  layer.collect_params(params);
  for (auto& p : params) p.value->setZero();
}

GraphSequence half_mix_graph() {
  // Single complete 2-vertex graph: Â = [[.5,.5],[.5,.5]].
  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  Matrix x(2, 2);
  x << 1, -1, 2, 0;
  return GraphSequence({a}, {x});
}

}  // namespace

TEST_CASE("graph convolution hand value") {
  Rng rng(1);
  GraphSequence g = half_mix_graph();
  GraphConvLayer layer("gc", GraphConvMode::Waterfall, 2, 2, rng);
  *param_map(layer)["gc.B"] = Matrix::Identity(2, 2);
  layer.bind_renormalized(&g.renormalized());
  MatrixSequence out = layer.forward(g.features(), false, rng);
  // ÂX = [[1.5,-0.5],[1.5,-0.5]]; relu clips the negative column.
  Matrix expect(2, 2);
  expect << 1.5, 0, 1.5, 0;
  CHECK((out[0] - expect).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("graph convolution with zero weight is zero") {
  Rng rng(1);
  GraphSequence g = half_mix_graph();
  GraphConvLayer layer("gc", GraphConvMode::Waterfall, 2, 3, rng);
  param_map(layer)["gc.B"]->setZero();
  layer.bind_renormalized(&g.renormalized());
  CHECK(layer.forward(g.features(), false, rng)[0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("identity adjacency reduces graph convolution to relu of XB") {
  Rng rng(2);
  MatrixSequence adj{Matrix::Zero(3, 3)};  // renormalizes to I
  Matrix x(3, 2);
  x << -1, 2, 0.5, -3, 4, 1;
  GraphSequence g(adj, {x});
  GraphConvLayer layer("gc", GraphConvMode::Waterfall, 2, 2, rng);
  *param_map(layer)["gc.B"] = Matrix::Identity(2, 2);
  layer.bind_renormalized(&g.renormalized());
  MatrixSequence out = layer.forward(g.features(), false, rng);
  CHECK((out[0] - activate(x, Activation::Relu)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("concat mode passes the input through verbatim") {
  Rng rng(3);
  GraphSequence g = half_mix_graph();
  GraphConvLayer layer("gc", GraphConvMode::Concat, 2, 2, rng);
  *param_map(layer)["gc.B"] = Matrix::Identity(2, 2);
  layer.bind_renormalized(&g.renormalized());
  MatrixSequence out = layer.forward(g.features(), false, rng);
  Matrix expect(2, 4);
  expect << 1, -1, 1.5, 0, 2, 0, 1.5, 0;
  CHECK((out[0] - expect).cwiseAbs().maxCoeff() <= 1e-14);
  // First d columns equal the input bit for bit.
  CHECK((out[0].leftCols(2) - g.features()[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weight sharing: identical steps give identical outputs") {
  Rng rng(4);
  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  Matrix x(2, 2);
  x << 1, -1, 2, 0;
  GraphSequence g({a, a, a}, {x, x, x});
  GraphConvLayer layer("gc", GraphConvMode::Waterfall, 2, 3, rng);
  layer.bind_renormalized(&g.renormalized());
  MatrixSequence out = layer.forward(g.features(), false, rng);
  CHECK((out[0] - out[1]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((out[0] - out[2]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lstm hand values with all parameters zero") {
  // d = N = 1, every weight and bias zero: gates sit at 0.5 and the
  // candidate at 0.5, so c_1 = 0.25, c_2 = 0.375.
  Rng rng(5);
  VertexLstmLayer layer("lstm", 1, 1, false, rng);
  zero_params(layer);
  MatrixSequence in{Matrix::Constant(1, 1, 3.0), Matrix::Constant(1, 1, -2.0)};
  MatrixSequence out = layer.forward(in, false, rng);
  CHECK(out.size() == 2);
  CHECK(out[0](0, 0) == doctest::Approx(0.5 * std::tanh(0.25)).epsilon(1e-12));
  CHECK(out[1](0, 0) == doctest::Approx(0.5 * std::tanh(0.375)).epsilon(1e-12));
}

TEST_CASE("lstm output length equals input length") {
  Rng rng(6);
  VertexLstmLayer layer("lstm", 3, 4, false, rng);
  MatrixSequence in(5, Matrix::Ones(2, 3));
  CHECK(layer.forward(in, false, rng).size() == 5);
}

TEST_CASE("row-shared lstm: identical rows and row permutations") {
  Rng rng(7);
  VertexLstmLayer layer("lstm", 2, 3, false, rng);
  Matrix x(2, 2);
  x << 1.0, -0.5, 1.0, -0.5;  // identical rows
  MatrixSequence out = layer.forward({x, x}, false, rng);
  for (const Matrix& h : out) {
    CHECK((h.row(0) - h.row(1)).cwiseAbs().maxCoeff() == 0.0);
  }

  Matrix y(2, 2);
  y << 1.0, -0.5, 0.25, 2.0;
  Matrix y_swapped = y.colwise().reverse();
  MatrixSequence a = layer.forward({y}, false, rng);
  MatrixSequence b = layer.forward({y_swapped}, false, rng);
  CHECK((a[0].colwise().reverse() - b[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("softmax head hand value") {
  Rng rng(8);
  DenseSeqLayer layer("fc", 1, 2, DenseActivation::SoftmaxRows, rng);
  auto params = param_map(layer);
  *params["fc.W"] = (Matrix(1, 2) << std::log(2.0), 0.0).finished();
  params["fc.b"]->setZero();
  MatrixSequence out = layer.forward({Matrix::Constant(1, 1, 1.0)}, false, rng);
  CHECK(out[0](0, 0) == doctest::Approx(2.0 / 3).epsilon(1e-14));
  CHECK(out[0](0, 1) == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("softmax head with zero parameters is uniform") {
  Rng rng(9);
  DenseSeqLayer layer("fc", 3, 4, DenseActivation::SoftmaxRows, rng);
  zero_params(layer);
  MatrixSequence out = layer.forward({Matrix::Ones(2, 3)}, false, rng);
  CHECK((out[0].array() - 0.25).abs().maxCoeff() <= 1e-15);
}

TEST_CASE("graph pooling head hand value") {
  Rng rng(10);
  GraphPoolLayer layer("gsfc", 1, 2, 2, rng);
  auto params = param_map(layer);
  *params["gsfc.W1"] = (Matrix(1, 2) << 1.0, 0.0).finished();
  params["gsfc.b1"]->setZero();
  *params["gsfc.W2"] = (Matrix(1, 2) << 1.0, 1.0).finished();
  params["gsfc.b2"]->setZero();
  Matrix z(2, 1);
  z << 1, 2;
  MatrixSequence out = layer.forward({z}, false, rng);
  // softmax(3, 0)
  const double e3 = std::exp(3.0);
  CHECK(out[0].rows() == 1);
  CHECK(out[0](0, 0) == doctest::Approx(e3 / (e3 + 1)).epsilon(1e-12));
  CHECK(out[0](0, 1) == doctest::Approx(1.0 / (e3 + 1)).epsilon(1e-12));
}

TEST_CASE("graph pooling head with zero first layer is uniform") {
  Rng rng(11);
  GraphPoolLayer layer("gsfc", 3, 4, 5, rng);
  auto params = param_map(layer);
  params["gsfc.W1"]->setZero();
  params["gsfc.b1"]->setZero();
  params["gsfc.b2"]->setZero();
  MatrixSequence out = layer.forward({Matrix::Ones(4, 3)}, false, rng);
  CHECK((out[0].array() - 0.2).abs().maxCoeff() <= 1e-15);
}

TEST_CASE("dropout identity cases and Monte Carlo mean") {
  Rng rng(12);
  MatrixSequence in{Matrix::Ones(1, 1)};
  {
    DropoutLayer layer(0.0);
    CHECK(layer.forward(in, true, rng)[0](0, 0) == 1.0);
  }
  DropoutLayer layer(0.5);
  CHECK(layer.forward(in, false, rng)[0](0, 0) == 1.0);  // eval mode

  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += layer.forward(in, true, rng)[0](0, 0);
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.01));

  CHECK_THROWS_AS(DropoutLayer(1.0), std::invalid_argument);
}

TEST_CASE("backward without a cached forward throws naming the layer") {
  Rng rng(13);
  DenseSeqLayer layer("head", 2, 2, DenseActivation::Relu, rng);
  CHECK_THROWS_WITH_AS(layer.backward({Matrix::Ones(1, 2)}),
                       doctest::Contains("head"), std::logic_error);
}

TEST_CASE("dead relu region gives zero weight gradient") {
  Rng rng(14);
  MatrixSequence adj{Matrix::Zero(2, 2)};
  Matrix x = Matrix::Constant(2, 2, -1.0);
  GraphSequence g(adj, {x});
  GraphConvLayer layer("gc", GraphConvMode::Waterfall, 2, 2, rng);
  *param_map(layer)["gc.B"] = Matrix::Identity(2, 2);
  layer.bind_renormalized(&g.renormalized());
  layer.zero_grad();
  layer.forward(g.features(), false, rng);
  layer.backward({Matrix::Ones(2, 2)});
  std::vector<NamedParam> params;
  layer.collect_params(params);
  CHECK(params[0].grad->cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("shared parameters accumulate the sum of per-step gradients") {
  Rng rng(15);
  Matrix a(3, 3);
  a.setZero();
  a(0, 1) = a(1, 0) = 1.0;
  a(1, 2) = a(2, 1) = 1.0;
  Matrix x0(3, 2), x1(3, 2);
  x0 << 1, -1, 0.5, 2, -0.25, 0.75;
  x1 << 0.1, 0.9, -1.5, 0.3, 2.0, -0.4;
  GraphSequence both({a, a}, {x0, x1});
  GraphSequence first({a}, {x0});
  GraphSequence second({a}, {x1});

  Rng init(99);
  GraphConvLayer layer("gc", GraphConvMode::Waterfall, 2, 3, init);
  std::vector<NamedParam> params;
  layer.collect_params(params);
  MatrixSequence ones2{Matrix::Ones(3, 3), Matrix::Ones(3, 3)};

  layer.bind_renormalized(&both.renormalized());
  layer.zero_grad();
  layer.forward(both.features(), false, rng);
  layer.backward(ones2);
  Matrix grad_both = *params[0].grad;

  Matrix grad_sum = Matrix::Zero(2, 3);
  for (const GraphSequence* g : {&first, &second}) {
    layer.bind_renormalized(&g->renormalized());
    layer.zero_grad();
    layer.forward(g->features(), false, rng);
    layer.backward({Matrix::Ones(3, 3)});
    grad_sum += *params[0].grad;
  }
  CHECK((grad_both - grad_sum).cwiseAbs().maxCoeff() <= 1e-9);
}

namespace {

// Intentionally wrong backward pass: the weight gradient is scaled by 0.9.
// Used to prove the finite-difference harness actually catches errors.
class CorruptDenseLayer : public Layer {
 public:
  CorruptDenseLayer() : w_(Matrix::Ones(2, 2) * 0.5), g_(Matrix::Zero(2, 2)) {
    w_(0, 1) = -0.25;
  }

  MatrixSequence forward(const MatrixSequence& in, bool, Rng&) override {
    in_ = in;
    MatrixSequence out;
    for (const Matrix& m : in) out.push_back(m * w_);
    return out;
  }

  MatrixSequence backward(const MatrixSequence& grad_out) override {
    MatrixSequence grad_in;
    for (size_t t = 0; t < grad_out.size(); ++t) {
      g_ += 0.9 * in_[t].transpose() * grad_out[t];
      grad_in.push_back(grad_out[t] * w_.transpose());
    }
    return grad_in;
  }

  void collect_params(std::vector<NamedParam>& out) override {
    out.push_back({"corrupt.W", &w_, &g_});
  }
  long param_count() const override { return w_.size(); }
  std::string describe() const override { return "corrupt-dense"; }

 private:
  Matrix w_, g_;
  MatrixSequence in_;
};

}  // namespace

TEST_CASE("a corrupted backward pass fails the gradient check by name") {
  CorruptDenseLayer layer;
  MatrixSequence in{Matrix::Ones(3, 2)};
  in[0](1, 0) = -0.5;
  const double err = layer_gradient_max_err(layer, in, 33);
  GradCheckEntry entry{layer.describe(), err, err <= 1e-5};
  CHECK_FALSE(entry.pass);
  CHECK(entry.name == "corrupt-dense");
}

TEST_CASE("full gradient suite passes at tolerance") {
  for (const auto& entry : run_gradient_check_suite()) {
    INFO(entry.name, " max_rel_err ", entry.max_rel_err);
    CHECK(entry.pass);
    CHECK(entry.max_rel_err <= 1e-5);
  }
}
