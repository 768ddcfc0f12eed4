#include "dgcn/gradcheck.hpp"

#include "dgcn/training.hpp"

namespace dgcn {

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  }
  return m;
}

Vector flatten(const std::vector<NamedParam>& params, bool grads) {
  long total = 0;
  for (const auto& p : params) total += p.value->size();
  Vector v(total);
  long off = 0;
  for (const auto& p : params) {
    const Matrix* src = grads ? p.grad : p.value;
    v.segment(off, src->size()) = Eigen::Map<const Vector>(src->data(), src->size());
    off += src->size();
  }
  return v;
}

void unflatten(std::vector<NamedParam>& params, const Vector& v) {
  long off = 0;
  for (auto& p : params) {
    Eigen::Map<Vector>(p.value->data(), p.value->size()) =
        v.segment(off, p.value->size());
    off += p.value->size();
  }
}

double linear_loss(const MatrixSequence& out, const MatrixSequence& weights) {
  double loss = 0.0;
  for (size_t t = 0; t < out.size(); ++t) {
    loss += out[t].cwiseProduct(weights[t]).sum();
  }
  return loss;
}

}  // namespace

double layer_gradient_max_err(Layer& layer, const MatrixSequence& input,
                              uint64_t seed, double h) {
  Rng rng(seed);
  Rng fwd_rng(0);

  MatrixSequence probe = layer.forward(input, false, fwd_rng);
  MatrixSequence loss_weights;
  for (const Matrix& m : probe) {
    loss_weights.push_back(random_matrix(m.rows(), m.cols(), rng));
  }

  auto params = std::vector<NamedParam>();
  layer.collect_params(params);
  layer.zero_grad();
  layer.forward(input, false, fwd_rng);
  MatrixSequence grad_in = layer.backward(loss_weights);
  const Vector analytic_params = flatten(params, /*grads=*/true);

  double worst = 0.0;
  if (analytic_params.size() > 0) {
    const Vector p0 = flatten(params, /*grads=*/false);
    auto f = [&](const Vector& p) {
      unflatten(params, p);
      const double loss = linear_loss(layer.forward(input, false, fwd_rng), loss_weights);
      return loss;
    };
    const Vector numeric = finite_diff_grad(f, p0, h);
    unflatten(params, p0);
    worst = std::max(worst, max_grad_rel_err(analytic_params, numeric));
  }

  // Input gradient.
  long in_size = 0;
  for (const Matrix& m : input) in_size += m.size();
  Vector analytic_in(in_size);
  long off = 0;
  for (const Matrix& g : grad_in) {
    analytic_in.segment(off, g.size()) = Eigen::Map<const Vector>(g.data(), g.size());
    off += g.size();
  }
  Vector in0(in_size);
  off = 0;
  for (const Matrix& m : input) {
    in0.segment(off, m.size()) = Eigen::Map<const Vector>(m.data(), m.size());
    off += m.size();
  }
  auto f_in = [&](const Vector& x) {
    MatrixSequence seq = input;
    long o = 0;
    for (Matrix& m : seq) {
      m = Eigen::Map<const Matrix>(x.data() + o, m.rows(), m.cols());
      o += m.size();
    }
    return linear_loss(layer.forward(seq, false, fwd_rng), loss_weights);
  };
  const Vector numeric_in = finite_diff_grad(f_in, in0, h);
  worst = std::max(worst, max_grad_rel_err(analytic_in, numeric_in));
  return worst;
}

double model_gradient_max_err(Model& model, const GraphSequence& data,
                              uint64_t seed, double h) {
  Rng rng(seed);
  Rng fwd_rng(0);
  const ModelSpec& spec = model.spec();
  const int steps = data.steps();

  // Random labels for the task loss; vertex task labels half the vertices.
  VertexLabelData vlabels;
  GraphLabelData glabels;
  std::uniform_int_distribution<int> cls(0, spec.num_classes - 1);
  if (spec.task == TaskKind::Vertex) {
    std::vector<int> classes(spec.num_vertices);
    std::vector<int> labeled;
    for (int v = 0; v < spec.num_vertices; ++v) {
      classes[v] = cls(rng);
      if (v % 2 == 0) labeled.push_back(v);
    }
    vlabels = make_vertex_labels(classes, labeled, steps, spec.num_vertices,
                                 spec.num_classes);
  } else {
    glabels.labels = Matrix::Zero(steps, spec.num_classes);
    glabels.step_mask = Vector::Ones(steps);
    for (int t = 0; t < steps; ++t) glabels.labels(t, cls(rng)) = 1.0;
  }

  auto loss_and_grad = [&](MatrixSequence* grad) {
    MatrixSequence probs = model.forward(data, false, fwd_rng);
    return spec.task == TaskKind::Vertex
               ? vertex_masked_cross_entropy(probs, vlabels, grad)
               : graph_cross_entropy(probs, glabels, grad);
  };

  model.zero_grad();
  MatrixSequence grad;
  loss_and_grad(&grad);
  model.backward(grad);
  const Vector analytic = model.get_grad_vector();

  const Vector p0 = model.get_param_vector();
  auto f = [&](const Vector& p) {
    model.set_param_vector(p);
    return loss_and_grad(nullptr);
  };
  const Vector numeric = finite_diff_grad(f, p0, h);
  model.set_param_vector(p0);
  return max_grad_rel_err(analytic, numeric);
}

std::vector<GradCheckEntry> run_gradient_check_suite(double tol, double h) {
  std::vector<GradCheckEntry> out;
  const int v_count = 5, d = 5, m = 4, n = 3, steps = 3, k = 3;

  Rng init(42);
  Rng data_rng(7);

  // Shared toy graph sequence.
  MatrixSequence adj, feat;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < steps; ++t) {
    Matrix a = Matrix::Zero(v_count, v_count);
    for (int i = 0; i < v_count; ++i) {
      for (int j = i + 1; j < v_count; ++j) {
        if (unif(data_rng) < 0.5) a(i, j) = a(j, i) = 1.0;
      }
    }
    adj.push_back(a);
    feat.push_back(random_matrix(v_count, d, data_rng));
  }
  GraphSequence g(adj, feat);

  auto add = [&](const std::string& name, double err) {
    out.push_back({name, err, err <= tol});
  };

  {
    GraphConvLayer layer("gc", GraphConvMode::Waterfall, d, m, init);
    layer.bind_renormalized(&g.renormalized());
    add("wd-GC", layer_gradient_max_err(layer, g.features(), 11, h));
  }
  {
    GraphConvLayer layer("gc", GraphConvMode::Concat, d, m, init);
    layer.bind_renormalized(&g.renormalized());
    add("cd-GC", layer_gradient_max_err(layer, g.features(), 12, h));
  }
  {
    GraphConvLayer layer("gc", GraphConvMode::SoftmaxHead, d, k, init);
    layer.bind_renormalized(&g.renormalized());
    add("GC-softmax", layer_gradient_max_err(layer, g.features(), 13, h));
  }
  {
    VertexLstmLayer layer("lstm", d, n, false, init);
    MatrixSequence in;
    for (int t = 0; t < steps; ++t) in.push_back(random_matrix(v_count, d, data_rng));
    add("v-LSTM (T=3)", layer_gradient_max_err(layer, in, 14, h));
  }
  {
    VertexLstmLayer layer("lstm", d, n, true, init);
    MatrixSequence in;
    for (int t = 0; t < steps; ++t) in.push_back(random_matrix(v_count, d, data_rng));
    add("v-LSTM (candidate tanh)", layer_gradient_max_err(layer, in, 15, h));
  }
  {
    DenseSeqLayer layer("fc", d, k, DenseActivation::Relu, init);
    MatrixSequence in;
    for (int t = 0; t < steps; ++t) in.push_back(random_matrix(v_count, d, data_rng));
    add("FC-relu", layer_gradient_max_err(layer, in, 16, h));
  }
  {
    DenseSeqLayer layer("fc", d, k, DenseActivation::SoftmaxRows, init);
    MatrixSequence in;
    for (int t = 0; t < steps; ++t) in.push_back(random_matrix(v_count, d, data_rng));
    add("vs-FC", layer_gradient_max_err(layer, in, 17, h));
  }
  {
    GraphPoolLayer layer("gsfc", n, v_count, k, init);
    MatrixSequence in;
    for (int t = 0; t < steps; ++t) in.push_back(random_matrix(v_count, n, data_rng));
    add("gs-FC", layer_gradient_max_err(layer, in, 18, h));
  }

  // The four dynamic architectures end to end.
  for (ModelKind kind : {ModelKind::WdGcn, ModelKind::CdGcn}) {
    for (TaskKind task : {TaskKind::Vertex, TaskKind::Graph}) {
      ModelSpec spec;
      spec.kind = kind;
      spec.task = task;
      spec.num_vertices = v_count;
      spec.feature_dim = d;
      spec.num_classes = k;
      spec.gc_width = m;
      spec.lstm_width = n;
      Model model(spec, 123);
      const std::string name = std::string(model_kind_name(kind)) + " (" +
                               (task == TaskKind::Vertex ? "vertex" : "graph") +
                               ")";
      add(name, model_gradient_max_err(model, g, 21, h));
    }
  }
  return out;
}

}  // namespace dgcn
