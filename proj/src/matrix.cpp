#include "dgcn/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace dgcn {

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* context) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(context) + ": shape mismatch " + shape_str(a) +
                     " vs " + shape_str(b));
  }
}

void require_mul_conform(const Matrix& a, const Matrix& b, const char* context) {
  if (a.cols() != b.rows()) {
    throw ShapeError(std::string(context) + ": cannot multiply " + shape_str(a) +
                     " by " + shape_str(b));
  }
}

Matrix activate(const Matrix& m, Activation kind) {
  switch (kind) {
    case Activation::Relu:
      return m.cwiseMax(0.0);
    case Activation::Sigmoid:
      return (1.0 / (1.0 + (-m.array()).exp())).matrix();
    case Activation::Tanh:
      return m.array().tanh().matrix();
  }
  throw std::logic_error("unknown activation");
}

Matrix activate_grad_from_output(const Matrix& out, Activation kind) {
  switch (kind) {
    case Activation::Relu:
      return (out.array() > 0.0).cast<double>().matrix();
    case Activation::Sigmoid:
      return (out.array() * (1.0 - out.array())).matrix();
    case Activation::Tanh:
      return (1.0 - out.array().square()).matrix();
  }
  throw std::logic_error("unknown activation");
}

Matrix softmax_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double mx = m.row(i).maxCoeff();
    Eigen::ArrayXd e = (m.row(i).array() - mx).exp();
    out.row(i) = (e / e.sum()).matrix();
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require_mul_conform(a, b, "matmul");
  return a * b;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  return a.cwiseProduct(b);
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  return a + b;
}

Matrix transpose(const Matrix& m) { return m.transpose(); }

Matrix concat_cols(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("concat_cols: row mismatch " + shape_str(a) + " vs " +
                     shape_str(b));
  }
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& p, double h) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff_grad: h must be > 0");
  Vector g(p.size());
  Vector q = p;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    q(i) = p(i) + h;
    const double fp = f(q);
    q(i) = p(i) - h;
    const double fm = f(q);
    q(i) = p(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

double grad_rel_err(double analytic, double numeric) {
  const double denom =
      std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / denom;
}

double max_grad_rel_err(const Vector& analytic, const Vector& numeric) {
  if (analytic.size() != numeric.size()) {
    throw std::invalid_argument("max_grad_rel_err: size mismatch");
  }
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, grad_rel_err(analytic(i), numeric(i)));
  }
  return worst;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

void require_uniform_sequence(const MatrixSequence& seq, const char* context) {
  if (seq.empty()) {
    throw std::invalid_argument(std::string(context) + ": empty sequence");
  }
  for (const Matrix& m : seq) {
    require_same_shape(seq.front(), m, context);
  }
}

}  // namespace dgcn
