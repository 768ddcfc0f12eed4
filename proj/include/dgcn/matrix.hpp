#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dgcn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Ordered sequence of equally shaped matrices, one per time step.
using MatrixSequence = std::vector<Matrix>;

enum class Activation { Relu, Sigmoid, Tanh };

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string shape_str(const Matrix& m);

void require_same_shape(const Matrix& a, const Matrix& b, const char* context);
void require_mul_conform(const Matrix& a, const Matrix& b, const char* context);

Matrix activate(const Matrix& m, Activation kind);
// Derivative of the activation expressed through its output value.
Matrix activate_grad_from_output(const Matrix& out, Activation kind);

// Row-wise softmax with max-shift for overflow safety.
Matrix softmax_rows(const Matrix& m);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix concat_cols(const Matrix& a, const Matrix& b);

// Central finite differences, the gradient oracle used by every backward test.
Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& p, double h = 1e-6);

// Comparison metric for gradient checks: |a-g| / max(1, |a|, |g|).
double grad_rel_err(double analytic, double numeric);
double max_grad_rel_err(const Vector& analytic, const Vector& numeric);

bool all_finite(const Matrix& m);
void require_uniform_sequence(const MatrixSequence& seq, const char* context);

}  // namespace dgcn
