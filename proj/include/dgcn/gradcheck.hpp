#pragma once

#include "dgcn/model.hpp"

#include <string>
#include <vector>

namespace dgcn {

// Max of the per-coordinate metric |a-g|/max(1,|a|,|g|) between analytic
// and central-difference gradients, over all layer parameters and the
// layer input. Loss is a fixed random linear functional of the outputs.
double layer_gradient_max_err(Layer& layer, const MatrixSequence& input,
                              uint64_t seed, double h = 1e-6);

// Same check for a composed model under its task loss.
double model_gradient_max_err(Model& model, const GraphSequence& data,
                              uint64_t seed, double h = 1e-6);

struct GradCheckEntry {
  std::string name;
  double max_rel_err;
  bool pass;
};

// The full finite-difference suite: every layer kind at toy shapes
// (including the LSTM through-time case, T = 3) and the four dynamic
// architectures end to end.
std::vector<GradCheckEntry> run_gradient_check_suite(double tol = 1e-5,
                                                     double h = 1e-6);

}  // namespace dgcn
