#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mloc/layers.hpp"

namespace mloc {

struct GradCheckBlock {
    std::string name;
    double max_rel_error = 0.0;
    bool finite = true;
};

struct GradCheckReport {
    std::vector<GradCheckBlock> blocks;
    double tolerance = 1e-4;

    bool passed() const {
        for (const auto& b : blocks)
            if (!b.finite || b.max_rel_error >= tolerance) return false;
        return !blocks.empty();
    }
    std::string to_string() const;
};

// Compares analytic parameter gradients against central finite differences.
//   loss():          evaluates the scalar loss at the current parameters
//   compute_grads(): zeroes grads, runs forward+backward, fills grad buffers
// Perturbation is 1e-5; everything runs in double precision.
GradCheckReport finite_diff_check(std::vector<ParamRef> params,
                                  const std::function<double()>& loss,
                                  const std::function<void()>& compute_grads,
                                  double tolerance = 1e-4);

// Convenience check of a network against an arbitrary scalar loss of its
// output for a fixed input.
GradCheckReport finite_diff_check_network(
    Network& net, const Tensor& input,
    const std::function<double(const std::vector<double>&)>& loss_of_output,
    const std::function<std::vector<double>(const std::vector<double>&)>& loss_grad_of_output,
    double tolerance = 1e-4);

// Full pair head: both inputs through the shared-weight network, mapped
// distance, contrastive loss at the given target.
GradCheckReport finite_diff_check_siamese(Network& net, const Tensor& input_a,
                                          const Tensor& input_b, double target,
                                          double tolerance = 1e-4);

}  // namespace mloc
