#include "mloc/optimizer.hpp"

#include <cmath>

#include "mloc/error.hpp"

namespace mloc {

void Rmsprop::step(std::vector<Tensor*> params) {
    if (mean_sq_.empty()) {
        mean_sq_.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i)
            mean_sq_[i].assign(params[i]->numel(), 0.0);
    }
    if (mean_sq_.size() != params.size()) {
        throw Error("rmsprop: parameter list changed between steps");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        if (p.grad.size() != p.data.size()) {
            throw Error("rmsprop: parameter " + std::to_string(i) + " has no gradient");
        }
        auto& ms = mean_sq_[i];
        for (std::size_t j = 0; j < p.numel(); ++j) {
            const double g = p.grad[j];
            ms[j] = cfg_.decay * ms[j] + (1.0 - cfg_.decay) * g * g;
            p.data[j] -= cfg_.learning_rate * g / (std::sqrt(ms[j]) + cfg_.epsilon);
        }
    }
}

}  // namespace mloc
