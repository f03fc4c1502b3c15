#pragma once

#include <vector>

#include "mloc/tensor.hpp"

namespace mloc {

// RMSprop with the optimizer's canonical defaults. One state instance owns the
// running squared-gradient averages for a fixed parameter list.
struct RmspropConfig {
    double learning_rate = 1e-3;
    double decay = 0.9;
    double epsilon = 1e-8;
};

class Rmsprop {
public:
    explicit Rmsprop(RmspropConfig cfg = {}) : cfg_(cfg) {}

    const RmspropConfig& config() const { return cfg_; }

    // Applies one step to every parameter using its grad buffer.
    void step(std::vector<Tensor*> params);

private:
    RmspropConfig cfg_;
    std::vector<std::vector<double>> mean_sq_;  // one block per parameter
};

}  // namespace mloc
