#include "mloc/gradcheck.hpp"

#include <cmath>

#include "mloc/siamese.hpp"

namespace mloc {

namespace {
constexpr double kPerturbation = 1e-5;

double rel_error(double analytic, double numeric) {
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-6});
    return std::fabs(analytic - numeric) / denom;
}
}  // namespace

std::string GradCheckReport::to_string() const {
    std::string out;
    for (const auto& b : blocks) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-24s max_rel_error=%.3e %s\n", b.name.c_str(),
                      b.max_rel_error,
                      !b.finite ? "NON-FINITE"
                                : (b.max_rel_error < tolerance ? "ok" : "FAIL"));
        out += line;
    }
    out += passed() ? "gradient check: PASS\n" : "gradient check: FAIL\n";
    return out;
}

GradCheckReport finite_diff_check(std::vector<ParamRef> params,
                                  const std::function<double()>& loss,
                                  const std::function<void()>& compute_grads,
                                  double tolerance) {
    GradCheckReport report;
    report.tolerance = tolerance;
    compute_grads();
    // Snapshot analytic grads before finite differencing disturbs anything.
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& ref : params) analytic.push_back(ref.value->grad);

    for (std::size_t b = 0; b < params.size(); ++b) {
        GradCheckBlock block;
        block.name = params[b].name;
        Tensor& p = *params[b].value;
        for (std::size_t j = 0; j < p.numel(); ++j) {
            const double saved = p.data[j];
            p.data[j] = saved + kPerturbation;
            const double up = loss();
            p.data[j] = saved - kPerturbation;
            const double down = loss();
            p.data[j] = saved;
            const double numeric = (up - down) / (2.0 * kPerturbation);
            const double a = analytic[b][j];
            if (!std::isfinite(numeric) || !std::isfinite(a)) {
                block.finite = false;
                continue;
            }
            block.max_rel_error = std::max(block.max_rel_error, rel_error(a, numeric));
        }
        report.blocks.push_back(std::move(block));
    }
    return report;
}

GradCheckReport finite_diff_check_network(
    Network& net, const Tensor& input,
    const std::function<double(const std::vector<double>&)>& loss_of_output,
    const std::function<std::vector<double>(const std::vector<double>&)>& loss_grad_of_output,
    double tolerance) {
    auto loss = [&]() { return loss_of_output(net.forward_value(input).data); };
    auto compute = [&]() {
        net.zero_grads();
        ForwardTrace trace = net.forward(input);
        Tensor g(trace.output.shape, loss_grad_of_output(trace.output.data));
        net.backward(trace, g);
    };
    return finite_diff_check(net.params(), loss, compute, tolerance);
}

GradCheckReport finite_diff_check_siamese(Network& net, const Tensor& input_a,
                                          const Tensor& input_b, double target,
                                          double tolerance) {
    auto loss = [&]() {
        const Tensor ea = net.forward_value(input_a);
        const Tensor eb = net.forward_value(input_b);
        return contrastive_loss(mapped_distance(ea.data, eb.data), target);
    };
    auto compute = [&]() {
        net.zero_grads();
        ForwardTrace ta = net.forward(input_a);
        ForwardTrace tb = net.forward(input_b);
        auto ga = contrastive_loss_grad_e1(ta.output.data, tb.output.data, target);
        std::vector<double> gb(ga.size());
        for (std::size_t i = 0; i < ga.size(); ++i) gb[i] = -ga[i];
        net.backward(ta, Tensor(ta.output.shape, std::move(ga)));
        net.backward(tb, Tensor(tb.output.shape, std::move(gb)));
    };
    return finite_diff_check(net.params(), loss, compute, tolerance);
}

}  // namespace mloc
