// Runs the fixed-learning-rate iteration on the calibrated MA(1) moment with
// each conditioning matrix and prints the head of every trace.

#include <cstdio>

#include "gmmiter/models.hpp"
#include "gmmiter/optimizers.hpp"

using namespace gmmiter;

int main() {
    const MomentModel model = ma1_calibrated_model();
    const WeightingSpec w = WeightingSpec::identity(1);
    const Vector theta0 = Vector::Constant(1, -0.600);

    for (Method method : {Method::gd, Method::gn, Method::nr, Method::lm, Method::bfgs}) {
        OptimizerConfig cfg;
        cfg.method = method;
        cfg.gamma = 0.1;
        cfg.lm_lambda = method == Method::lm ? 0.01 : 0.0;
        cfg.max_iter = 99;
        const IterationTrace trace = run(model, w, theta0, cfg);

        std::printf("%-5s", method_name(method));
        const std::size_t head = trace.records.size() < 9 ? trace.records.size() : 9;
        for (std::size_t k = 0; k < head; ++k) {
            std::printf(" % .3f", trace.records[k].theta(0));
        }
        std::printf("  ... % .3f (%s, %d iterations)\n", trace.final_theta()(0),
                    termination_name(trace.termination), trace.final_record().k);
    }
    return 0;
}
