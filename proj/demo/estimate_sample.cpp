// Draw one sample from HN(10, 4) and compare every estimator of (xi, eta).
//
//   estimate_sample [n] [seed]

#include <cstdio>
#include <cstdlib>

#include "hnequiv/hnequiv.hpp"

using namespace hnequiv;

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 30;
    const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
    const HalfNormalParams truth{10.0, 4.0};

    try {
        const Sample s = sample(truth, static_cast<std::size_t>(n), RngSeed{seed});
        const double c_n = half_min_constant(n);
        const auto u = unbiased(s, c_n);
        const auto m = mle(s);

        StepAConfig cfg;
        cfg.epsilon = 0.01;
        cfg.seed = derive_seed(RngSeed{seed}, {1});
        const auto loc = mre_location_detail(s, cfg);

        std::printf("n = %d, c_n = %.10f, true (xi, eta) = (%g, %g)\n\n", n, c_n, truth.xi, truth.eta);
        std::printf("%-34s %12s\n", "estimator", "value");
        std::printf("%-34s %12.6f\n", "xi  unbiased", *u.xi_hat);
        std::printf("%-34s %12.6f\n", "xi  mle (sample minimum)", *m.xi_hat);
        std::printf("%-34s %12.6f\n", "xi  mre approximation", loc.estimate);
        std::printf("%-34s %12.6f\n", "xi  pitman, eta known", pitman_location_known_scale(s, truth.eta));
        std::printf("%-34s %12.6f\n", "eta unbiased", u.eta_hat);
        std::printf("%-34s %12.6f\n", "eta mle", m.eta_hat);
        std::printf("%-34s %12.6f\n", "eta mre", mre_scale(s).eta_hat);
        std::printf("%-34s %12.6f\n", "eta mre, xi known", mre_scale_known_location(s, truth.xi));
        std::printf("%-34s %12.6f\n", "eta umvu, xi known", umvu_scale_known_location(s, truth.xi));
        std::printf("\nStep A: %zu vectors, eps %.4g, C = %.6f\n", loc.vectors, loc.epsilon_used, loc.ratio);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
