// E(Y | X = 1) for a bivariate normal with correlation 0.5 (exact value 0.5),
// estimated by epsilon-ball averaging at increasing m, and the same estimate
// read as a box-kernel regression on a fixed batch of pairs.

#include <cstdio>
#include <utility>
#include <vector>

#include "hnequiv/hnequiv.hpp"

using namespace hnequiv;

int main() {
    const double rho = 0.5;
    std::printf("%8s %8s %12s %12s\n", "eps", "m", "estimate", "drawn");
    for (double eps : {0.1, 0.01})
        for (std::size_t m : {100, 1000, 5000}) {
            const auto r = estimate_cond_exp(bivariate_normal_pairs(rho), {{1.0}, eps, m}, 1'000'000'000,
                                             derive_seed(RngSeed{7}, {seed_tag(eps), m}));
            std::printf("%8g %8zu %12.6f %12zu\n", eps, m, r.estimate, r.drawn);
        }

    auto sampler = bivariate_normal_pairs(rho);
    Rng rng(RngSeed{8});
    std::vector<std::pair<double, double>> pairs(200'000);
    for (auto& p : pairs) p = sampler(rng);
    std::printf("\nbox-kernel regression on %zu pairs\n", pairs.size());
    for (double x : {-1.0, 0.0, 1.0, 2.0})
        std::printf("  x = %4.1f  estimate %9.5f  exact %5.2f\n", x, nadaraya_watson_at(pairs, x, 0.05), rho * x);
    return 0;
}
