#include "oulc/simulate.hpp"

#include <cmath>

#include "oulc/rng.hpp"

namespace oulc {

Series simulate_series(const SimSpec& spec) {
    if (!spec.valid()) {
        throw Error("invalid simulation spec");
    }
    const std::uint64_t key1 = static_cast<std::uint64_t>(StreamTag::Simulate);

    std::vector<IntervalBar> bars;
    bars.reserve(spec.n);
    double open = spec.o1;
    for (std::size_t day = 1; day <= spec.n; ++day) {
        const SegmentParams& p = day <= spec.tau ? spec.params0 : spec.params1;
        const double step_mu = p.mu / static_cast<double>(spec.substeps);
        const double step_sd = std::sqrt(p.sigma2 / static_cast<double>(spec.substeps));

        double y = open;
        double hi = open;
        double lo = open;
        for (std::size_t j = 0; j < spec.substeps; j += 2) {
            // two normals per counter block; block index addresses the pair
            const auto z = normal_pair(spec.seed, key1, day, j >> 1);
            y += step_mu + step_sd * z[0];
            hi = std::max(hi, y);
            lo = std::min(lo, y);
            if (j + 1 < spec.substeps) {
                y += step_mu + step_sd * z[1];
                hi = std::max(hi, y);
                lo = std::min(lo, y);
            }
        }
        bars.push_back(IntervalBar{open, hi, lo, y});
        open = y;
    }
    return Series(std::move(bars));
}

}  // namespace oulc
