#pragma once

#include <cstdint>

#include "oulc/types.hpp"

namespace oulc {

// One synthetic series: n days of Euler paths on an intra-day grid of
// `substeps` points, parameters switching from params0 to params1 after day
// tau, each day opening at the previous close.
struct SimSpec {
    std::size_t n = 250;
    std::size_t tau = 125;
    SegmentParams params0;
    SegmentParams params1;
    double o1 = 0.0;
    std::size_t substeps = 1000;
    std::uint64_t seed = 0;

    bool valid() const {
        return n >= 7 && tau >= 3 && tau + 3 <= n && substeps >= 2 &&
               params0.valid() && params1.valid() && std::isfinite(o1);
    }
};

// Deterministic in (seed, day, step): the Gaussian increment for a given day
// and step is a pure function of those indices, so any execution order
// produces the identical series.
Series simulate_series(const SimSpec& spec);

}  // namespace oulc
