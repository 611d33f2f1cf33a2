#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "oulc/errors.hpp"

namespace oulc {

// One day's observation in log-price space: open, day maximum, day minimum,
// close. All likelihood evaluation is per-bar with a unit day length, so mu
// and sigma2 are always per-day quantities.
struct IntervalBar {
    double o = 0.0;
    double u = 0.0;
    double l = 0.0;
    double c = 0.0;

    bool valid() const {
        return std::isfinite(o) && std::isfinite(u) && std::isfinite(l) &&
               std::isfinite(c) && l <= o && l <= c && o <= u && c <= u && u > l;
    }
};

inline void require_valid(const IntervalBar& bar) {
    if (!bar.valid()) {
        throw InvalidBar("bar violates l <= min(o,c) <= max(o,c) <= u with u > l");
    }
}

// Drift/variance pair for one regime.
struct SegmentParams {
    double mu = 0.0;
    double sigma2 = 1.0;

    bool valid() const {
        return std::isfinite(mu) && std::isfinite(sigma2) && sigma2 > 0.0;
    }
};

inline void require_valid(const SegmentParams& p) {
    if (!p.valid()) {
        throw Error("segment parameters require finite mu and sigma2 > 0");
    }
}

// Validated ordered collection of bars. The change-point scan over
// tau in {3,...,n-3} needs at least one interior candidate, hence n >= 7.
class Series {
  public:
    Series() = default;

    explicit Series(std::vector<IntervalBar> bars) : bars_(std::move(bars)) {
        if (bars_.size() < 7) {
            throw TooShort("series needs at least 7 bars, got " +
                           std::to_string(bars_.size()));
        }
        for (const auto& bar : bars_) {
            require_valid(bar);
        }
    }

    std::size_t size() const { return bars_.size(); }
    const IntervalBar& operator[](std::size_t i) const { return bars_[i]; }
    const std::vector<IntervalBar>& bars() const { return bars_; }

    auto begin() const { return bars_.begin(); }
    auto end() const { return bars_.end(); }

  private:
    std::vector<IntervalBar> bars_;
};

enum class Model { OULC, OC };

inline const char* model_name(Model m) { return m == Model::OULC ? "oulc" : "oc"; }

}  // namespace oulc
