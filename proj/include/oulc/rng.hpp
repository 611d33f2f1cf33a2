#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace oulc {

// Philox4x64-10 counter-based generator (Salmon et al., matches NumPy's
// Philox bit generator). Stateless: every (key, counter) block is an
// independent pure function, which is what makes seeded pipelines bitwise
// reproducible regardless of execution order or worker count.
namespace philox {

inline constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
inline constexpr std::uint64_t kMul1 = 0xCA5A826395121157ull;
inline constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
inline constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

inline std::uint64_t mulhi(std::uint64_t a, std::uint64_t b) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(a) * b) >> 64);
}

inline std::array<std::uint64_t, 4> block(std::uint64_t key0, std::uint64_t key1,
                                          std::uint64_t c0, std::uint64_t c1,
                                          std::uint64_t c2, std::uint64_t c3) {
    std::uint64_t x0 = c0, x1 = c1, x2 = c2, x3 = c3;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t hi0 = mulhi(kMul0, x0);
        const std::uint64_t lo0 = kMul0 * x0;
        const std::uint64_t hi1 = mulhi(kMul1, x2);
        const std::uint64_t lo1 = kMul1 * x2;
        x0 = hi1 ^ x1 ^ key0;
        x1 = lo1;
        x2 = hi0 ^ x3 ^ key1;
        x3 = lo0;
        key0 += kWeyl0;
        key1 += kWeyl1;
    }
    return {x0, x1, x2, x3};
}

}  // namespace philox

// Map a 64-bit word to (0,1), never returning an exact endpoint: the low
// bit is forced so the 53-bit value is an odd multiple of 2^-53.
inline double u64_to_unit(std::uint64_t x) {
    return static_cast<double>((x >> 11) | 1u) * 0x1p-53;
}

// Box-Muller: two exact standard normals from one counter block.
inline std::array<double, 2> normal_pair(std::uint64_t key0, std::uint64_t key1,
                                         std::uint64_t c0, std::uint64_t c1) {
    const auto w = philox::block(key0, key1, c0, c1, 0, 0);
    const double u1 = u64_to_unit(w[0]);
    const double u2 = u64_to_unit(w[1]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

// Stream tags keep derived seeds from colliding across subsystems.
enum class StreamTag : std::uint64_t {
    Simulate = 0x53494D00,
    Bootstrap = 0x424F4F54,
    Bench = 0x42454E43,
};

inline std::uint64_t derive_seed(std::uint64_t master, StreamTag tag,
                                 std::uint64_t a, std::uint64_t b = 0) {
    return philox::block(master, static_cast<std::uint64_t>(tag), a, b, 0, 0)[0];
}

// Small sequential helper for consumers that just need a normal stream.
class NormalStream {
  public:
    NormalStream(std::uint64_t key0, std::uint64_t key1)
        : key0_(key0), key1_(key1) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const auto z = normal_pair(key0_, key1_, counter_++, 0);
        spare_ = z[1];
        have_spare_ = true;
        return z[0];
    }

  private:
    std::uint64_t key0_;
    std::uint64_t key1_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace oulc
