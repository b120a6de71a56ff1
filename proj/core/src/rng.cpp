#include "tistop/rng.hpp"

#include <cmath>
#include <cstdlib>

namespace tistop {

namespace {

__extension__ using u128 = unsigned __int128;

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ull;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ull;
constexpr std::uint64_t kPhiloxW0 = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kPhiloxW1 = 0xBB67AE8584CAA73Bull;

// splitmix64 finalizer, used only to spread the master seed over the key.
inline std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr double kZigR = 3.442619855899;

}  // namespace

namespace detail {

ZigguratTables::ZigguratTables() {
    constexpr double m1 = 16777216.0;
    double dn = kZigR;
    double tn = dn;
    constexpr double vn = 9.91256303526217e-3;
    const double q = vn / std::exp(-0.5 * dn * dn);
    k[0] = static_cast<std::uint32_t>((dn / q) * m1);
    k[1] = 0;
    w[0] = q / m1;
    w[127] = dn / m1;
    f[0] = 1.0;
    f[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
        dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
        k[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
        tn = dn;
        f[i] = std::exp(-0.5 * dn * dn);
        w[i] = dn / m1;
    }
}

const ZigguratTables kZiggurat;

}  // namespace detail

Philox4x64::Counter Philox4x64::block(Counter ctr, Key key) noexcept {
    std::uint64_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
    std::uint64_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
        const u128 p0 = static_cast<u128>(kPhiloxM0) * c0;
        const u128 p1 = static_cast<u128>(kPhiloxM1) * c2;
        c0 = static_cast<std::uint64_t>(p1 >> 64) ^ c1 ^ k0;
        c2 = static_cast<std::uint64_t>(p0 >> 64) ^ c3 ^ k1;
        c1 = static_cast<std::uint64_t>(p1);
        c3 = static_cast<std::uint64_t>(p0);
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return {c0, c1, c2, c3};
}

PathStream::PathStream(std::uint64_t master_seed, std::uint64_t stream_index, bool mirrored) noexcept
    : mirrored_(mirrored) {
    key_ = {mix64(master_seed), mix64(master_seed ^ 0x5851F42D4C957F2Dull)};
    counter_ = {0u, 0u, stream_index, 0u};
}

PathStream PathStream::for_path(std::uint64_t master_seed, std::uint64_t path_index, bool antithetic) noexcept {
    if (!antithetic) return PathStream(master_seed, path_index, false);
    return PathStream(master_seed, path_index / 2, (path_index & 1u) != 0);
}

void PathStream::refill() noexcept {
    const auto out = Philox4x64::block(counter_, key_);
    if (++counter_[0] == 0) ++counter_[1];
    for (std::size_t i = 0; i < 4; ++i) {
        buffer_[2 * i] = static_cast<std::uint32_t>(out[i]);
        buffer_[2 * i + 1] = static_cast<std::uint32_t>(out[i] >> 32);
    }
    buffered_ = 8;
}

double PathStream::raw_uniform() noexcept {
    const std::uint32_t a = next_u32() >> 5;
    const std::uint32_t b = next_u32() >> 6;
    return (a * 67108864.0 + b + 0.5) * (1.0 / 9007199254740992.0);
}

double PathStream::uniform() noexcept {
    const double u = raw_uniform();
    return mirrored_ ? 1.0 - u : u;
}

double PathStream::exponential() noexcept { return -std::log(uniform()); }

double PathStream::normal_slow(std::uint32_t word) noexcept {
    // Unmirrored draw; the caller applies the mirror.
    const auto& t = detail::kZiggurat;
    for (;;) {
        const std::uint32_t iz = word & 127u;
        const bool negative = (word & 128u) != 0;
        const std::uint32_t mag = word >> 8;
        const double x = static_cast<double>(mag) * t.w[iz];
        if (mag < t.k[iz]) return negative ? -x : x;
        if (iz == 0) {
            double tail, y;
            do {
                tail = -std::log(raw_uniform()) / kZigR;
                y = -std::log(raw_uniform());
            } while (y + y < tail * tail);
            return negative ? -kZigR - tail : kZigR + tail;
        }
        if (t.f[iz] + raw_uniform() * (t.f[iz - 1] - t.f[iz]) < std::exp(-0.5 * x * x)) return negative ? -x : x;
        word = next_u32();
    }
}

}  // namespace tistop
