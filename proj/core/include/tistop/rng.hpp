#pragma once

#include <array>
#include <cstdint>

namespace tistop {

/// Philox-4x64-10 counter-based bijection (Salmon et al., SC'11).
///
/// The block function is stateless: every (key, counter) pair maps to an
/// independent 256-bit output, so a stream can be addressed by index without
/// stepping through earlier draws.
struct Philox4x64 {
    using Counter = std::array<std::uint64_t, 4>;
    using Key = std::array<std::uint64_t, 2>;

    static Counter block(Counter counter, Key key) noexcept;
};

namespace detail {

/// Marsaglia-Tsang ziggurat tables, 128 layers, 24-bit magnitudes.
struct ZigguratTables {
    std::array<std::uint32_t, 128> k{};
    std::array<double, 128> w{};
    std::array<double, 128> f{};

    ZigguratTables();
};

extern const ZigguratTables kZiggurat;

}  // namespace detail

/// Random stream for one Monte Carlo path.
///
/// The key is derived from the master seed and counter word 2 holds
/// the stream index, so (master_seed, stream_index) fully determines every draw
/// regardless of which thread evaluates the path. With `mirrored` set, normals
/// are negated and uniforms reflected (u -> 1-u), giving the antithetic partner
/// of the unmirrored stream with the same index.
class PathStream {
public:
    PathStream(std::uint64_t master_seed, std::uint64_t stream_index, bool mirrored = false) noexcept;

    /// Stream for path `path_index`; when `antithetic` is on, paths 2k and 2k+1
    /// share stream k, the odd one mirrored.
    static PathStream for_path(std::uint64_t master_seed, std::uint64_t path_index, bool antithetic) noexcept;

    std::uint32_t next_u32() noexcept {
        if (buffered_ == 0) refill();
        return buffer_[static_cast<std::size_t>(--buffered_)];
    }
    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Standard normal via a 128-layer ziggurat, one 32-bit word per attempt.
    double normal() noexcept {
        // Fast path of the ziggurat: bits 0-6 layer, bit 7 sign, bits 8-31 magnitude.
        const std::uint32_t word = next_u32();
        const std::uint32_t iz = word & 127u;
        const std::uint32_t mag = word >> 8;
        const auto& t = detail::kZiggurat;
        if (mag < t.k[iz]) {
            const double x = static_cast<double>(mag) * t.w[iz];
            return ((word & 128u) != 0) != mirrored_ ? -x : x;
        }
        const double z = normal_slow(word);
        return mirrored_ ? -z : z;
    }
    /// Unit-mean exponential.
    double exponential() noexcept;

    [[nodiscard]] bool mirrored() const noexcept { return mirrored_; }

private:
    double raw_uniform() noexcept;
    double normal_slow(std::uint32_t word) noexcept;
    void refill() noexcept;

    Philox4x64::Key key_{};
    Philox4x64::Counter counter_{};
    std::array<std::uint32_t, 8> buffer_{};
    int buffered_ = 0;
    bool mirrored_ = false;
};

}  // namespace tistop
