#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace mrsqm {

// Malformed input file (bad structure, ragged rows, missing directives).
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Unparseable token or document (non-numeric value, truncated model file).
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Operation called on an object in the wrong state (e.g. unfitted config).
class StateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Model file written by an incompatible format version.
class VersionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
} // namespace detail

// Deterministic random stream. Raw engine output is the standard-specified
// mt19937_64 sequence; all derived draws (bounded ints, reals, normals) are
// implemented here rather than with std distributions, which are not
// reproducible across standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent substream for (master seed, stream tag, ordinal). Used so
  // per-representation randomness does not depend on processing order.
  static Rng substream(std::uint64_t master_seed, std::uint64_t stream_tag,
                       std::uint64_t ordinal) {
    std::uint64_t s = master_seed;
    detail::splitmix64(s);
    s ^= 0x6a09e667f3bcc909ULL * (stream_tag + 1);
    detail::splitmix64(s);
    s ^= 0xbb67ae8584caa73bULL * (ordinal + 1);
    return Rng(detail::splitmix64(s));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n) {
    // multiply-shift mapping; bias is O(n / 2^64)
    unsigned __int128 m =
        static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
    return static_cast<std::size_t>(m >> 64);
  }

  // Uniform on the inclusive range [lo, hi].
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform_index(static_cast<std::size_t>(hi - lo) + 1));
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform_real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal draw (Box-Muller, cosine branch).
  double normal() {
    double u1 = uniform_real();
    double u2 = uniform_real();
    while (u1 <= 0.0) u1 = uniform_real();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

private:
  std::mt19937_64 engine_;
};

} // namespace mrsqm
