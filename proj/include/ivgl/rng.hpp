#pragma once

// Counter-based pseudo-random generator (Philox4x32-10) with named streams.
//
// Every random quantity in the simulators is drawn from a (seed, stream,
// counter) triple, so results are reproducible bit-for-bit regardless of how
// replicates are scheduled across threads: splitting a stream never touches
// the state of any other stream.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <cmath>

namespace ivgl {

class Philox {
 public:
  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        stream_(stream) {}

  /// Independent generator for the same seed: same key, distinct counter lane.
  Philox stream(std::uint64_t id) const {
    Philox g(0, id);
    g.key0_ = key0_;
    g.key1_ = key1_;
    return g;
  }

  std::uint32_t next_u32() {
    if (pos_ == 4) {
      fill();
      pos_ = 0;
      ++index_;
    }
    return out_[pos_++];
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform double in the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_normal_) {
      have_normal_ = false;
      return cached_normal_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 6.283185307179586476925286766559 * u2;
    cached_normal_ = r * std::sin(t);
    have_normal_ = true;
    return r * std::cos(t);
  }

  /// Unbiased draw from {0, 1, ..., n-1} by rejection.
  std::uint64_t bounded(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("bounded: n must be positive");
    std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// k distinct values from {0, ..., n-1}, in draw order.
  std::vector<int> sample_without_replacement(int n, int k) {
    if (k < 0 || k > n) {
      throw std::invalid_argument("sample_without_replacement: need 0 <= k <= n");
    }
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    std::vector<int> out(k);
    for (int i = 0; i < k; ++i) {
      std::size_t j = i + static_cast<std::size_t>(bounded(n - i));
      std::swap(pool[i], pool[j]);
      out[i] = pool[i];
    }
    return out;
  }

  /// Raw Philox4x32-10 block for the given counter words (for known-answer tests).
  static void block(std::uint32_t k0, std::uint32_t k1, const std::uint32_t ctr[4],
                    std::uint32_t out[4]) {
    std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
    for (int round = 0; round < 10; ++round) {
      std::uint64_t p0 = 0xD2511F53ULL * c0;
      std::uint64_t p1 = 0xCD9E8D57ULL * c2;
      std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      std::uint32_t n0 = hi1 ^ c1 ^ k0;
      std::uint32_t n2 = hi0 ^ c3 ^ k1;
      c0 = n0;
      c1 = lo1;
      c2 = n2;
      c3 = lo0;
      k0 += 0x9E3779B9U;
      k1 += 0xBB67AE85U;
    }
    out[0] = c0;
    out[1] = c1;
    out[2] = c2;
    out[3] = c3;
  }

 private:
  void fill() {
    std::uint32_t ctr[4] = {static_cast<std::uint32_t>(index_),
                            static_cast<std::uint32_t>(index_ >> 32),
                            static_cast<std::uint32_t>(stream_),
                            static_cast<std::uint32_t>(stream_ >> 32)};
    block(key0_, key1_, ctr, out_);
  }

  std::uint32_t key0_ = 0;
  std::uint32_t key1_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t index_ = 0;
  std::uint32_t out_[4] = {0, 0, 0, 0};
  int pos_ = 4;
  bool have_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace ivgl
