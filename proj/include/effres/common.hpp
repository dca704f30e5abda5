#pragma once

//
// ... Standard header files
//
#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace effres {

using Index = std::int64_t;

// Raised for malformed inputs (bad indices, nonpositive weights, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a numerical stage cannot proceed (nonpositive pivot,
// floating subnetwork, singular interior block).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, Index where = -1)
      : std::runtime_error(what), where_(where) {}

  // Column, node or block id the failure refers to; -1 if none.
  Index where() const noexcept { return where_; }

 private:
  Index where_;
};

// Decimal text with 17 significant digits; parses back to the same double.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                           std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view s) {
  // from_chars does not accept a leading '+'
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw InputError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline Index parse_index(std::string_view s) {
  Index v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw InputError("not an integer: '" + std::string(s) + "'");
  }
  return v;
}

inline unsigned floor_log2(std::uint64_t n) {
  unsigned r = 0;
  while (n >>= 1) ++r;
  return r;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  void reset() { start_ = std::chrono::steady_clock::now(); }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Deterministic 64-bit generator. Stream ids give independent, reproducible
// substreams (one per block, one per JL row, ...).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    // rejection sampling keeps the draw unbiased and platform independent
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = 0;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

// Splits [0, count) into at most `threads` contiguous ranges and runs
// body(lo, hi) on each. Bodies write only to their own slots, so results do
// not depend on the thread count.
inline void parallel_ranges(Index count, int threads,
                            const std::function<void(Index, Index)>& body) {
  if (threads <= 1 || count < 2) {
    body(0, count);
    return;
  }
  const Index workers = std::min<Index>(threads, count);
  const Index chunk = (count + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::size_t slot = 0;
    for (Index lo = 0; lo < count; lo += chunk, ++slot) {
      const Index hi = std::min(count, lo + chunk);
      pool.emplace_back([lo, hi, &body, &err = errors[slot]] {
        try {
          body(lo, hi);
        } catch (...) {
          err = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline void parallel_for(Index count, int threads, const std::function<void(Index)>& body) {
  parallel_ranges(count, threads, [&](Index lo, Index hi) {
    for (Index i = lo; i < hi; ++i) body(i);
  });
}

}  // namespace effres
