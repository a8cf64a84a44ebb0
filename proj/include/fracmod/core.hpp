#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracmod {

inline constexpr int kMaxDim = 3;

// Fixed-capacity point; coordinates at index >= dim are kept at zero so that
// dot/norm over the full array are safe regardless of the active dimension.
using Point = std::array<double, kMaxDim>;

inline Point make_point(std::span<const double> x) {
  Point p{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < x.size() && i < kMaxDim; ++i) p[i] = x[i];
  return p;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) {
  return std::sqrt(dot(a, a));
}

inline double norm_inf(std::span<const double> a) {
  double m = 0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Raised when a quadrature's certified truncation bound exceeds the plan's
// tolerance; carries the offending bound.
class TailBoundError : public std::runtime_error {
 public:
  TailBoundError(const std::string& what, double bound)
      : std::runtime_error(what), bound_(bound) {}
  double bound() const { return bound_; }

 private:
  double bound_;
};

// Raised when a caller-supplied evaluator breaks a documented precondition
// (e.g. a non-monotone modular handed to the Luxemburg bisection).
class ContractViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// splitmix64: cheap, splittable seeding; also used directly as the sample
// generator so runs are reproducible across platforms (no distribution
// implementation differences).
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in (0,1); never returns 0 or 1 exactly
  double uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }
};

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  SplitMix64 g(a ^ (0x9e3779b97f4a7c15ull + (b << 1)));
  g.next();
  return g.next();
}

// Runs fn(begin,end) over [0,n) in contiguous chunks, possibly on several
// threads. Results must be written by index; the caller is responsible for a
// deterministic reduction afterwards, so thread count never changes output.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                  int threads = 0);

}  // namespace fracmod
