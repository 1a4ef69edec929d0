#include "symreg/random.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "symreg/errors.hpp"

namespace symreg {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(mix64(base) ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

int uniform_int(Rng& rng, int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Lemire-style rejection keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return lo + static_cast<int>(r % span);
}

double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t weighted_index(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) fail(ErrorCode::InvalidArgument, "weighted_index: no positive weight");
  const double target = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  return last_positive;
}

std::string save_rng(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng load_rng(const std::string& state) {
  std::istringstream is(state);
  Rng rng;
  is >> rng;
  if (!is) fail(ErrorCode::Checkpoint, "corrupt rng state");
  return rng;
}

}  // namespace symreg
