#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace symreg {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent per-record streams.
std::uint64_t mix64(std::uint64_t x);

/// Seed of stream `index` under `base`. Pure function of its arguments.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Uniform double in [0, 1) with 53 random bits. Same stream on every platform,
/// unlike std::uniform_real_distribution.
double uniform01(Rng& rng);
double uniform(Rng& rng, double lo, double hi);
/// Uniform integer in [lo, hi].
int uniform_int(Rng& rng, int lo, int hi);
/// Standard normal via Box-Muller; consumes exactly two draws, no cached state.
double standard_normal(Rng& rng);
/// Index drawn proportionally to non-negative weights (at least one positive).
std::size_t weighted_index(Rng& rng, std::span<const double> weights);

std::string save_rng(const Rng& rng);
Rng load_rng(const std::string& state);

}  // namespace symreg
