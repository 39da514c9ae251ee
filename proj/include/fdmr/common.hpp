#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace fdmr {

/// Selects between the serial reference path and the OpenMP kernel.
enum class ExecPolicy { Serial, Parallel };

enum class Direction { Downlink, Uplink };

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// SplitMix64 finalizer. All seed derivation in the library goes through this.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed for stream `index` of `parent`. Children of one parent are
/// independent of how many siblings are requested.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  return splitmix64(splitmix64(parent) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(parent, a), b);
}

}  // namespace fdmr
