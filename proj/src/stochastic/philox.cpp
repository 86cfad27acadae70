#include <cmath>
#include <numbers>
#include <string>

#include "halfline/errors.hpp"
#include "halfline/stochastic.hpp"

namespace halfline::stochastic {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

// Uniform in (0, 1] from 53 random bits.
inline double open_uniform(std::uint32_t a, std::uint32_t b) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(a >> 5) << 26) | (b >> 6);
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

inline double unit_uniform(std::uint32_t a, std::uint32_t b) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(a >> 5) << 26) | (b >> 6);
  return static_cast<double>(bits) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t path, std::uint32_t step,
                                  std::uint32_t lane) {
  const auto r = philox4x32({lane, step, static_cast<std::uint32_t>(path),
                             static_cast<std::uint32_t>(path >> 32)},
                            {static_cast<std::uint32_t>(seed),
                             static_cast<std::uint32_t>(seed >> 32)});
  const double radius = std::sqrt(-2.0 * std::log(open_uniform(r[0], r[1])));
  const double angle = 2.0 * std::numbers::pi * unit_uniform(r[2], r[3]);
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

void NoiseConfig::validate() const {
  if (n_paths < 1) throw ConfigError("noise.n_paths must be positive");
  if (n_steps < 1) throw ConfigError("noise.n_steps must be positive");
  if (n_steps > 0xFFFFFFFFu) throw ConfigError("noise.n_steps is too large");
  if (!std::isfinite(tau) || tau < 0.0) throw ConfigError("tau must be finite and nonnegative");
  if (!std::isfinite(horizon) || !(horizon > tau)) {
    throw ConfigError("T must be finite and larger than tau");
  }
}

std::vector<double> brownian_increments(const NoiseConfig& cfg, std::size_t path_index) {
  cfg.validate();
  if (path_index >= cfg.n_paths) {
    throw DomainError("path index " + std::to_string(path_index) + " out of range");
  }
  std::vector<double> out(cfg.n_steps, 0.0);
  if (!cfg.enabled) return out;
  const double scale = std::sqrt(cfg.dt());
  for (std::size_t k = 0; k < cfg.n_steps; ++k) {
    out[k] = scale * normal_pair(cfg.seed, path_index, static_cast<std::uint32_t>(k), 0)[0];
  }
  return out;
}

}  // namespace halfline::stochastic
