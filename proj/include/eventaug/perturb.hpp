// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Feature-space perturbations of fused message embeddings and the
// probabilistic mixer that decides, per training row, whether the model
// sees the perturbed or the original vector.
//
//   GP    g + n,           n_j ~ N(0, sigma^2)
//   PGP   g + n * g,       n_j ~ N(0, sigma^2)           (elementwise)
//   IDGP  g + n,           n_j ~ N(0, alpha_var * std(G)_j^2)
//   CGP   g + clamp(n, -c, c), n_j ~ N(0, sigma^2)      (censored, not resampled)
//   FDP   Re IDFT( mask(DFT(g)) + eta * (N(0,sigma^2) + i N(0,sigma^2)) on kept bins )
//
// Row functions are templates over the element type and always compute in
// double. They consume the rng identically whatever the parameter values,
// so a zero-noise run keeps the stream aligned with a noisy one.

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "eventaug/core.hpp"
#include "eventaug/error.hpp"
#include "eventaug/fft.hpp"
#include "eventaug/rng.hpp"

namespace eventaug {

enum class Method { GP, PGP, IDGP, CGP, FDP };
enum class FdpMode { High, Low, Band };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::GP: return "GP";
    case Method::PGP: return "PGP";
    case Method::IDGP: return "IDGP";
    case Method::CGP: return "CGP";
    case Method::FDP: return "FDP";
  }
  return "?";
}

inline std::string_view to_string(FdpMode m) {
  switch (m) {
    case FdpMode::High: return "high";
    case FdpMode::Low: return "low";
    case FdpMode::Band: return "band";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (auto m : {Method::GP, Method::PGP, Method::IDGP, Method::CGP, Method::FDP}) {
    if (s.size() == to_string(m).size() &&
        std::equal(s.begin(), s.end(), to_string(m).begin(),
                   [](char a, char b) { return std::toupper(static_cast<unsigned char>(a)) == b; })) {
      return m;
    }
  }
  return std::nullopt;
}

inline std::optional<FdpMode> parse_fdp_mode(std::string_view s) {
  for (auto m : {FdpMode::High, FdpMode::Low, FdpMode::Band}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

/// Implicit augmentation hyperparameters. Defaults are the kawarith6 profile.
struct PerturbationConfig {
  Method method = Method::GP;
  double alpha = 0.3;       // mixer threshold: P(train on the perturbed row)
  double sigma = 0.01;      // noise std for GP/PGP/CGP, and FDP's complex noise
  double clip_c = 0.005;    // CGP bound
  double alpha_var = 0.01;  // IDGP variance control
  double keep_ratio = 0.98; // FDP fraction of frequency bins kept
  double noise_level = 0.02;
  FdpMode fdp_mode = FdpMode::High;

  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(alpha) || alpha < 0.0 || alpha > 1.0) throw ValidationError("alpha must be in [0,1]");
    if (!finite(sigma) || sigma < 0.0) throw ValidationError("sigma must be >= 0");
    if (!finite(clip_c) || clip_c < 0.0) throw ValidationError("clip_c must be >= 0");
    if (!finite(alpha_var) || alpha_var < 0.0) throw ValidationError("alpha_var must be >= 0");
    if (!finite(keep_ratio) || keep_ratio <= 0.0 || keep_ratio > 1.0) {
      throw ValidationError("keep_ratio must be in (0,1]");
    }
    if (!finite(noise_level) || noise_level < 0.0) throw ValidationError("noise_level must be >= 0");
  }
};

/// Per-dataset hyperparameter profiles. "custom" is the struct defaults.
inline std::optional<PerturbationConfig> profile_config(std::string_view name) {
  PerturbationConfig c;
  if (name == "kawarith6" || name == "custom") return c;
  if (name == "twitter2012") {
    c.alpha = 0.6;
    c.sigma = 0.1;
    c.clip_c = 0.05;
    c.keep_ratio = 0.95;
    c.noise_level = 0.02;
    return c;
  }
  if (name == "twitter2018") {
    c.alpha = 0.6;
    c.sigma = 0.1;
    c.clip_c = 0.0006;
    c.keep_ratio = 0.98;
    c.noise_level = 0.02;
    return c;
  }
  return std::nullopt;
}

/// Per-dimension population standard deviation of the training embeddings.
struct DatasetStats {
  std::vector<double> std;
  std::size_t count = 0;

  std::size_t dim() const noexcept { return std.size(); }
};

inline DatasetStats dataset_std(const EmbeddingMatrix& g) {
  if (g.rows() == 0) throw ValidationError("dataset_std: empty matrix");
  const std::size_t n = g.rows(), d = g.dim();
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = g.row(i);
    for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  std::vector<double> var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = g.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double dv = r[j] - mean[j];
      var[j] += dv * dv;
    }
  }
  DatasetStats out{std::vector<double>(d), n};
  for (std::size_t j = 0; j < d; ++j) out.std[j] = std::sqrt(var[j] / static_cast<double>(n));
  return out;
}

template <std::floating_point T>
std::vector<T> gp(std::span<const T> g, double sigma, RngStream& rng) {
  std::vector<T> out(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    out[j] = static_cast<T>(static_cast<double>(g[j]) + sigma * rng.normal());
  }
  return out;
}

template <std::floating_point T>
std::vector<T> pgp(std::span<const T> g, double sigma, RngStream& rng) {
  std::vector<T> out(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g[j];
    out[j] = static_cast<T>(x + sigma * rng.normal() * x);
  }
  return out;
}

template <std::floating_point T>
std::vector<T> idgp(std::span<const T> g, const DatasetStats& stats, double alpha_var,
                    RngStream& rng) {
  if (stats.dim() != g.size()) {
    throw DimensionError("idgp: stats dimension " + std::to_string(stats.dim()) +
                         " != vector length " + std::to_string(g.size()));
  }
  const double scale = std::sqrt(alpha_var);
  std::vector<T> out(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    out[j] = static_cast<T>(static_cast<double>(g[j]) + scale * stats.std[j] * rng.normal());
  }
  return out;
}

template <std::floating_point T>
std::vector<T> cgp(std::span<const T> g, double sigma, double clip_c, RngStream& rng) {
  std::vector<T> out(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double n = std::clamp(sigma * rng.normal(), -clip_c, clip_c);
    T v = static_cast<T>(static_cast<double>(g[j]) + n);
    // Rounding can overshoot the bound by an ulp; step back toward g.
    while (std::abs(static_cast<double>(v) - static_cast<double>(g[j])) > clip_c) v = std::nextafter(v, g[j]);
    out[j] = v;
  }
  return out;
}

/// Which DFT bins FDP keeps. Bins k and D-k share |frequency| min(k, D-k)
/// and are always kept or dropped together, so the filtered spectrum stays
/// conjugate-symmetric.
///
/// The budget is floor(r*D) bins. low keeps the longest run of groups from
/// frequency 0 upward that fits; high does the same from the top frequency
/// downward; band keeps the contiguous frequency window with the most bins
/// that fits, preferring the window closest to the middle frequency D/4.
/// When a conjugate pair would overshoot the budget it is left out.
class FrequencyMask {
 public:
  FrequencyMask() = default;
  FrequencyMask(std::size_t length, double keep_ratio, FdpMode mode) : length_(length) {
    if (length < 2) throw DimensionError("fdp: vector length must be >= 2");
    if (!(keep_ratio > 0.0 && keep_ratio <= 1.0)) {
      throw ValidationError("fdp: keep_ratio must be in (0,1]");
    }
    const std::size_t groups = length / 2 + 1;
    const auto budget =
        static_cast<std::size_t>(std::floor(keep_ratio * static_cast<double>(length) + 1e-9));
    keep_.assign(groups, false);

    auto width = [length](std::size_t f) { return (f == 0 || 2 * f == length) ? 1u : 2u; };
    if (mode == FdpMode::Low || mode == FdpMode::High) {
      std::size_t used = 0;
      for (std::size_t step = 0; step < groups; ++step) {
        const std::size_t f = mode == FdpMode::Low ? step : groups - 1 - step;
        if (used + width(f) > budget) break;
        used += width(f);
        keep_[f] = true;
      }
    } else {
      // Two pointers: for each start a, the widest window [a, b) within budget.
      std::size_t best_a = 0, best_b = 0, best_count = 0;
      long best_offcenter = 0;
      std::size_t b = 0, count = 0;
      for (std::size_t a = 0; a < groups; ++a) {
        if (b < a) {
          b = a;
          count = 0;
        }
        while (b < groups && count + width(b) <= budget) count += width(b++);
        if (b > a) {
          const long offcenter = std::labs(static_cast<long>(a + b - 1) - static_cast<long>(groups - 1));
          if (count > best_count || (count == best_count && offcenter < best_offcenter)) {
            best_a = a;
            best_b = b;
            best_count = count;
            best_offcenter = offcenter;
          }
          count -= width(a);
        }
      }
      for (std::size_t f = best_a; f < best_b; ++f) keep_[f] = true;
    }
  }

  std::size_t length() const noexcept { return length_; }
  /// Kept flag per frequency group f = 0..length/2.
  bool keeps(std::size_t f) const { return keep_.at(f); }
  std::size_t kept_bins() const {
    std::size_t n = 0;
    for (std::size_t f = 0; f < keep_.size(); ++f) {
      if (keep_[f]) n += (f == 0 || 2 * f == length_) ? 1 : 2;
    }
    return n;
  }

 private:
  std::size_t length_ = 0;
  std::vector<bool> keep_;
};

namespace detail {

/// FDP up to (not including) dropping the imaginary part of the inverse.
template <std::floating_point T>
std::vector<std::complex<double>> fdp_time_domain(std::span<const T> g, const FrequencyMask& mask,
                                                  double eta, double sigma, RngStream& rng) {
  const std::size_t n = g.size();
  if (mask.length() != n) throw DimensionError("fdp: mask length does not match vector");
  std::vector<std::complex<double>> freq(g.begin(), g.end());
  fft::forward(freq);
  const double scale = sigma * eta;
  for (std::size_t f = 0; f <= n / 2; ++f) {
    const double re = scale * rng.normal();
    const double im = scale * rng.normal();
    const bool self_conjugate = (f == 0 || 2 * f == n);
    if (!mask.keeps(f)) {
      freq[f] = 0.0;
      if (!self_conjugate) freq[n - f] = 0.0;
      continue;
    }
    if (self_conjugate) {
      freq[f] = {freq[f].real() + re, 0.0};
    } else {
      freq[f] += std::complex<double>(re, im);
      freq[n - f] = std::conj(freq[f]);
    }
  }
  fft::inverse(freq);
  return freq;
}

}  // namespace detail

template <std::floating_point T>
std::vector<T> fdp(std::span<const T> g, const FrequencyMask& mask, double eta, double sigma,
                   RngStream& rng) {
  const auto time = detail::fdp_time_domain(g, mask, eta, sigma, rng);
  std::vector<T> out(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) out[j] = static_cast<T>(time[j].real());
  return out;
}

template <std::floating_point T>
std::vector<T> fdp(std::span<const T> g, double keep_ratio, double eta, FdpMode mode, double sigma,
                   RngStream& rng) {
  return fdp(g, FrequencyMask(g.size(), keep_ratio, mode), eta, sigma, rng);
}

/// Applies config.method to one row. `mask` is required for FDP and
/// `stats` for IDGP.
template <std::floating_point T>
std::vector<T> perturb_row(std::span<const T> g, const PerturbationConfig& config,
                           const DatasetStats* stats, const FrequencyMask* mask, RngStream& rng) {
  switch (config.method) {
    case Method::GP: return gp(g, config.sigma, rng);
    case Method::PGP: return pgp(g, config.sigma, rng);
    case Method::IDGP:
      if (!stats) throw ValidationError("IDGP requires dataset statistics");
      return idgp(g, *stats, config.alpha_var, rng);
    case Method::CGP: return cgp(g, config.sigma, config.clip_c, rng);
    case Method::FDP:
      if (mask) return fdp(g, *mask, config.noise_level, config.sigma, rng);
      return fdp(g, config.keep_ratio, config.noise_level, config.fdp_mode, config.sigma, rng);
  }
  throw ValidationError("unknown perturbation method");
}

struct MixOptions {
  unsigned threads = 1;
  /// When set, receives 1 for each row that was replaced by its perturbation.
  std::vector<std::uint8_t>* augmented_rows = nullptr;
};

/// Probabilistic mixer. Row i draws p ~ U[0,1) from its own stream
/// (key, i), where key is one draw from `rng`; the row is perturbed iff
/// p < alpha. Output is identical for any thread count.
inline EmbeddingMatrix mix(const EmbeddingMatrix& batch, const PerturbationConfig& config,
                           const DatasetStats* stats, RngStream& rng, MixOptions options = {}) {
  config.validate();
  if (config.method == Method::IDGP) {
    if (!stats) throw ValidationError("mix: IDGP requires dataset statistics");
    if (stats->dim() != batch.dim()) throw DimensionError("mix: stats dimension mismatch");
  }
  std::optional<FrequencyMask> mask;
  if (config.method == Method::FDP) mask.emplace(batch.dim(), config.keep_ratio, config.fdp_mode);

  const std::uint64_t key = rng.next();
  EmbeddingMatrix out = batch;
  std::vector<std::uint8_t> flags(batch.rows(), 0);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RngStream row_rng(key, i);
      if (!(row_rng.uniform() < config.alpha)) continue;
      auto perturbed = perturb_row(batch.row(i), config, stats, mask ? &*mask : nullptr, row_rng);
      std::copy(perturbed.begin(), perturbed.end(), out.row(i).begin());
      flags[i] = 1;
    }
  };

  const std::size_t n = batch.rows();
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk, e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  if (options.augmented_rows) *options.augmented_rows = std::move(flags);
  return out;
}

}  // namespace eventaug
