#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "ssdm/common.hpp"
#include "ssdm/rng.hpp"
#include "ssdm/sigsim.hpp"

namespace ssdm {

struct NoiseSpec {
  enum class Kind { white, pink };
  Kind kind = Kind::white;
  double snr = 1.0;
  std::uint64_t seed = 0;
};

inline NoiseSpec::Kind noise_kind_from_string(const std::string& s) {
  if (s == "white") return NoiseSpec::Kind::white;
  if (s == "pink") return NoiseSpec::Kind::pink;
  throw ValidationError("unknown noise kind: " + s);
}

inline std::string to_string(NoiseSpec::Kind k) {
  return k == NoiseSpec::Kind::white ? "white" : "pink";
}

/// Noise RMS for a target SNR: the minimum difference between adjacent
/// distinct levels divided by the noise peak-to-peak amplitude, the latter
/// taken as 6x RMS. Needs at least two distinct levels.
inline double snr_to_rms(std::vector<double> levels, double snr) {
  if (!(snr > 0.0)) throw ValidationError("snr must be > 0");
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.size() < 2)
    throw ValidationError("need >= 2 distinct levels to define SNR");
  double min_gap = levels[1] - levels[0];
  for (std::size_t i = 2; i < levels.size(); ++i)
    min_gap = std::min(min_gap, levels[i] - levels[i - 1]);
  return min_gap / (6.0 * snr);
}

/// i.i.d. zero-mean Gaussian samples with standard deviation `rms`.
inline std::vector<double> white_noise(std::size_t n, double rms,
                                       std::uint64_t seed) {
  if (n < 1) throw ValidationError("noise length must be >= 1");
  if (rms < 0.0) throw ValidationError("rms must be >= 0");
  std::vector<double> out(n);
  Rng rng(seed);
  for (auto& v : out) v = rms * rng.gaussian();
  return out;
}

namespace detail {

// FFTW planning is not thread-safe; execution is.
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

inline void fft_inplace(std::vector<std::complex<double>>& buf, int sign) {
  const int n = static_cast<int>(buf.size());
  auto* data = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_1d(n, data, data, sign, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw NumericError("fftw plan creation failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
}

}  // namespace detail

/// Gaussian noise with S(f) proportional to 1/f: a white Gaussian spectrum is
/// scaled by 1/sqrt(f) per bin, the DC bin is zeroed (so the sample mean is
/// exactly zero), and the inverse transform is rescaled to the target RMS.
inline std::vector<double> pink_noise(std::size_t n, double rms,
                                      std::uint64_t seed) {
  if (n < 4) throw ValidationError("pink noise needs n >= 4");
  if (rms < 0.0) throw ValidationError("rms must be >= 0");

  std::vector<std::complex<double>> buf(n);
  {
    Rng rng(seed);
    for (auto& v : buf) v = {rng.gaussian(), 0.0};
  }
  detail::fft_inplace(buf, FFTW_FORWARD);
  buf[0] = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    // Two-sided spectrum: bin k and bin n-k share the frequency min(k,n-k)/n.
    const double f = static_cast<double>(std::min(k, n - k)) /
                     static_cast<double>(n);
    buf[k] *= 1.0 / std::sqrt(f);
  }
  detail::fft_inplace(buf, FFTW_BACKWARD);

  std::vector<double> out(n);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = buf[i].real() / static_cast<double>(n);
    sum_sq += out[i] * out[i];
  }
  const double current = std::sqrt(sum_sq / static_cast<double>(n));
  const double scale = current > 0.0 ? rms / current : 0.0;
  for (auto& v : out) v *= scale;
  return out;
}

/// Single-sided periodogram P[k] = |X_k|^2 / n for k = 0..n/2.
inline std::vector<double> periodogram(const std::vector<double>& signal) {
  const std::size_t n = signal.size();
  if (n < 2) throw ValidationError("periodogram needs n >= 2");
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = {signal[i], 0.0};
  detail::fft_inplace(buf, FFTW_FORWARD);
  std::vector<double> p(n / 2 + 1);
  for (std::size_t k = 0; k < p.size(); ++k)
    p[k] = std::norm(buf[k]) / static_cast<double>(n);
  return p;
}

/// Adds noise at the RMS implied by (trace levels, snr). The clean trace is
/// kept by the caller for labeling; only the noisy sequence is returned.
inline std::vector<double> corrupt(const StepwiseTrace& trace,
                                   const NoiseSpec& spec) {
  const double rms = snr_to_rms(levels_for_state_count(trace.k), spec.snr);
  const std::vector<double> noise =
      spec.kind == NoiseSpec::Kind::white
          ? white_noise(trace.values.size(), rms, spec.seed)
          : pink_noise(trace.values.size(), rms, spec.seed);
  std::vector<double> noisy(trace.values.size());
  for (std::size_t i = 0; i < noisy.size(); ++i)
    noisy[i] = trace.values[i] + noise[i];
  return noisy;
}

}  // namespace ssdm
