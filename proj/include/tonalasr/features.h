// tonalasr/features.h
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Copyright 2026 The tonalasr Authors.
// \file
// Log-mel filterbank features, time/frequency masking, and the binary
// feature dump format.
//
#ifndef TONALASR_FEATURES_H_
#define TONALASR_FEATURES_H_

#include <fftw3.h>

#include <complex>
#include <fstream>
#include <memory>
#include <mutex>

#include "tonalasr/audio.h"

namespace tonalasr {

// T frames by F bins.
struct FeatureMatrix {
  Matrix frames;
  double frame_shift = 0.010;
  double frame_length = 0.025;

  std::size_t NumFrames() const { return frames.Rows(); }
  std::size_t NumBins() const { return frames.Cols(); }
  bool operator==(const FeatureMatrix &) const = default;
};

struct MelOptions {
  int n_fft = 512;
  int n_mels = 40;
  double frame_length = 0.025;
  double frame_shift = 0.010;
  double log_floor = 1e-10;
};

inline double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular HTK-mel filters over the n_fft/2+1 magnitude bins.
inline Matrix MelFilterbank(int n_mels, int n_fft, int sample_rate) {
  const int n_bins = n_fft / 2 + 1;
  Matrix fb(static_cast<std::size_t>(n_mels), static_cast<std::size_t>(n_bins));
  const double mel_lo = HzToMel(0.0), mel_hi = HzToMel(sample_rate / 2.0);
  std::vector<double> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i)
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));
  for (int m = 0; m < n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double hz = static_cast<double>(k) * sample_rate / n_fft;
      double w = 0.0;
      if (hz > left && hz <= center)
        w = (hz - left) / (center - left);
      else if (hz > center && hz < right)
        w = (right - hz) / (right - center);
      fb(m, k) = w;
    }
  }
  return fb;
}

namespace internal {

// FFTW planning is not thread-safe; execution on fresh arrays is.
inline std::mutex &FftwPlannerMutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(FftwPlannerMutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(FftwPlannerMutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft &) = delete;
  RealFft &operator=(const RealFft &) = delete;

  double *Input() { return in_; }

  // Magnitudes of bins 0..n/2 of the current input.
  void Magnitudes(std::vector<double> *mag) {
    fftw_execute(plan_);
    mag->resize(n_ / 2 + 1);
    for (int k = 0; k <= n_ / 2; ++k) (*mag)[k] = std::hypot(out_[k][0], out_[k][1]);
  }

 private:
  int n_;
  double *in_;
  fftw_complex *out_;
  fftw_plan plan_;
};

}  // namespace internal

inline std::size_t NumFrames(std::size_t num_samples, std::size_t frame_samples,
                             std::size_t shift_samples) {
  if (num_samples < frame_samples) return 0;
  return 1 + (num_samples - frame_samples) / shift_samples;
}

inline FeatureMatrix LogMel(const Waveform &w, const MelOptions &opts = {}) {
  const auto frame_samples =
      static_cast<std::size_t>(std::lround(opts.frame_length * w.sample_rate));
  const auto shift_samples =
      static_cast<std::size_t>(std::lround(opts.frame_shift * w.sample_rate));
  if (frame_samples == 0 || shift_samples == 0)
    Fail<ConfigError>("frame length/shift shorter than one sample");
  if (opts.n_fft < static_cast<int>(frame_samples))
    Fail<ConfigError>("n_fft ", opts.n_fft, " shorter than the ", frame_samples,
                      "-sample frame");
  if (opts.n_mels < 1) Fail<ConfigError>("n_mels must be positive");
  if (w.samples.size() < frame_samples)
    Fail("utterance of ", w.samples.size(), " samples is shorter than one frame (",
         frame_samples, ")");

  const std::size_t T = NumFrames(w.samples.size(), frame_samples, shift_samples);
  const Matrix fb = MelFilterbank(opts.n_mels, opts.n_fft, w.sample_rate);
  std::vector<double> window(frame_samples);
  for (std::size_t i = 0; i < frame_samples; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / frame_samples);

  FeatureMatrix out;
  out.frame_length = opts.frame_length;
  out.frame_shift = opts.frame_shift;
  out.frames = Matrix(T, static_cast<std::size_t>(opts.n_mels));
  internal::RealFft fft(opts.n_fft);
  std::vector<double> mag;
  for (std::size_t t = 0; t < T; ++t) {
    double *in = fft.Input();
    std::fill(in, in + opts.n_fft, 0.0);
    for (std::size_t i = 0; i < frame_samples; ++i)
      in[i] = w.samples[t * shift_samples + i] * window[i];
    fft.Magnitudes(&mag);
    for (int m = 0; m < opts.n_mels; ++m) {
      double e = 0.0;
      const auto row = fb.Row(m);
      for (std::size_t k = 0; k < mag.size(); ++k) e += row[k] * mag[k];
      out.frames(t, m) = std::log(std::max(e, opts.log_floor));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Time and frequency masking (no time warping).

enum class MaskFill { kZero, kUtteranceMean };

struct SpecAugmentPolicy {
  int num_time_masks = 2;
  int max_time_width = 20;  // frames
  int num_freq_masks = 2;
  int max_freq_width = 10;  // bins
  MaskFill fill = MaskFill::kZero;
};

struct MaskSpan {
  std::size_t start = 0;
  std::size_t width = 0;
};

struct MaskPlan {
  std::vector<MaskSpan> time;
  std::vector<MaskSpan> freq;
};

// Width ~ U{0..max}, start ~ U{0..size-width}; max clamped to the axis size.
inline MaskPlan PlanSpecAugment(std::size_t num_frames, std::size_t num_bins,
                                const SpecAugmentPolicy &policy, Rng &rng) {
  if (policy.num_time_masks < 0 || policy.num_freq_masks < 0 ||
      policy.max_time_width < 0 || policy.max_freq_width < 0)
    Fail<ConfigError>("SpecAugment counts and widths must be non-negative");
  MaskPlan plan;
  auto draw = [&](std::size_t size, int max_width) {
    const auto w_max = std::min<std::int64_t>(max_width, static_cast<std::int64_t>(size));
    const auto width = rng.UniformInt(0, w_max);
    const auto start = rng.UniformInt(0, static_cast<std::int64_t>(size) - width);
    return MaskSpan{static_cast<std::size_t>(start), static_cast<std::size_t>(width)};
  };
  for (int i = 0; i < policy.num_time_masks; ++i)
    plan.time.push_back(draw(num_frames, policy.max_time_width));
  for (int i = 0; i < policy.num_freq_masks; ++i)
    plan.freq.push_back(draw(num_bins, policy.max_freq_width));
  return plan;
}

inline FeatureMatrix ApplyMasks(const FeatureMatrix &f, const MaskPlan &plan,
                                MaskFill fill) {
  double value = 0.0;
  if (fill == MaskFill::kUtteranceMean && !f.frames.Empty()) {
    KahanSum s;
    for (double v : f.frames.Data()) s.Add(v);
    value = s.Value() / static_cast<double>(f.frames.Data().size());
  }
  FeatureMatrix out = f;
  for (const auto &m : plan.time)
    for (std::size_t t = m.start; t < m.start + m.width; ++t)
      for (std::size_t b = 0; b < out.NumBins(); ++b) out.frames(t, b) = value;
  for (const auto &m : plan.freq)
    for (std::size_t t = 0; t < out.NumFrames(); ++t)
      for (std::size_t b = m.start; b < m.start + m.width; ++b) out.frames(t, b) = value;
  return out;
}

inline FeatureMatrix SpecAugment(const FeatureMatrix &f, const SpecAugmentPolicy &policy,
                                 std::uint64_t seed) {
  Rng rng(seed);
  return ApplyMasks(f, PlanSpecAugment(f.NumFrames(), f.NumBins(), policy, rng), policy.fill);
}

// ---------------------------------------------------------------------------
// Feature dump: "TFMX", T, F, reserved (all LE uint32) then T*F LE float32.

inline constexpr char kFeatureMagic[4] = {'T', 'F', 'M', 'X'};

inline void WriteFeatures(const FeatureMatrix &f, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail("cannot write features '", path, "'");
  os.write(kFeatureMagic, 4);
  internal::PutU32(os, static_cast<std::uint32_t>(f.NumFrames()));
  internal::PutU32(os, static_cast<std::uint32_t>(f.NumBins()));
  internal::PutU32(os, 0);
  for (double v : f.frames.Data()) {
    const float x = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &x, 4);
    internal::PutU32(os, bits);
  }
  if (!os) Fail("error writing features '", path, "'");
}

inline FeatureMatrix ReadFeatures(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail("cannot open features '", path, "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kFeatureMagic, 4) != 0)
    Fail("'", path, "' is not a feature dump");
  const std::uint32_t T = internal::GetU32(bytes.data() + 4);
  const std::uint32_t F = internal::GetU32(bytes.data() + 8);
  if (F == 0) Fail("'", path, "': zero feature dimension");
  if (bytes.size() != 16 + 4ull * T * F)
    Fail("'", path, "': size does not match header ", T, "x", F);
  FeatureMatrix f;
  f.frames = Matrix(T, F);
  for (std::size_t i = 0; i < f.frames.Data().size(); ++i) {
    const std::uint32_t bits = internal::GetU32(bytes.data() + 16 + 4 * i);
    float x;
    std::memcpy(&x, &bits, 4);
    f.frames.Data()[i] = x;
  }
  return f;
}

}  // namespace tonalasr

#endif  // TONALASR_FEATURES_H_
