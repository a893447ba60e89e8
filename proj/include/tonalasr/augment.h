// tonalasr/augment.h
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
// Label-preserving waveform augmentation: speed perturbation, noise
// injection at a target SNR, and the six-fold driver that combines them.
//
#ifndef TONALASR_AUGMENT_H_
#define TONALASR_AUGMENT_H_

#include <filesystem>
#include <functional>
#include <thread>

#include "tonalasr/audio.h"
#include "tonalasr/corpus.h"

namespace tonalasr {

namespace internal {

// Output sample j is the band-limited interpolation of `x` at input time
// j * step. The Hann-windowed sinc cuts off at the lower of the two Nyquist
// rates.
inline std::vector<double> SincResample(std::span<const double> x, double step,
                                        std::size_t out_len, int num_zeros = 16) {
  const double cutoff = 0.5 * std::min(1.0, 1.0 / step) * 0.98;  // cycles/input sample
  const double half_width = num_zeros / (2.0 * cutoff);
  const auto n = static_cast<std::int64_t>(x.size());
  std::vector<double> y(out_len, 0.0);
  for (std::size_t j = 0; j < out_len; ++j) {
    const double center = static_cast<double>(j) * step;
    const auto lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(center - half_width)));
    const auto hi = std::min<std::int64_t>(n - 1, static_cast<std::int64_t>(std::floor(center + half_width)));
    double acc = 0.0;
    for (std::int64_t i = lo; i <= hi; ++i) {
      const double d = center - static_cast<double>(i);
      const double window = 0.5 + 0.5 * std::cos(M_PI * d / half_width);
      const double arg = 2.0 * cutoff * d;
      const double sinc = arg == 0.0 ? 1.0 : std::sin(M_PI * arg) / (M_PI * arg);
      acc += x[static_cast<std::size_t>(i)] * 2.0 * cutoff * sinc * window;
    }
    y[j] = acc;
  }
  return y;
}

}  // namespace internal

// Plays `w` back `factor` times faster; the sample rate is unchanged and the
// output has round(N / factor) samples.
inline Waveform SpeedPerturb(const Waveform &w, double factor) {
  if (!(factor >= 0.5 && factor <= 2.0))
    Fail<ConfigError>("speed factor ", factor, " outside [0.5, 2.0]");
  if (w.samples.empty()) Fail("speed perturbation of an empty waveform");
  if (factor == 1.0) return w;
  const auto out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(w.samples.size()) / factor));
  return {internal::SincResample(w.samples, factor, out_len), w.sample_rate};
}

inline Waveform Resample(const Waveform &w, int target_rate) {
  if (target_rate <= 0) Fail<ConfigError>("target sample rate must be positive");
  if (w.sample_rate == target_rate) return w;
  const double step = static_cast<double>(w.sample_rate) / target_rate;
  const auto out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(w.samples.size()) / step));
  return {internal::SincResample(w.samples, step, out_len), target_rate};
}

struct MixResult {
  Waveform mixture;
  double noise_gain = 1.0;     // g applied to the aligned noise segment
  double clip_scale = 1.0;     // post-mix peak normalization (1 = none)
  std::size_t noise_offset = 0;
};

// `noise` looped from `offset` to the length of `speech`.
inline std::vector<double> AlignNoise(const Waveform &noise, std::size_t length,
                                      std::size_t offset) {
  std::vector<double> out(length);
  const std::size_t n = noise.samples.size();
  for (std::size_t i = 0; i < length; ++i) out[i] = noise.samples[(offset + i) % n];
  return out;
}

inline MixResult MixAtSnr(const Waveform &speech, const Waveform &noise, double snr_db,
                          std::uint64_t seed) {
  if (speech.sample_rate != noise.sample_rate)
    Fail("noise mixing: sample rates differ (", speech.sample_rate, " vs ",
         noise.sample_rate, ")");
  if (speech.samples.empty() || noise.samples.empty())
    Fail("noise mixing: empty speech or noise");
  const double speech_rms = Rms(speech.samples);
  if (speech_rms == 0.0) Fail("noise mixing: speech has zero RMS");
  Rng rng(seed);
  MixResult r;
  r.noise_offset = static_cast<std::size_t>(
      rng.UniformInt(0, static_cast<std::int64_t>(noise.samples.size()) - 1));
  const auto segment = AlignNoise(noise, speech.samples.size(), r.noise_offset);
  const double noise_rms = Rms(segment);
  if (noise_rms == 0.0) Fail("noise mixing: noise has zero RMS");
  r.noise_gain = speech_rms / (noise_rms * std::pow(10.0, snr_db / 20.0));
  r.mixture.sample_rate = speech.sample_rate;
  r.mixture.samples.resize(speech.samples.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < segment.size(); ++i) {
    r.mixture.samples[i] = speech.samples[i] + r.noise_gain * segment[i];
    peak = std::max(peak, std::abs(r.mixture.samples[i]));
  }
  if (peak > 1.0) {
    r.clip_scale = 1.0 / peak;
    for (double &v : r.mixture.samples) v *= r.clip_scale;
  }
  return r;
}

struct NoiseClip {
  std::string category;
  std::string name;
  Waveform audio;
};

class NoisePool {
 public:
  void Add(NoiseClip clip) {
    if (clip.audio.samples.empty()) Fail("noise clip '", clip.name, "' is empty");
    clips_.push_back(std::move(clip));
  }
  const std::vector<NoiseClip> &Clips() const { return clips_; }
  bool Empty() const { return clips_.empty(); }
  std::size_t Size() const { return clips_.size(); }

 private:
  std::vector<NoiseClip> clips_;
};

// Every *.wav under `dir`; the category is the first-level subdirectory name
// ("misc" for files directly in `dir`). Clips are resampled to `target_rate`.
inline NoisePool LoadNoisePool(const std::string &dir, int target_rate) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) Fail("noise directory '", dir, "' does not exist");
  std::vector<fs::path> files;
  for (const auto &entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".wav")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  NoisePool pool;
  for (const auto &f : files) {
    const fs::path rel = fs::relative(f, dir);
    NoiseClip clip;
    clip.category = std::distance(rel.begin(), rel.end()) > 1 ? rel.begin()->string() : "misc";
    clip.name = rel.generic_string();
    clip.audio = Resample(ReadWav(f.string()), target_rate);
    pool.Add(std::move(clip));
  }
  if (pool.Empty()) Fail("noise directory '", dir, "' contains no .wav files");
  return pool;
}

struct SixFoldConfig {
  std::vector<double> speed_factors = {0.9, 1.0, 1.1};
  double snr_min_db = -5.0;
  double snr_max_db = 15.0;
  std::uint64_t seed = 17;
  int jobs = 1;
};

struct AugmentedUtterance {
  ManifestRecord record;
  Waveform audio;
  std::string noise_clip;  // empty for clean copies
  double snr_db = 0.0;
};

// "0.9" -> "0.9", 1 -> "1.0".
inline std::string FormatSpeedFactor(double f) {
  std::string s = ShortestDouble(f);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
  return s;
}

using AudioLoader = std::function<Waveform(const ManifestRecord &)>;

// For each utterance: one speed-perturbed copy per factor, plus a noisy
// version of each of those. Draws come from a per-utterance stream derived
// from (seed, utterance id), so the result does not depend on `jobs`.
// `audio_dir` is prefixed to the emitted audio paths.
inline std::vector<AugmentedUtterance> SixFold(const Manifest &manifest,
                                               const AudioLoader &load,
                                               const NoisePool &pool,
                                               const SixFoldConfig &cfg,
                                               const std::string &audio_dir = "") {
  if (pool.Empty()) Fail("six-fold augmentation needs a non-empty noise pool");
  if (cfg.speed_factors.empty()) Fail<ConfigError>("no speed factors configured");
  if (!(cfg.snr_min_db <= cfg.snr_max_db))
    Fail<ConfigError>("SNR range [", cfg.snr_min_db, ", ", cfg.snr_max_db, "] is empty");
  const auto &records = manifest.Records();
  const std::size_t per_utt = 2 * cfg.speed_factors.size();
  std::vector<AugmentedUtterance> out(records.size() * per_utt);

  auto work = [&](std::size_t u) {
    const ManifestRecord &rec = records[u];
    const Waveform source = load(rec);
    Rng rng(StreamSeed(cfg.seed, rec.utterance_id));
    for (std::size_t f = 0; f < cfg.speed_factors.size(); ++f) {
      const double factor = cfg.speed_factors[f];
      const std::string suffix = "-sp" + FormatSpeedFactor(factor);
      AugmentedUtterance clean;
      clean.record = rec;
      clean.record.utterance_id = rec.utterance_id + suffix;
      clean.record.audio_path = audio_dir + clean.record.utterance_id + ".wav";
      clean.audio = SpeedPerturb(source, factor);

      const auto clip_index = static_cast<std::size_t>(
          rng.UniformInt(0, static_cast<std::int64_t>(pool.Size()) - 1));
      const double snr = rng.Uniform(cfg.snr_min_db, cfg.snr_max_db);
      const std::uint64_t mix_seed = rng.Next();
      const NoiseClip &clip = pool.Clips()[clip_index];
      AugmentedUtterance noisy;
      noisy.record = rec;
      noisy.record.utterance_id = clean.record.utterance_id + "-noise";
      noisy.record.audio_path = audio_dir + noisy.record.utterance_id + ".wav";
      noisy.audio = MixAtSnr(clean.audio, clip.audio, snr, mix_seed).mixture;
      noisy.noise_clip = clip.name;
      noisy.snr_db = snr;

      out[u * per_utt + 2 * f] = std::move(clean);
      out[u * per_utt + 2 * f + 1] = std::move(noisy);
    }
  };

  const std::size_t jobs = std::max(1, cfg.jobs);
  if (jobs == 1 || records.size() < 2) {
    for (std::size_t u = 0; u < records.size(); ++u) work(u);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(jobs);
    for (std::size_t j = 0; j < jobs; ++j) {
      threads.emplace_back([&, j] {
        try {
          for (std::size_t u = j; u < records.size(); u += jobs) work(u);
        } catch (...) {
          errors[j] = std::current_exception();
        }
      });
    }
    for (auto &t : threads) t.join();
    for (auto &e : errors)
      if (e) std::rethrow_exception(e);
  }
  return out;
}

inline Manifest ToManifest(const std::vector<AugmentedUtterance> &utts) {
  Manifest m;
  for (const auto &u : utts) m.Add(u.record);
  return m;
}

}  // namespace tonalasr

#endif  // TONALASR_AUGMENT_H_
