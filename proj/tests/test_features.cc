// tests/test_features.cc
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
// Tests for features.
//
#include <gtest/gtest.h>

#include <filesystem>

#include "oracles.h"

namespace tonalasr {
namespace {

Waveform Noise(std::uint64_t seed, std::size_t n, double scale) {
  Rng rng(seed);
  Waveform w;
  w.samples.resize(n);
  for (auto &v : w.samples) v = scale * rng.Gaussian();
  return w;
}

TEST(LogMel, FrameCount) {
  EXPECT_EQ(LogMel(Noise(1, 16000, 0.1)).NumFrames(), 98u);
  EXPECT_EQ(LogMel(Noise(1, 400, 0.1)).NumFrames(), 1u);
  EXPECT_EQ(LogMel(Noise(1, 559, 0.1)).NumFrames(), 1u);
  EXPECT_EQ(LogMel(Noise(1, 560, 0.1)).NumFrames(), 2u);
  EXPECT_THROW(LogMel(Noise(1, 399, 0.1)), DataError);
}

TEST(LogMel, SilenceHitsFloor) {
  const auto f = LogMel(Waveform{std::vector<double>(4000, 0.0), 16000});
  for (double v : f.frames.Data()) EXPECT_EQ(v, std::log(1e-10));
}

// Recompute one frame with a direct DFT and a triangular HTK filterbank.
TEST(LogMel, MatchesDirectDft) {
  const Waveform w = Noise(3, 1200, 0.2);
  MelOptions opts;
  opts.n_mels = 23;
  const auto f = LogMel(w, opts);
  const std::size_t frame = 400, shift = 160, n_fft = 512;
  const Matrix fb = MelFilterbank(opts.n_mels, static_cast<int>(n_fft), 16000);
  for (std::size_t t = 0; t < f.NumFrames(); ++t) {
    std::vector<double> x(frame);
    for (std::size_t i = 0; i < frame; ++i)
      x[i] = w.samples[t * shift + i] * (0.5 - 0.5 * std::cos(2.0 * M_PI * i / frame));
    std::vector<double> mag(n_fft / 2 + 1);
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = oracle::DftMagnitude(x, n_fft, k);
    for (int m = 0; m < opts.n_mels; ++m) {
      double e = 0;
      for (std::size_t k = 0; k < mag.size(); ++k) e += fb(m, k) * mag[k];
      EXPECT_NEAR(f.frames(t, m), std::log(std::max(e, 1e-10)), 1e-9);
    }
  }
}

TEST(MelFilterbank, TrianglesPeakAtCentres) {
  const Matrix fb = MelFilterbank(40, 512, 16000);
  for (std::size_t m = 0; m < fb.Rows(); ++m) {
    double peak = 0;
    for (double v : fb.Row(m)) {
      EXPECT_GE(v, 0.0);
      peak = std::max(peak, v);
    }
    EXPECT_GT(peak, 0.0);
    EXPECT_LE(peak, 1.0);
  }
  EXPECT_NEAR(MelToHz(HzToMel(1234.5)), 1234.5, 1e-9);
  EXPECT_NEAR(HzToMel(700.0), 2595.0 * std::log10(2.0), 1e-12);
}

TEST(LogMel, MonotoneInGain) {
  const Waveform w = Noise(4, 8000, 0.05);
  Waveform louder = w;
  for (auto &v : louder.samples) v *= 3.0;
  const auto a = LogMel(w), b = LogMel(louder);
  double sa = 0, sb = 0;
  for (double v : a.frames.Data()) sa += std::exp(v);
  for (double v : b.frames.Data()) sb += std::exp(v);
  EXPECT_GT(sb, sa);
  for (std::size_t i = 0; i < a.frames.Data().size(); ++i)
    EXPECT_NEAR(b.frames.Data()[i] - a.frames.Data()[i], std::log(3.0), 1e-9);
}

FeatureMatrix RandomFeatures(std::uint64_t seed, std::size_t T, std::size_t F) {
  Rng rng(seed);
  FeatureMatrix f;
  f.frames = Matrix(T, F);
  for (auto &v : f.frames.Data()) v = rng.Uniform(1.0, 2.0);
  return f;
}

TEST(SpecAugment, ZeroPolicyIsIdentity) {
  const auto f = RandomFeatures(1, 50, 20);
  SpecAugmentPolicy p;
  p.num_time_masks = p.num_freq_masks = 0;
  EXPECT_EQ(SpecAugment(f, p, 5), f);
}

TEST(SpecAugment, FullWidthTimeMaskZeroesEverything) {
  const auto f = RandomFeatures(2, 6, 4);
  SpecAugmentPolicy p;
  p.num_time_masks = 1;
  p.max_time_width = 6;
  p.num_freq_masks = 0;
  bool found = false;
  for (std::uint64_t seed = 0; seed < 200 && !found; ++seed) {
    Rng rng(seed);
    const auto plan = PlanSpecAugment(6, 4, p, rng);
    if (plan.time[0].width != 6) continue;
    found = true;
    const auto g = SpecAugment(f, p, seed);
    for (double v : g.frames.Data()) EXPECT_EQ(v, 0.0);
  }
  EXPECT_TRUE(found);
}

TEST(SpecAugment, RandomPoliciesRespectBounds) {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const auto T = static_cast<std::size_t>(rng.UniformInt(1, 60));
    const auto F = static_cast<std::size_t>(rng.UniformInt(1, 40));
    const auto f = RandomFeatures(rng.Next(), T, F);
    SpecAugmentPolicy p;
    p.num_time_masks = static_cast<int>(rng.UniformInt(0, 3));
    p.max_time_width = static_cast<int>(rng.UniformInt(0, 80));
    p.num_freq_masks = static_cast<int>(rng.UniformInt(0, 3));
    p.max_freq_width = static_cast<int>(rng.UniformInt(0, 50));
    const auto g = SpecAugment(f, p, rng.Next());
    // Inputs lie in [1, 2) and the fill is zero, so a changed cell is a
    // masked cell. Masked columns and rows are the fully changed ones.
    std::vector<bool> col(T, true), row(F, true);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t b = 0; b < F; ++b) {
        EXPECT_TRUE(std::isfinite(g.frames(t, b)));
        const bool changed = g.frames(t, b) != f.frames(t, b);
        if (changed) { EXPECT_EQ(g.frames(t, b), 0.0); }
        col[t] = col[t] && changed;
        row[b] = row[b] && changed;
      }
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t b = 0; b < F; ++b)
        if (g.frames(t, b) != f.frames(t, b)) { EXPECT_TRUE(col[t] || row[b]); }
    const auto n_cols = static_cast<std::size_t>(std::count(col.begin(), col.end(), true));
    const auto n_rows = static_cast<std::size_t>(std::count(row.begin(), row.end(), true));
    const auto t_bound = p.num_time_masks * std::min<std::size_t>(p.max_time_width, T);
    const auto f_bound = p.num_freq_masks * std::min<std::size_t>(p.max_freq_width, F);
    if (n_rows < F) { EXPECT_LE(n_cols, t_bound); }
    if (n_cols < T) { EXPECT_LE(n_rows, f_bound); }
    if (n_rows == F && n_cols == T) { EXPECT_TRUE(t_bound >= T || f_bound >= F); }
  }
}

TEST(SpecAugment, UnmaskedCellsBitIdentical) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = RandomFeatures(rng.Next(), 40, 30);
    SpecAugmentPolicy p;
    p.fill = MaskFill::kUtteranceMean;
    const std::uint64_t seed = rng.Next();
    Rng plan_rng(seed);
    const auto plan = PlanSpecAugment(40, 30, p, plan_rng);
    const auto g = SpecAugment(f, p, seed);
    std::vector<bool> tm(40), fm(30);
    for (const auto &m : plan.time) {
      EXPECT_LE(m.width, 20u);
      for (std::size_t t = m.start; t < m.start + m.width; ++t) tm[t] = true;
    }
    for (const auto &m : plan.freq) {
      EXPECT_LE(m.width, 10u);
      for (std::size_t b = m.start; b < m.start + m.width; ++b) fm[b] = true;
    }
    for (std::size_t t = 0; t < 40; ++t)
      for (std::size_t b = 0; b < 30; ++b)
        if (!tm[t] && !fm[b]) { EXPECT_EQ(g.frames(t, b), f.frames(t, b)); }
  }
}

TEST(SpecAugment, NegativePolicyRejected) {
  SpecAugmentPolicy p;
  p.max_time_width = -1;
  EXPECT_THROW(SpecAugment(RandomFeatures(1, 3, 3), p, 1), ConfigError);
}

TEST(FeatureDump, RoundTrip) {
  namespace fs = std::filesystem;
  const auto path = (fs::temp_directory_path() / "tonalasr_feats_test.tfm").string();
  const auto f = LogMel(Noise(9, 3000, 0.1));
  WriteFeatures(f, path);
  EXPECT_EQ(fs::file_size(path), 16u + 4u * f.NumFrames() * f.NumBins());
  const auto g = ReadFeatures(path);
  ASSERT_EQ(g.NumFrames(), f.NumFrames());
  ASSERT_EQ(g.NumBins(), f.NumBins());
  for (std::size_t i = 0; i < f.frames.Data().size(); ++i)
    EXPECT_EQ(g.frames.Data()[i], static_cast<float>(f.frames.Data()[i]));
  {
    std::ofstream os(path, std::ios::binary | std::ios::app);
    os << "x";
  }
  EXPECT_THROW(ReadFeatures(path), DataError);
  fs::remove(path);
}

}  // namespace
}  // namespace tonalasr
