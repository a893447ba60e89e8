// tests/test_metrics.cc
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
// Tests for metrics.
//
#include <gtest/gtest.h>

#include "oracles.h"

namespace tonalasr {
namespace {

Transcript T(std::string_view text) { return ParseTranscript(text).transcript; }

Transcript RandomTranscript(Rng &rng, int max_len) {
  static const char *bases[] = {"a", "tai", "gi", "li"};
  Transcript t;
  const auto n = rng.UniformInt(0, max_len);
  for (std::int64_t i = 0; i < n; ++i)
    t.emplace_back(bases[rng.UniformInt(0, 3)], static_cast<int>(rng.UniformInt(1, 3)));
  return t;
}

TEST(EditStats, Identity) {
  const auto s = ComputeEditStats(T("tai5 gi2"), T("tai5 gi2"));
  EXPECT_EQ(s.Errors(), 0u);
  EXPECT_EQ(s.Rate(), 0.0);
}

TEST(EditStats, ToneSubstitution) {
  const auto tonal = ComputeEditStats(T("tai5 gi2"), T("tai5 gi3"), true);
  EXPECT_EQ(tonal.substitutions, 1u);
  EXPECT_EQ(tonal.Rate(), 0.5);
  EXPECT_EQ(ComputeEditStats(T("tai5 gi2"), T("tai5 gi3"), false).Rate(), 0.0);
  const auto oracle_edits = oracle::ExhaustiveEdits(T("tai5 gi2"), T("tai5 gi3"), true);
  EXPECT_EQ(oracle_edits.s, 1);
  EXPECT_EQ(oracle_edits.Total(), 1);
}

TEST(EditStats, FullDeletion) {
  const auto s = ComputeEditStats(T("a1"), {});
  EXPECT_EQ(s.deletions, 1u);
  EXPECT_EQ(s.Rate(), 1.0);
}

TEST(EditStats, EmptyReferenceRateIsAnError) {
  EXPECT_THROW(ComputeEditStats({}, T("a1")).Rate(), DataError);
}

TEST(EditStats, MatchesExhaustiveScripts) {
  Rng rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const Transcript r = RandomTranscript(rng, 5), h = RandomTranscript(rng, 5);
    for (bool tones : {true, false}) {
      const auto got = ComputeEditStats(r, h, tones);
      const auto want = oracle::ExhaustiveEdits(r, h, tones);
      EXPECT_EQ(got.substitutions, static_cast<std::size_t>(want.s));
      EXPECT_EQ(got.deletions, static_cast<std::size_t>(want.d));
      EXPECT_EQ(got.insertions, static_cast<std::size_t>(want.i));
    }
  }
}

// The memoised oracle stands in for enumeration on long inputs.
TEST(EditStats, MemoOracleMatchesEnumeration) {
  Rng rng(202);
  for (int trial = 0; trial < 200; ++trial) {
    const Transcript r = RandomTranscript(rng, 5), h = RandomTranscript(rng, 5);
    for (bool tones : {true, false}) {
      const auto a = oracle::ExhaustiveEdits(r, h, tones), b = oracle::MemoEdits(r, h, tones);
      EXPECT_EQ(a.s, b.s);
      EXPECT_EQ(a.d, b.d);
      EXPECT_EQ(a.i, b.i);
    }
  }
}

TEST(EditStats, SymmetryAndTriangle) {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const Transcript a = RandomTranscript(rng, 8), b = RandomTranscript(rng, 8),
                     c = RandomTranscript(rng, 8);
    const auto ab = ComputeEditStats(a, b), ba = ComputeEditStats(b, a);
    EXPECT_EQ(ab.Errors(), ba.Errors());
    EXPECT_EQ(ab.insertions, ba.deletions);
    EXPECT_EQ(ab.deletions, ba.insertions);
    EXPECT_LE(EditDistance(a, c), EditDistance(a, b) + EditDistance(b, c));
    EXPECT_LE(ComputeEditStats(a, b, false).Errors(), ab.Errors());
  }
}

TEST(CorpusSer, Pooled) {
  EXPECT_EQ(CorpusSer({{T("tai5 gi2"), T("tai5 gi3")}}, true), 0.5);
  EXPECT_EQ(CorpusSer({{T("tai5 gi2"), T("tai5 gi3")}, {T("a1 a2"), T("a1 a2")}}, true), 0.25);
  EXPECT_THROW(CorpusSer({{{}, T("a1")}}, true), DataError);
}

TEST(CorpusSer, MatchesRecomputation) {
  Rng rng(17);
  std::vector<std::pair<Transcript, Transcript>> pairs;
  int edits = 0, len = 0;
  for (int i = 0; i < 100; ++i) {
    pairs.emplace_back(RandomTranscript(rng, 10), RandomTranscript(rng, 10));
    edits += oracle::MemoEdits(pairs.back().first, pairs.back().second, true).Total();
    len += static_cast<int>(pairs.back().first.size());
  }
  EXPECT_DOUBLE_EQ(CorpusSer(pairs, true), static_cast<double>(edits) / len);
}

Waveform Signal(std::vector<double> x) { return {std::move(x), 16000}; }

Waveform RandomSignal(Rng &rng, std::size_t n) {
  Waveform w;
  w.samples.resize(n);
  for (auto &v : w.samples) v = rng.Gaussian();
  return w;
}

TEST(SiSnr, PerfectAndScaledAreInfinite) {
  Rng rng(1);
  const Waveform s = RandomSignal(rng, 256);
  EXPECT_TRUE(SiSnr(s, s).IsInfinite());
  Waveform twice = s;
  for (auto &v : twice.samples) v *= 2.0;
  EXPECT_TRUE(SiSnr(s, twice).IsInfinite());
}

// s and n orthogonal and zero-mean with ||s||^2 / ||n||^2 = 10.
TEST(SiSnr, OrthogonalNoiseTenDb) {
  const std::size_t n = 64;
  std::vector<double> s(n), noise(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = std::sin(2.0 * M_PI * 3.0 * i / n);
    noise[i] = std::cos(2.0 * M_PI * 5.0 * i / n) * std::sqrt(0.1);
  }
  std::vector<double> est(n);
  for (std::size_t i = 0; i < n; ++i) est[i] = s[i] + noise[i];
  EXPECT_NEAR(SiSnr(Signal(s), Signal(est)).value_db, 10.0, 1e-9);
}

TEST(SiSnr, OffsetInvariant) {
  Rng rng(3);
  const Waveform s = RandomSignal(rng, 128), e = RandomSignal(rng, 128);
  Waveform s2 = s, e2 = e;
  for (auto &v : s2.samples) v += 0.7;
  for (auto &v : e2.samples) v -= 1.3;
  EXPECT_NEAR(SiSnr(s, e).value_db, SiSnr(s2, e2).value_db, 1e-9);
}

TEST(SiSnr, Errors) {
  EXPECT_THROW(SiSnr(Signal({1, 2}), Signal({1, 2, 3})), DataError);
  EXPECT_THROW(SiSnr(Signal({1, 1, 1}), Signal({1, 2, 3})), DataError);
}

TEST(SiSnrLoss, PerfectHitsFloor) {
  Rng rng(4);
  const Waveform s = RandomSignal(rng, 64);
  EXPECT_NEAR(SiSnrLoss(s, s), -120.0, 1e-9);
  const Waveform e = RandomSignal(rng, 64);
  EXPECT_NEAR(SiSnrLoss(s, e), -SiSnr(s, e).value_db, 1e-12);
}

TEST(SiSnrLoss, GradientMatchesFiniteDifferences) {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Waveform s = RandomSignal(rng, 64);
    Waveform e = s;
    for (auto &v : e.samples) v = 0.8 * v + 0.5 * rng.Gaussian();
    const auto analytic = SiSnrLossGradient(s, e);
    const auto numeric = oracle::NumericGradient(
        [&](const std::vector<double> &x) { return SiSnrLoss(s, Signal(x)); }, e.samples, 1e-6);
    for (std::size_t i = 0; i < analytic.size(); ++i)
      EXPECT_LE(oracle::RelativeError(analytic[i], numeric[i]), 1e-4) << i;
  }
}

}  // namespace
}  // namespace tonalasr
