// tonalasr/metrics.h
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
// Syllable error rate (tonal and toneless) and scale-invariant SNR.
//
#ifndef TONALASR_METRICS_H_
#define TONALASR_METRICS_H_

#include <utility>
#include <vector>

#include "tonalasr/audio.h"
#include "tonalasr/corpus.h"

namespace tonalasr {

struct EditStats {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_len = 0;

  std::size_t Errors() const { return substitutions + deletions + insertions; }

  double Rate() const {
    if (ref_len == 0) Fail("error rate undefined for an empty reference");
    return static_cast<double>(Errors()) / static_cast<double>(ref_len);
  }

  EditStats &operator+=(const EditStats &o) {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    ref_len += o.ref_len;
    return *this;
  }

  bool operator==(const EditStats &) const = default;
};

inline bool SyllablesMatch(const TonalSyllable &a, const TonalSyllable &b,
                           bool tone_sensitive) {
  return tone_sensitive ? a == b : a.Base() == b.Base();
}

// Unit-cost Levenshtein alignment. Among minimum-cost alignments the one with
// the fewest insertions+deletions (i.e. most substitutions) is chosen, which
// is well defined because D - I is fixed by the lengths.
inline EditStats ComputeEditStats(const Transcript &ref, const Transcript &hyp,
                                  bool tone_sensitive = true) {
  const std::size_t n = ref.size(), m = hyp.size();
  struct Cell {
    std::size_t cost;
    std::size_t indels;
    std::size_t subs;
    std::size_t dels;
  };
  auto better = [](const Cell &a, const Cell &b) {
    return a.cost != b.cost ? a.cost < b.cost : a.indels < b.indels;
  };
  std::vector<Cell> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = {j, j, 0, 0};
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = {i, i, 0, i};
    for (std::size_t j = 1; j <= m; ++j) {
      const bool same = SyllablesMatch(ref[i - 1], hyp[j - 1], tone_sensitive);
      Cell diag = prev[j - 1];
      if (!same) {
        diag.cost += 1;
        diag.subs += 1;
      }
      Cell del = prev[j];
      del.cost += 1;
      del.indels += 1;
      del.dels += 1;
      Cell ins = cur[j - 1];
      ins.cost += 1;
      ins.indels += 1;
      Cell best = diag;
      if (better(del, best)) best = del;
      if (better(ins, best)) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  const Cell &end = prev[m];
  EditStats stats;
  stats.substitutions = end.subs;
  stats.deletions = end.dels;
  stats.insertions = end.indels - end.dels;
  stats.ref_len = n;
  return stats;
}

inline std::size_t EditDistance(const Transcript &a, const Transcript &b,
                                bool tone_sensitive = true) {
  return ComputeEditStats(a, b, tone_sensitive).Errors();
}

// Pooled corpus statistics; the rate is total errors over total reference
// length, not a mean of per-utterance rates.
inline EditStats CorpusEditStats(
    const std::vector<std::pair<Transcript, Transcript>> &pairs, bool tone_sensitive) {
  EditStats total;
  for (const auto &[ref, hyp] : pairs) total += ComputeEditStats(ref, hyp, tone_sensitive);
  return total;
}

inline double CorpusSer(const std::vector<std::pair<Transcript, Transcript>> &pairs,
                        bool tone_sensitive) {
  const EditStats total = CorpusEditStats(pairs, tone_sensitive);
  if (total.ref_len == 0) Fail("corpus SER undefined: total reference length is 0");
  return total.Rate();
}

// ---------------------------------------------------------------------------
// SI-SNR. Both signals are mean-removed first.

struct SiSnrResult {
  double value_db = 0.0;
  bool IsInfinite() const { return value_db == kInfinity; }
};

namespace internal {

struct SiSnrParts {
  std::vector<double> ref;  // zero-mean reference
  std::vector<double> est;  // zero-mean estimate
  double dot = 0.0;         // <est, ref>
  double ref_energy = 0.0;  // <ref, ref>
  double target_energy = 0.0;
  double error_energy = 0.0;
  std::vector<double> error;
};

inline std::vector<double> RemoveMean(std::span<const double> x) {
  KahanSum s;
  for (double v : x) s.Add(v);
  const double mean = s.Value() / static_cast<double>(x.size());
  std::vector<double> out(x.begin(), x.end());
  for (double &v : out) v -= mean;
  return out;
}

inline SiSnrParts Decompose(const Waveform &reference, const Waveform &estimate) {
  if (reference.Size() != estimate.Size())
    Fail("SI-SNR: length mismatch (", reference.Size(), " vs ", estimate.Size(), ")");
  if (reference.Size() == 0) Fail("SI-SNR: empty signals");
  SiSnrParts p;
  p.ref = RemoveMean(reference.samples);
  p.est = RemoveMean(estimate.samples);
  KahanSum dot, ref_energy;
  for (std::size_t i = 0; i < p.ref.size(); ++i) {
    dot.Add(p.est[i] * p.ref[i]);
    ref_energy.Add(p.ref[i] * p.ref[i]);
  }
  p.dot = dot.Value();
  p.ref_energy = ref_energy.Value();
  if (p.ref_energy <= 0.0) Fail("SI-SNR: reference has zero energy after mean removal");
  const double alpha = p.dot / p.ref_energy;
  p.error.resize(p.ref.size());
  KahanSum target, error;
  for (std::size_t i = 0; i < p.ref.size(); ++i) {
    const double t = alpha * p.ref[i];
    p.error[i] = p.est[i] - t;
    target.Add(t * t);
    error.Add(p.error[i] * p.error[i]);
  }
  p.target_energy = target.Value();
  p.error_energy = error.Value();
  return p;
}

}  // namespace internal

// Residual energy at or below this fraction of the target energy is
// rounding noise from projecting an exact multiple (about 1e-32 in double
// precision) and counts as zero.
inline constexpr double kSiSnrExactResidual = 1e-24;

inline SiSnrResult SiSnr(const Waveform &reference, const Waveform &estimate) {
  const auto p = internal::Decompose(reference, estimate);
  if (p.target_energy == 0.0 && p.error_energy == 0.0)
    Fail<NumericalError>("SI-SNR: estimate has zero energy after mean removal");
  if (p.error_energy <= kSiSnrExactResidual * p.target_energy) return {kInfinity};
  return {10.0 * std::log10(p.target_energy / p.error_energy)};
}

// Negative SI-SNR with the residual energy floored at 1e-12 of the target
// energy, so a perfect estimate scores -120 dB instead of -inf.
inline double SiSnrLoss(const Waveform &reference, const Waveform &estimate) {
  const auto p = internal::Decompose(reference, estimate);
  const double floor = 1e-12 * p.target_energy;
  const double err = std::max(p.error_energy, floor);
  return -10.0 * std::log10(p.target_energy / err);
}

// d SiSnrLoss / d estimate. Zero when the floor is active.
inline std::vector<double> SiSnrLossGradient(const Waveform &reference,
                                             const Waveform &estimate) {
  const auto p = internal::Decompose(reference, estimate);
  std::vector<double> grad(p.ref.size(), 0.0);
  if (p.error_energy <= 1e-12 * p.target_energy) return grad;
  if (p.dot == 0.0) Fail<NumericalError>("SI-SNR loss gradient undefined: estimate orthogonal to reference");
  const double c = -10.0 / std::log(10.0);
  for (std::size_t i = 0; i < grad.size(); ++i)
    grad[i] = c * (2.0 * p.ref[i] / p.dot - 2.0 * p.error[i] / p.error_energy);
  return grad;
}

}  // namespace tonalasr

#endif  // TONALASR_METRICS_H_
