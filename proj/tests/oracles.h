// tests/oracles.h
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
// Independent reference implementations used by the tests. These are
// deliberately naive: brute-force enumeration, top-down recursion, direct
// DFTs. None of them call the code under test except for data types.
//
#ifndef TONALASR_TESTS_ORACLES_H_
#define TONALASR_TESTS_ORACLES_H_

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "tonalasr/tonalasr.h"

namespace oracle {

using tonalasr::Graph;
using tonalasr::Lattice;
using tonalasr::Matrix;
using tonalasr::Transcript;

// ---------------------------------------------------------------------------
// Edit distance

struct Edits {
  int s = 0, d = 0, i = 0;
  int Total() const { return s + d + i; }
};

inline bool Same(const tonalasr::TonalSyllable &a, const tonalasr::TonalSyllable &b, bool tones) {
  return tones ? (a.Base() == b.Base() && a.Tone() == b.Tone()) : a.Base() == b.Base();
}

// Every edit script, enumerated; keeps the fewest edits, then the most
// substitutions. Exponential, so only for short inputs.
inline Edits ExhaustiveEdits(const Transcript &r, const Transcript &h, bool tones,
                             std::size_t i = 0, std::size_t j = 0) {
  if (i == r.size() && j == h.size()) return {};
  std::vector<Edits> options;
  if (i < r.size() && j < h.size()) {
    Edits e = ExhaustiveEdits(r, h, tones, i + 1, j + 1);
    if (!Same(r[i], h[j], tones)) ++e.s;
    options.push_back(e);
  }
  if (i < r.size()) {
    Edits e = ExhaustiveEdits(r, h, tones, i + 1, j);
    ++e.d;
    options.push_back(e);
  }
  if (j < h.size()) {
    Edits e = ExhaustiveEdits(r, h, tones, i, j + 1);
    ++e.i;
    options.push_back(e);
  }
  return *std::min_element(options.begin(), options.end(), [](const Edits &a, const Edits &b) {
    if (a.Total() != b.Total()) return a.Total() < b.Total();
    return a.s > b.s;
  });
}

// Same criterion, memoized top-down, for lengths up to a few dozen.
inline Edits MemoEdits(const Transcript &r, const Transcript &h, bool tones) {
  std::map<std::pair<std::size_t, std::size_t>, Edits> memo;
  std::function<Edits(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> Edits {
    if (i == r.size() && j == h.size()) return {};
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Edits best{1 << 20, 0, 0};
    auto consider = [&](Edits e) {
      if (e.Total() < best.Total() || (e.Total() == best.Total() && e.s > best.s)) best = e;
    };
    if (i < r.size() && j < h.size()) {
      Edits e = go(i + 1, j + 1);
      if (!Same(r[i], h[j], tones)) ++e.s;
      consider(e);
    }
    if (i < r.size()) {
      Edits e = go(i + 1, j);
      ++e.d;
      consider(e);
    }
    if (j < h.size()) {
      Edits e = go(i, j + 1);
      ++e.i;
      consider(e);
    }
    memo[key] = best;
    return best;
  };
  return go(0, 0);
}

// ---------------------------------------------------------------------------
// Lattice enumeration

struct LatPath {
  std::vector<int> arcs;
  Transcript labels;
  double weight = 0.0;  // log, including the final weight
};

inline std::vector<LatPath> EnumeratePaths(const Lattice &l, double k) {
  std::vector<LatPath> out;
  std::vector<std::vector<int>> outs(l.num_states);
  for (std::size_t a = 0; a < l.arcs.size(); ++a) outs[l.arcs[a].from].push_back(static_cast<int>(a));
  LatPath cur;
  std::function<void(int)> dfs = [&](int s) {
    for (const auto &[fs, fw] : l.finals)
      if (fs == s) {
        LatPath p = cur;
        p.weight += fw;
        out.push_back(p);
      }
    for (int a : outs[s]) {
      const auto &arc = l.arcs[a];
      cur.arcs.push_back(a);
      if (arc.label) cur.labels.push_back(*arc.label);
      const double w = k * arc.acoustic + arc.lm;
      cur.weight += w;
      dfs(arc.to);
      cur.weight -= w;
      if (arc.label) cur.labels.pop_back();
      cur.arcs.pop_back();
    }
  };
  dfs(0);
  return out;
}

inline double LogSum(const std::vector<double> &xs) {
  double m = -INFINITY;
  for (double x : xs) m = std::max(m, x);
  if (m == -INFINITY) return m;
  long double s = 0;
  for (double x : xs) s += std::exp(static_cast<long double>(x - m));
  return m + static_cast<double>(std::log(s));
}

inline std::vector<std::string> Key(const Transcript &t) {
  std::vector<std::string> k;
  for (const auto &s : t) k.push_back(s.Text());
  return k;
}

// Posterior of every distinct label sequence.
inline std::map<std::vector<std::string>, double> LabelPosteriors(const Lattice &l, double k) {
  const auto paths = EnumeratePaths(l, k);
  std::vector<double> ws;
  for (const auto &p : paths) ws.push_back(p.weight);
  const double z = LogSum(ws);
  std::map<std::vector<std::string>, double> out;
  for (const auto &p : paths) out[Key(p.labels)] += std::exp(p.weight - z);
  return out;
}

struct MbrChoice {
  Transcript hypothesis;
  double risk = 0.0;
  double posterior = 0.0;
};

// Expected-risk minimizer over all label sequences in the lattice; ties go
// to the higher posterior, then the smaller label sequence.
inline MbrChoice BruteForceMbr(const Lattice &l, double k) {
  const auto paths = EnumeratePaths(l, k);
  std::vector<double> ws;
  for (const auto &p : paths) ws.push_back(p.weight);
  const double z = LogSum(ws);
  std::map<std::vector<std::string>, std::pair<Transcript, double>> groups;
  for (const auto &p : paths) {
    auto &g = groups[Key(p.labels)];
    g.first = p.labels;
    g.second += std::exp(p.weight - z);
  }
  std::vector<MbrChoice> all;
  for (const auto &[key, c] : groups) {
    double risk = 0.0;
    for (const auto &[k2, o] : groups) risk += o.second * MemoEdits(c.first, o.first, true).Total();
    all.push_back({c.first, risk, c.second});
  }
  MbrChoice best = all.front();
  for (std::size_t i = 1; i < all.size(); ++i) {
    const auto &c = all[i];
    if (c.risk < best.risk - 1e-9 ||
        (std::abs(c.risk - best.risk) <= 1e-9 && c.posterior > best.posterior + 1e-12))
      best = c;
  }
  return best;
}

// Random acyclic lattice over a small syllable set: arcs only go from lower
// to higher state ids, about one in eight is epsilon, and a few states are
// final. Connected before returning; callers filter on path count.
inline Lattice RandomLattice(tonalasr::Rng &rng, int num_states, double arc_prob = 0.35) {
  static const char *bases[] = {"a", "tai", "gi", "li"};
  Lattice l;
  for (int s = 0; s < num_states; ++s) l.AddState();
  for (int i = 0; i + 1 < num_states; ++i) {
    // The j == i + 1 spine keeps every state reachable.
    for (int j = i + 1; j < num_states; ++j) {
      if (!(j == i + 1 || rng.Uniform() < arc_prob)) continue;
      std::optional<tonalasr::TonalSyllable> label;
      if (rng.Uniform() >= 0.125)
        label = tonalasr::TonalSyllable(bases[rng.UniformInt(0, 3)], static_cast<int>(rng.UniformInt(1, 3)));
      l.AddArc(i, j, label, rng.Uniform(-6.0, 0.0), rng.Uniform(-3.0, 0.0));
    }
  }
  l.SetFinal(num_states - 1, 0.0);
  if (num_states > 2 && rng.Uniform() < 0.5)
    l.SetFinal(static_cast<int>(rng.UniformInt(1, num_states - 2)), rng.Uniform(-1.0, 0.0));
  return tonalasr::Connect(l);
}

// ---------------------------------------------------------------------------
// Frame-synchronous graph enumeration

struct GraphMass {
  double log_z = -INFINITY;
  Matrix occupancy;
};

// Sums over every T-arc start-to-final path explicitly.
inline GraphMass EnumerateGraph(const Graph &g, const Matrix &e, double k) {
  const std::size_t T = e.Rows();
  std::vector<std::vector<int>> outs(g.num_states);
  for (std::size_t a = 0; a < g.arcs.size(); ++a) outs[g.arcs[a].from].push_back(static_cast<int>(a));
  std::vector<std::pair<double, std::vector<int>>> paths;  // weight, phones per frame
  std::vector<int> phones;
  std::function<void(int, double)> dfs = [&](int s, double w) {
    if (phones.size() == T) {
      for (const auto &[fs, fw] : g.finals)
        if (fs == s) paths.emplace_back(w + fw, phones);
      return;
    }
    for (int a : outs[s]) {
      const auto &arc = g.arcs[a];
      phones.push_back(arc.phone);
      dfs(arc.to, w + arc.weight + k * e(phones.size() - 1, arc.phone));
      phones.pop_back();
    }
  };
  dfs(g.start, 0.0);
  GraphMass m;
  std::vector<double> ws;
  for (const auto &p : paths) ws.push_back(p.first);
  m.log_z = LogSum(ws);
  m.occupancy = Matrix(T, e.Cols(), 0.0);
  for (const auto &[w, ph] : paths)
    for (std::size_t t = 0; t < T; ++t) m.occupancy(t, ph[t]) += std::exp(w - m.log_z);
  return m;
}

// Number of T-arc paths, ignoring weights.
inline std::size_t CountGraphPaths(const Graph &g, std::size_t T) {
  Matrix e(T, static_cast<std::size_t>(std::max(g.MaxPhone() + 1, 1)), 0.0);
  Graph unweighted = g;
  for (auto &a : unweighted.arcs) a.weight = 0.0;
  for (auto &f : unweighted.finals) f.second = 0.0;
  const auto m = EnumerateGraph(unweighted, e, 1.0);
  return m.log_z == -INFINITY ? 0 : static_cast<std::size_t>(std::llround(std::exp(m.log_z)));
}

// start^T M^T final with M(s, s') = sum of exp(weights) of arcs s -> s'.
inline double MatrixPowerLogMass(const Graph &g, std::size_t T) {
  const auto S = static_cast<std::size_t>(g.num_states);
  std::vector<long double> M(S * S, 0.0L);
  for (const auto &a : g.arcs) M[a.from * S + a.to] += std::exp(static_cast<long double>(a.weight));
  std::vector<long double> v(S, 0.0L);
  v[g.start] = 1.0L;
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<long double> next(S, 0.0L);
    for (std::size_t i = 0; i < S; ++i)
      for (std::size_t j = 0; j < S; ++j) next[j] += v[i] * M[i * S + j];
    v = next;
  }
  long double total = 0.0L;
  for (const auto &[s, w] : g.finals) total += v[s] * std::exp(static_cast<long double>(w));
  return static_cast<double>(std::log(total));
}

// Central-difference gradient of `f` at `x`.
inline std::vector<double> NumericGradient(const std::function<double(const std::vector<double> &)> &f,
                                           std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double RelativeError(double analytic, double numeric, double floor = 1e-3) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// ---------------------------------------------------------------------------
// Signals

// Magnitude of the DFT of x at frequency index k of an n-point transform
// (x zero-padded to n).
inline double DftMagnitude(const std::vector<double> &x, std::size_t n, std::size_t k) {
  std::complex<long double> acc = 0;
  for (std::size_t i = 0; i < x.size() && i < n; ++i)
    acc += static_cast<long double>(x[i]) *
           std::polar(1.0L, -2.0L * static_cast<long double>(M_PI) * static_cast<long double>(k * i % n) / n);
  return static_cast<double>(std::abs(acc));
}

// Frequency (Hz) of the strongest component on a fine grid, by direct
// correlation against complex exponentials.
inline double PeakFrequency(const std::vector<double> &x, int rate, double lo, double hi,
                            double step) {
  double best_f = lo, best = -1.0;
  for (double f = lo; f <= hi; f += step) {
    std::complex<double> acc = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
      acc += x[i] * std::polar(1.0, -2.0 * M_PI * f * static_cast<double>(i) / rate);
    if (std::abs(acc) > best) {
      best = std::abs(acc);
      best_f = f;
    }
  }
  return best_f;
}

// ---------------------------------------------------------------------------
// Language models

// Hash-map recount keyed by the joined n-gram text.
inline std::unordered_map<std::string, std::uint64_t> Recount(
    const std::vector<std::vector<std::string>> &sentences, int order) {
  std::unordered_map<std::string, std::uint64_t> out;
  for (const auto &s : sentences) {
    std::vector<std::string> p{"<s>"};
    p.insert(p.end(), s.begin(), s.end());
    p.push_back("</s>");
    for (int n = 1; n <= order; ++n)
      for (std::size_t i = 0; i + n <= p.size(); ++i) {
        std::string key;
        for (int j = 0; j < n; ++j) key += (j ? " " : "") + p[i + j];
        ++out[key];
      }
  }
  return out;
}

// Textbook recursive backoff over the stored tables.
inline double RecursiveLogProb(const tonalasr::NGramModel &m, std::vector<std::string> ctx,
                               const std::string &w) {
  if (static_cast<int>(ctx.size()) > m.Order() - 1)
    ctx.erase(ctx.begin(), ctx.end() - (m.Order() - 1));
  std::vector<std::string> g = ctx;
  g.push_back(w);
  if (const auto *e = m.Find(g)) return e->log10_prob;
  if (ctx.empty()) return -INFINITY;
  double bow = 0.0;
  if (const auto *h = m.Find(ctx); h && h->log10_backoff) bow = *h->log10_backoff;
  return bow + RecursiveLogProb(m, std::vector<std::string>(ctx.begin() + 1, ctx.end()), w);
}

// Probability mass of a context summed over the predictable vocabulary.
inline double ContextMass(const tonalasr::NGramModel &m, const std::vector<std::string> &ctx) {
  long double s = 0.0L;
  for (const auto &w : m.PredictableVocabulary())
    s += std::pow(10.0L, static_cast<long double>(m.LogProb(ctx, w)));
  return static_cast<double>(s);
}

}  // namespace oracle

#endif  // TONALASR_TESTS_ORACLES_H_
