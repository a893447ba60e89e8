// tonalasr/lfmmi.h
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
// Lattice-free MMI at desk scale.
//
// A Graph is a frame-synchronous acceptor over phone labels: every arc
// consumes exactly one frame. For emission scores e (T x P) and acoustic
// scale k, the total mass of a graph is
//
//   logZ = log sum_{paths of T arcs} exp( sum_t [k * e(t, phone_t) + w_t] + final )
//
// and the objective for one utterance is
//
//   F = logZ(numerator) - logZ(denominator),
//   dF/de(t, p) = k * (occ_num(t, p) - occ_den(t, p)),
//
// where occ(t, p) is the posterior probability that frame t is emitted by
// phone p. The numerator encodes the supervision (a phone sequence or a whole
// decoded lattice), the denominator a phone n-gram with self-loops.
//
#ifndef TONALASR_LFMMI_H_
#define TONALASR_LFMMI_H_

#include <functional>
#include <map>
#include <set>
#include <thread>

#include "tonalasr/lattice.h"
#include "tonalasr/lm.h"

namespace tonalasr {

struct GraphArc {
  int from = 0;
  int to = 0;
  int phone = 0;
  double weight = 0.0;     // natural-log transition weight
  bool self_loop = false;  // duration elasticity, not a new phone token
};

struct Graph {
  int num_states = 0;
  int start = 0;
  std::vector<GraphArc> arcs;
  std::vector<std::pair<int, double>> finals;

  int AddState() { return num_states++; }
  void AddArc(int from, int to, int phone, double weight, bool self_loop = false) {
    arcs.push_back({from, to, phone, weight, self_loop});
  }
  void SetFinal(int s, double w = 0.0) { finals.emplace_back(s, w); }

  int MaxPhone() const {
    int m = -1;
    for (const auto &a : arcs) m = std::max(m, a.phone);
    return m;
  }
};

using EmissionScores = Matrix;  // T x P log-likelihood scores

struct LfMmiConfig {
  double acoustic_scale = 1.0;  // k, in (0, 1]
  int den_order = 2;

  void Validate() const {
    if (!(acoustic_scale > 0.0 && acoustic_scale <= 1.0))
      Fail<ConfigError>("acoustic scale ", acoustic_scale, " outside (0, 1]");
    if (den_order < 1 || den_order > kMaxLmOrder)
      Fail<ConfigError>("denominator order ", den_order, " outside 1..", kMaxLmOrder);
  }
};

// Phone symbol <-> dense id.
class PhoneSet {
 public:
  PhoneSet() = default;
  explicit PhoneSet(const Lexicon &lex) {
    std::set<std::string> all;
    for (const auto &[k, pron] : lex.Entries()) all.insert(pron.begin(), pron.end());
    for (const auto &p : all) Add(p);
  }

  int Add(const std::string &symbol) {
    auto [it, inserted] = ids_.emplace(symbol, static_cast<int>(symbols_.size()));
    if (inserted) symbols_.push_back(symbol);
    return it->second;
  }
  int Id(const std::string &symbol) const {
    auto it = ids_.find(symbol);
    if (it == ids_.end()) Fail("unknown phone '", symbol, "'");
    return it->second;
  }
  bool Contains(const std::string &symbol) const { return ids_.count(symbol) > 0; }
  const std::string &Symbol(int id) const { return symbols_.at(id); }
  int Size() const { return static_cast<int>(symbols_.size()); }

 private:
  std::map<std::string, int> ids_;
  std::vector<std::string> symbols_;
};

using PronunciationFn = std::function<std::vector<int>(const TonalSyllable &)>;

inline PronunciationFn LexiconPronunciations(const Lexicon &lex, const PhoneSet &phones) {
  return [&lex, &phones](const TonalSyllable &s) {
    std::vector<int> ids;
    for (const auto &p : lex.Lookup(s)) ids.push_back(phones.Id(p));
    return ids;
  };
}

// ---------------------------------------------------------------------------
// Graph construction

// Linear chain; each phone consumes one frame on entry and may repeat on its
// self-loop.
inline Graph NumeratorGraph(std::span<const int> phones) {
  if (phones.empty()) Fail("numerator graph needs a non-empty phone sequence");
  Graph g;
  g.AddState();
  for (std::size_t i = 0; i < phones.size(); ++i) {
    if (phones[i] < 0) Fail("negative phone id ", phones[i]);
    const int s = g.AddState();
    g.AddArc(s - 1, s, phones[i], 0.0);
    g.AddArc(s, s, phones[i], 0.0, true);
  }
  g.SetFinal(g.num_states - 1, 0.0);
  return g;
}

// Phone n-gram acceptor. A state remembers the last max(order-1, 1) tokens;
// arcs carry ln p(phone | history) from a Kneser-Ney model trained on the
// phone sequences, every phone state has a zero-weight self-loop, and finals
// carry ln p(</s> | history).
inline Graph DenominatorGraph(const std::vector<std::vector<int>> &train_phone_seqs,
                              int num_phones, int order = 2) {
  if (num_phones < 1) Fail<ConfigError>("denominator graph needs at least one phone");
  if (train_phone_seqs.empty()) Fail("denominator graph needs training phone sequences");
  std::vector<Sentence> sentences;
  for (const auto &seq : train_phone_seqs) {
    Sentence s;
    for (int p : seq) {
      if (p < 0 || p >= num_phones) Fail("phone id ", p, " outside 0..", num_phones - 1);
      s.push_back(std::to_string(p));
    }
    sentences.push_back(std::move(s));
  }
  const NGramModel lm = KneserNeyEstimate(CountNGrams(sentences, order));
  const std::size_t hist_len = static_cast<std::size_t>(std::max(order - 1, 1));
  const double ln10 = std::log(10.0);

  Graph g;
  std::map<NGram, int> state_of;
  std::vector<NGram> history_of;
  auto state_for = [&](const NGram &h) {
    auto [it, inserted] = state_of.emplace(h, g.num_states);
    if (inserted) {
      g.AddState();
      history_of.push_back(h);
    }
    return it->second;
  };
  g.start = state_for(NGram{kBos});
  for (std::size_t s = 0; s < history_of.size(); ++s) {
    const NGram h = history_of[s];
    const bool phone_state = h.back() != kBos;
    if (phone_state) {
      const int p = std::stoi(h.back());
      g.AddArc(static_cast<int>(s), static_cast<int>(s), p, 0.0, true);
    }
    for (int q = 0; q < num_phones; ++q) {
      NGram next = h;
      next.push_back(std::to_string(q));
      if (next.size() > hist_len) next.erase(next.begin(), next.end() - hist_len);
      const int to = state_for(next);
      g.AddArc(static_cast<int>(s), to, q, lm.LogProb(h, std::to_string(q)) * ln10);
    }
    if (phone_state) g.SetFinal(static_cast<int>(s), lm.LogProb(h, kEos) * ln10);
  }
  return g;
}

// Product acceptor: arcs pair up on equal phones and add their weights;
// self-loop marks follow `a`. Only states reachable from the start pair
// are built.
inline Graph Intersect(const Graph &a, const Graph &b) {
  std::vector<std::vector<int>> out_b(b.num_states);
  for (std::size_t i = 0; i < b.arcs.size(); ++i) out_b[b.arcs[i].from].push_back(static_cast<int>(i));
  std::vector<std::vector<int>> out_a(a.num_states);
  for (std::size_t i = 0; i < a.arcs.size(); ++i) out_a[a.arcs[i].from].push_back(static_cast<int>(i));
  std::vector<double> final_a(a.num_states, kLogZero), final_b(b.num_states, kLogZero);
  for (const auto &[s, w] : a.finals) final_a[s] = LogAdd(final_a[s], w);
  for (const auto &[s, w] : b.finals) final_b[s] = LogAdd(final_b[s], w);

  Graph g;
  std::map<std::pair<int, int>, int> id;
  std::vector<std::pair<int, int>> pairs;
  auto state_for = [&](int sa, int sb) {
    auto [it, inserted] = id.emplace(std::make_pair(sa, sb), g.num_states);
    if (inserted) {
      g.AddState();
      pairs.emplace_back(sa, sb);
    }
    return it->second;
  };
  g.start = state_for(a.start, b.start);
  for (std::size_t s = 0; s < pairs.size(); ++s) {
    const auto [sa, sb] = pairs[s];
    for (int ai : out_a[sa])
      for (int bi : out_b[sb]) {
        const auto &x = a.arcs[ai];
        const auto &y = b.arcs[bi];
        if (x.phone != y.phone) continue;
        const int to = state_for(x.to, y.to);
        g.AddArc(static_cast<int>(s), to, x.phone, x.weight + y.weight, x.self_loop);
      }
    if (final_a[sa] != kLogZero && final_b[sb] != kLogZero)
      g.SetFinal(static_cast<int>(s), final_a[sa] + final_b[sb]);
  }
  return g;
}

// Numerator graph spelling every path of a supervision lattice. Each
// labelled lattice arc expands into its phone chain; epsilon arcs are folded
// into the entering transitions. Lattice weights (acoustic_scale * acoustic +
// lm) ride on the first phone of each arc; final weights on the last.
inline Graph LatticeNumeratorGraph(const Lattice &lat, const PronunciationFn &pron,
                                   double acoustic_scale) {
  const auto order = TopologicalOrder(lat);
  const auto out = internal::OutArcs(lat);
  const auto final_w = internal::FinalWeights(lat);

  // closure[u]: epsilon-reachable states from u with their log weights.
  std::vector<std::map<int, double>> closure(lat.num_states);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int u = *it;
    auto &c = closure[u];
    c[u] = 0.0;
    for (int ai : out[u]) {
      const auto &a = lat.arcs[ai];
      if (a.label) continue;
      const double w = a.Weight(acoustic_scale);
      for (const auto &[v, cw] : closure[a.to]) {
        auto [slot, inserted] = c.emplace(v, w + cw);
        if (!inserted) slot->second = LogAdd(slot->second, w + cw);
      }
    }
  }

  Graph g;
  g.start = g.AddState();
  std::vector<int> first_state(lat.arcs.size(), -1), last_state(lat.arcs.size(), -1);
  std::vector<std::vector<int>> phones(lat.arcs.size());
  for (std::size_t ai = 0; ai < lat.arcs.size(); ++ai) {
    if (!lat.arcs[ai].label) continue;
    phones[ai] = pron(*lat.arcs[ai].label);
    if (phones[ai].empty()) Fail("empty pronunciation for '", lat.arcs[ai].label->Text(), "'");
    first_state[ai] = g.num_states;
    g.num_states += static_cast<int>(phones[ai].size());
    last_state[ai] = g.num_states - 1;
  }

  for (std::size_t ai = 0; ai < lat.arcs.size(); ++ai) {
    const auto &a = lat.arcs[ai];
    if (!a.label) continue;
    const int x1 = first_state[ai];
    const int p1 = phones[ai][0];
    const double w = a.Weight(acoustic_scale);
    if (auto it = closure[0].find(a.from); it != closure[0].end())
      g.AddArc(g.start, x1, p1, it->second + w);
    for (std::size_t bi = 0; bi < lat.arcs.size(); ++bi) {
      if (!lat.arcs[bi].label) continue;
      const auto &cb = closure[lat.arcs[bi].to];
      if (auto it = cb.find(a.from); it != cb.end())
        g.AddArc(last_state[bi], x1, p1, it->second + w);
    }
    g.AddArc(x1, x1, p1, 0.0, true);
    for (std::size_t i = 1; i < phones[ai].size(); ++i) {
      g.AddArc(x1 + static_cast<int>(i) - 1, x1 + static_cast<int>(i), phones[ai][i], 0.0);
      g.AddArc(x1 + static_cast<int>(i), x1 + static_cast<int>(i), phones[ai][i], 0.0, true);
    }
  }
  for (std::size_t ai = 0; ai < lat.arcs.size(); ++ai) {
    if (!lat.arcs[ai].label) continue;
    double fw = kLogZero;
    for (const auto &[v, cw] : closure[lat.arcs[ai].to])
      if (final_w[v] != kLogZero) fw = LogAdd(fw, cw + final_w[v]);
    if (fw != kLogZero) g.SetFinal(last_state[ai], fw);
  }
  return g;
}

// Fewest arcs on any start-to-final path, or -1 if no final is reachable.
inline int MinPathLength(const Graph &g) {
  std::vector<int> dist(g.num_states, -1);
  std::vector<std::vector<int>> out(g.num_states);
  for (const auto &a : g.arcs) out[a.from].push_back(a.to);
  std::vector<int> frontier{g.start};
  dist[g.start] = 0;
  for (std::size_t i = 0; i < frontier.size(); ++i)
    for (int v : out[frontier[i]])
      if (dist[v] < 0) {
        dist[v] = dist[frontier[i]] + 1;
        frontier.push_back(v);
      }
  int best = -1;
  for (const auto &[s, w] : g.finals)
    if (dist[s] >= 0 && (best < 0 || dist[s] < best)) best = dist[s];
  return best;
}

// ---------------------------------------------------------------------------
// Forward-backward

struct GraphPosterior {
  double log_z = kLogZero;
  Matrix occupancy;  // T x P
};

inline void CheckEmissions(const Graph &g, const EmissionScores &e) {
  if (e.Rows() < 1 || e.Cols() < 1) Fail("emission matrix must be at least 1x1");
  for (double v : e.Data())
    if (!std::isfinite(v)) Fail<NumericalError>("non-finite emission score");
  if (g.MaxPhone() >= static_cast<int>(e.Cols()))
    Fail("graph uses phone ", g.MaxPhone(), " but emissions have ", e.Cols(), " columns");
  if (g.num_states <= 0) Fail("graph has no states");
}

inline GraphPosterior GraphLogSum(const Graph &g, const EmissionScores &e, double acoustic_scale) {
  CheckEmissions(g, e);
  const std::size_t T = e.Rows();
  const std::size_t S = static_cast<std::size_t>(g.num_states);
  Matrix alpha(T + 1, S, kLogZero), beta(T + 1, S, kLogZero);
  alpha(0, g.start) = 0.0;
  for (std::size_t t = 1; t <= T; ++t)
    for (const auto &a : g.arcs) {
      const double src = alpha(t - 1, a.from);
      if (src == kLogZero) continue;
      alpha(t, a.to) = LogAdd(alpha(t, a.to), src + a.weight + acoustic_scale * e(t - 1, a.phone));
    }
  GraphPosterior r;
  for (const auto &[s, w] : g.finals) {
    beta(T, s) = LogAdd(beta(T, s), w);
    r.log_z = LogAdd(r.log_z, alpha(T, s) + w);
  }
  if (r.log_z == kLogZero || std::isnan(r.log_z)) {
    const int m = MinPathLength(g);
    Fail<NumericalError>("graph admits no path of exactly ", T,
                         " frames (minimum path length ", m, ")");
  }
  for (std::size_t t = T; t-- > 0;)
    for (const auto &a : g.arcs) {
      const double dst = beta(t + 1, a.to);
      if (dst == kLogZero) continue;
      beta(t, a.from) = LogAdd(beta(t, a.from), a.weight + acoustic_scale * e(t, a.phone) + dst);
    }
  r.occupancy = Matrix(T, e.Cols(), 0.0);
  for (std::size_t t = 0; t < T; ++t)
    for (const auto &a : g.arcs) {
      const double lp = alpha(t, a.from) + a.weight + acoustic_scale * e(t, a.phone) +
                        beta(t + 1, a.to) - r.log_z;
      if (lp == kLogZero) continue;
      r.occupancy(t, a.phone) += std::exp(lp);
    }
  return r;
}

struct LfMmiResult {
  double objective = 0.0;
  double log_z_num = 0.0;
  double log_z_den = 0.0;
  Matrix gradient;  // dF/de, T x P
};

inline LfMmiResult LfMmiObjective(const Graph &num, const Graph &den, const EmissionScores &e,
                                  const LfMmiConfig &cfg) {
  cfg.Validate();
  const auto n = GraphLogSum(num, e, cfg.acoustic_scale);
  const auto d = GraphLogSum(den, e, cfg.acoustic_scale);
  LfMmiResult r;
  r.log_z_num = n.log_z;
  r.log_z_den = d.log_z;
  r.objective = n.log_z - d.log_z;
  r.gradient = Matrix(e.Rows(), e.Cols());
  for (std::size_t i = 0; i < r.gradient.Data().size(); ++i)
    r.gradient.Data()[i] =
        cfg.acoustic_scale * (n.occupancy.Data()[i] - d.occupancy.Data()[i]);
  return r;
}

inline LfMmiResult LfMmiLatticeSupervised(const Lattice &supervision, const PronunciationFn &pron,
                                          const Graph &den, const EmissionScores &e,
                                          const LfMmiConfig &cfg) {
  return LfMmiObjective(LatticeNumeratorGraph(supervision, pron, cfg.acoustic_scale), den, e,
                        cfg);
}

// Best T-arc path; returns the phone token sequence (self-loops merged).
inline std::vector<int> ViterbiPhones(const Graph &g, const EmissionScores &e,
                                      double acoustic_scale) {
  CheckEmissions(g, e);
  const std::size_t T = e.Rows();
  const std::size_t S = static_cast<std::size_t>(g.num_states);
  Matrix delta(T + 1, S, kLogZero);
  std::vector<std::vector<int>> back(T + 1, std::vector<int>(S, -1));
  delta(0, g.start) = 0.0;
  for (std::size_t t = 1; t <= T; ++t)
    for (std::size_t ai = 0; ai < g.arcs.size(); ++ai) {
      const auto &a = g.arcs[ai];
      const double src = delta(t - 1, a.from);
      if (src == kLogZero) continue;
      const double v = src + a.weight + acoustic_scale * e(t - 1, a.phone);
      if (v > delta(t, a.to)) {
        delta(t, a.to) = v;
        back[t][a.to] = static_cast<int>(ai);
      }
    }
  int best_state = -1;
  double best = kLogZero;
  for (const auto &[s, w] : g.finals)
    if (delta(T, s) + w > best) {
      best = delta(T, s) + w;
      best_state = s;
    }
  if (best_state < 0)
    Fail<NumericalError>("graph admits no path of exactly ", T, " frames (minimum path length ",
                         MinPathLength(g), ")");
  std::vector<int> arcs;
  int s = best_state;
  for (std::size_t t = T; t > 0; --t) {
    const int ai = back[t][s];
    arcs.push_back(ai);
    s = g.arcs[ai].from;
  }
  std::reverse(arcs.begin(), arcs.end());
  std::vector<int> tokens;
  for (int ai : arcs)
    if (!g.arcs[ai].self_loop) tokens.push_back(g.arcs[ai].phone);
  return tokens;
}

// ---------------------------------------------------------------------------
// Gradient check

struct LfMmiInstance {
  Graph num;
  Graph den;
  EmissionScores e;
  LfMmiConfig cfg;
};

// Random chain numerator of length <= T over P phones, bigram denominator
// from three random phone strings, Gaussian emissions, k in [0.3, 1].
inline LfMmiInstance RandomLfMmiInstance(int frames, int phones, std::uint64_t seed) {
  if (frames < 1 || phones < 1) Fail<ConfigError>("need at least one frame and one phone");
  Rng rng(seed);
  LfMmiInstance inst;
  std::vector<int> ref(static_cast<std::size_t>(rng.UniformInt(1, frames)));
  for (int &p : ref) p = static_cast<int>(rng.UniformInt(0, phones - 1));
  std::vector<std::vector<int>> seqs{ref};
  for (int i = 0; i < 3; ++i) {
    std::vector<int> s(static_cast<std::size_t>(rng.UniformInt(1, 6)));
    for (int &p : s) p = static_cast<int>(rng.UniformInt(0, phones - 1));
    seqs.push_back(std::move(s));
  }
  inst.num = NumeratorGraph(ref);
  inst.den = DenominatorGraph(seqs, phones, 2);
  inst.e = EmissionScores(static_cast<std::size_t>(frames), static_cast<std::size_t>(phones));
  for (double &v : inst.e.Data()) v = 2.0 * rng.Gaussian();
  inst.cfg.acoustic_scale = rng.Uniform(0.3, 1.0);
  return inst;
}

// Largest |analytic - numeric| / max(|analytic|, |numeric|, 1e-3) over all
// emission entries, numeric by central differences with step h.
inline double MaxGradientRelativeError(const LfMmiInstance &inst, double h = 1e-5) {
  const auto r = LfMmiObjective(inst.num, inst.den, inst.e, inst.cfg);
  double worst = 0.0;
  EmissionScores e = inst.e;
  for (std::size_t i = 0; i < e.Data().size(); ++i) {
    const double saved = e.Data()[i];
    e.Data()[i] = saved + h;
    const double up = LfMmiObjective(inst.num, inst.den, e, inst.cfg).objective;
    e.Data()[i] = saved - h;
    const double down = LfMmiObjective(inst.num, inst.den, e, inst.cfg).objective;
    e.Data()[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double analytic = r.gradient.Data()[i];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Toy training: a linear emission model on synthetic frames.

struct LinearEmissionModel {
  Matrix weights;             // P x D
  std::vector<double> bias;   // P

  LinearEmissionModel() = default;
  LinearEmissionModel(std::size_t num_phones, std::size_t dim)
      : weights(num_phones, dim, 0.0), bias(num_phones, 0.0) {}

  EmissionScores Scores(const Matrix &features) const {
    EmissionScores e(features.Rows(), weights.Rows());
    for (std::size_t t = 0; t < features.Rows(); ++t)
      for (std::size_t p = 0; p < weights.Rows(); ++p) {
        double s = bias[p];
        for (std::size_t d = 0; d < features.Cols(); ++d) s += weights(p, d) * features(t, d);
        e(t, p) = s;
      }
    return e;
  }
};

struct ToyUtterance {
  std::string id;
  Transcript transcript;
  std::vector<int> phones;
  Matrix features;  // T x D
};

struct ToyTrainResult {
  LinearEmissionModel model;
  std::vector<double> objective_trace;  // mean F per utterance, before each update
  Graph den;
};

// Gradient ascent on the mean per-utterance objective. Each numerator chain
// is intersected with the denominator so it carries the same phone LM
// weights, which keeps F <= 0. Per-utterance work
// may run on `jobs` threads; gradients are reduced in utterance order.
inline ToyTrainResult ToyTrain(const std::vector<ToyUtterance> &train, int num_phones,
                               const LfMmiConfig &cfg, int steps, double lr, int jobs = 1) {
  cfg.Validate();
  if (train.empty()) Fail("toy training needs at least one utterance");
  if (steps < 0) Fail<ConfigError>("negative step count");
  std::vector<std::vector<int>> seqs;
  for (const auto &u : train) seqs.push_back(u.phones);
  ToyTrainResult r;
  r.den = DenominatorGraph(seqs, num_phones, cfg.den_order);
  const std::size_t dim = train.front().features.Cols();
  r.model = LinearEmissionModel(static_cast<std::size_t>(num_phones), dim);
  std::vector<Graph> nums;
  for (const auto &u : train) nums.push_back(Intersect(NumeratorGraph(u.phones), r.den));

  std::vector<LfMmiResult> results(train.size());
  for (int step = 0; step < steps; ++step) {
    auto work = [&](std::size_t i) {
      results[i] = LfMmiObjective(nums[i], r.den, r.model.Scores(train[i].features), cfg);
    };
    const std::size_t nj = static_cast<std::size_t>(std::max(1, jobs));
    if (nj == 1) {
      for (std::size_t i = 0; i < train.size(); ++i) work(i);
    } else {
      std::vector<std::thread> threads;
      std::vector<std::exception_ptr> errors(nj);
      for (std::size_t j = 0; j < nj; ++j)
        threads.emplace_back([&, j] {
          try {
            for (std::size_t i = j; i < train.size(); i += nj) work(i);
          } catch (...) {
            errors[j] = std::current_exception();
          }
        });
      for (auto &t : threads) t.join();
      for (auto &e : errors)
        if (e) std::rethrow_exception(e);
    }
    Matrix grad_w(r.model.weights.Rows(), dim, 0.0);
    std::vector<double> grad_b(r.model.bias.size(), 0.0);
    KahanSum total;
    for (std::size_t i = 0; i < train.size(); ++i) {
      total.Add(results[i].objective);
      const Matrix &g = results[i].gradient;
      const Matrix &x = train[i].features;
      for (std::size_t t = 0; t < g.Rows(); ++t)
        for (std::size_t p = 0; p < g.Cols(); ++p) {
          const double gp = g(t, p);
          if (gp == 0.0) continue;
          grad_b[p] += gp;
          for (std::size_t d = 0; d < dim; ++d) grad_w(p, d) += gp * x(t, d);
        }
    }
    const double n = static_cast<double>(train.size());
    r.objective_trace.push_back(total.Value() / n);
    for (std::size_t i = 0; i < grad_w.Data().size(); ++i)
      r.model.weights.Data()[i] += lr * grad_w.Data()[i] / n;
    for (std::size_t p = 0; p < grad_b.size(); ++p) r.model.bias[p] += lr * grad_b[p] / n;
  }
  return r;
}

}  // namespace tonalasr

#endif  // TONALASR_LFMMI_H_
