// tonalasr/lattice.h
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
// Acyclic syllable lattices: forward-backward posteriors, 1-best and N-best
// paths, confidence, equal-prior combination and N-best MBR decoding.
//
// Scores are natural-log "goodness" values (higher is better). An arc's
// combined weight under acoustic scale k is k * acoustic + lm.
//
#ifndef TONALASR_LATTICE_H_
#define TONALASR_LATTICE_H_

#include <fstream>
#include <map>
#include <optional>
#include <queue>
#include <set>

#include "tonalasr/corpus.h"
#include "tonalasr/metrics.h"

namespace tonalasr {

inline const std::string kEpsilon = "<eps>";

struct LatticeArc {
  int from = 0;
  int to = 0;
  std::optional<TonalSyllable> label;  // nullopt is epsilon
  double acoustic = 0.0;
  double lm = 0.0;

  double Weight(double acoustic_scale) const { return acoustic_scale * acoustic + lm; }
  bool operator==(const LatticeArc &) const = default;
};

// State 0 is the start state.
struct Lattice {
  int num_states = 0;
  std::vector<LatticeArc> arcs;
  std::vector<std::pair<int, double>> finals;  // (state, final log-weight)

  int AddState() { return num_states++; }
  void AddArc(int from, int to, std::optional<TonalSyllable> label, double acoustic,
              double lm) {
    arcs.push_back({from, to, std::move(label), acoustic, lm});
  }
  void SetFinal(int state, double weight = 0.0) { finals.emplace_back(state, weight); }

  bool operator==(const Lattice &) const = default;
};

namespace internal {

inline void CheckLatticeIds(const Lattice &l) {
  if (l.num_states <= 0) Fail("lattice has no states");
  for (const auto &a : l.arcs)
    if (a.from < 0 || a.from >= l.num_states || a.to < 0 || a.to >= l.num_states)
      Fail("lattice arc ", a.from, "->", a.to, " references a missing state");
  for (const auto &[s, w] : l.finals)
    if (s < 0 || s >= l.num_states) Fail("lattice final state ", s, " does not exist");
}

inline std::vector<std::vector<int>> OutArcs(const Lattice &l) {
  std::vector<std::vector<int>> out(l.num_states);
  for (std::size_t i = 0; i < l.arcs.size(); ++i) out[l.arcs[i].from].push_back(static_cast<int>(i));
  return out;
}

inline std::vector<double> FinalWeights(const Lattice &l) {
  std::vector<double> f(l.num_states, kLogZero);
  for (const auto &[s, w] : l.finals) f[s] = LogAdd(f[s], w);
  return f;
}

// Number of final entries per state (a -inf final weight still counts).
inline std::vector<int> FinalCounts(const Lattice &l) {
  std::vector<int> c(l.num_states, 0);
  for (const auto &[s, w] : l.finals) ++c[s];
  return c;
}

}  // namespace internal

// Kahn's algorithm, smallest ready state first. Throws on a cycle.
inline std::vector<int> TopologicalOrder(const Lattice &l) {
  internal::CheckLatticeIds(l);
  std::vector<int> indegree(l.num_states, 0);
  for (const auto &a : l.arcs) ++indegree[a.to];
  const auto out = internal::OutArcs(l);
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int s = 0; s < l.num_states; ++s)
    if (indegree[s] == 0) ready.push(s);
  std::vector<int> order;
  order.reserve(l.num_states);
  while (!ready.empty()) {
    const int s = ready.top();
    ready.pop();
    order.push_back(s);
    for (int ai : out[s])
      if (--indegree[l.arcs[ai].to] == 0) ready.push(l.arcs[ai].to);
  }
  if (static_cast<int>(order.size()) != l.num_states) Fail("lattice contains a cycle");
  return order;
}

// Drops states that are not on a start-to-final path and renumbers the
// survivors in topological order (start stays 0).
inline Lattice Connect(const Lattice &l) {
  const auto order = TopologicalOrder(l);
  const auto out = internal::OutArcs(l);
  std::vector<char> fwd(l.num_states, 0), bwd(l.num_states, 0);
  fwd[0] = 1;
  for (int s : order)
    if (fwd[s])
      for (int ai : out[s]) fwd[l.arcs[ai].to] = 1;
  for (const auto &[s, w] : l.finals) bwd[s] = 1;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    for (int ai : out[*it])
      if (bwd[l.arcs[ai].to]) bwd[*it] = 1;
  if (!bwd[0]) Fail("lattice has no complete path from the start state");

  std::vector<int> remap(l.num_states, -1);
  Lattice result;
  // Start first, then the rest in topological order.
  remap[0] = result.AddState();
  for (int s : order)
    if (s != 0 && fwd[s] && bwd[s]) remap[s] = result.AddState();
  std::vector<int> by_new(result.num_states);
  for (int s = 0; s < l.num_states; ++s)
    if (remap[s] >= 0) by_new[remap[s]] = s;
  for (int ns = 0; ns < result.num_states; ++ns)
    for (int ai : out[by_new[ns]]) {
      const auto &a = l.arcs[ai];
      if (remap[a.to] >= 0) result.AddArc(ns, remap[a.to], a.label, a.acoustic, a.lm);
    }
  for (const auto &[s, w] : l.finals)
    if (remap[s] >= 0) result.SetFinal(remap[s], w);
  return result;
}

struct ForwardBackward {
  std::vector<double> alpha;
  std::vector<double> beta;
  double log_z_forward = kLogZero;
  double log_z_backward = kLogZero;
  std::vector<double> arc_posteriors;
  std::vector<double> final_posteriors;  // aligned with Lattice::finals

  double LogZ() const { return log_z_forward; }
};

inline ForwardBackward ComputeForwardBackward(const Lattice &l, double acoustic_scale) {
  const auto order = TopologicalOrder(l);
  const auto out = internal::OutArcs(l);
  const auto final_w = internal::FinalWeights(l);
  ForwardBackward fb;
  fb.alpha.assign(l.num_states, kLogZero);
  fb.beta.assign(l.num_states, kLogZero);
  fb.alpha[0] = 0.0;
  for (int s : order)
    for (int ai : out[s]) {
      const auto &a = l.arcs[ai];
      fb.alpha[a.to] = LogAdd(fb.alpha[a.to], fb.alpha[s] + a.Weight(acoustic_scale));
    }
  for (int s = 0; s < l.num_states; ++s)
    fb.log_z_forward = LogAdd(fb.log_z_forward, fb.alpha[s] + final_w[s]);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int s = *it;
    double b = final_w[s];
    for (int ai : out[s]) {
      const auto &a = l.arcs[ai];
      b = LogAdd(b, a.Weight(acoustic_scale) + fb.beta[a.to]);
    }
    fb.beta[s] = b;
  }
  fb.log_z_backward = fb.beta[0];
  if (fb.log_z_forward == kLogZero || !std::isfinite(fb.log_z_forward))
    Fail<NumericalError>("lattice total weight is not finite (logZ=", fb.log_z_forward, ")");
  const double z = fb.log_z_forward;
  fb.arc_posteriors.resize(l.arcs.size());
  for (std::size_t i = 0; i < l.arcs.size(); ++i) {
    const auto &a = l.arcs[i];
    fb.arc_posteriors[i] = std::exp(fb.alpha[a.from] + a.Weight(acoustic_scale) + fb.beta[a.to] - z);
  }
  for (const auto &[s, w] : l.finals) fb.final_posteriors.push_back(std::exp(fb.alpha[s] + w - z));
  return fb;
}

inline std::vector<double> ArcPosteriors(const Lattice &l, double acoustic_scale) {
  return ComputeForwardBackward(l, acoustic_scale).arc_posteriors;
}

struct PathPosterior {
  std::vector<int> arcs;
  Transcript labels;
  double log_weight = kLogZero;
  double log_posterior = kLogZero;
};

inline Transcript PathLabels(const Lattice &l, const std::vector<int> &arcs) {
  Transcript t;
  for (int ai : arcs)
    if (l.arcs[ai].label) t.push_back(*l.arcs[ai].label);
  return t;
}

// N highest-weight complete paths in decreasing order, found by best-first
// search guided by the exact best completion score of each state. With
// `unique_labels`, paths repeating an already emitted label sequence are
// skipped.
inline std::vector<PathPosterior> NBest(const Lattice &l, double acoustic_scale, std::size_t n,
                                        bool unique_labels = false) {
  const auto order = TopologicalOrder(l);
  const auto out = internal::OutArcs(l);
  const auto final_w = internal::FinalWeights(l);
  const auto final_count = internal::FinalCounts(l);
  const double log_z = ComputeForwardBackward(l, acoustic_scale).LogZ();

  std::vector<double> best_completion(l.num_states, kLogZero);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    double b = final_w[*it];
    for (int ai : out[*it])
      b = std::max(b, l.arcs[ai].Weight(acoustic_scale) + best_completion[l.arcs[ai].to]);
    best_completion[*it] = b;
  }

  struct Node {
    int state;
    int arc;     // arc taken to reach this node, -1 at the root
    int parent;  // index into nodes
    double score;
  };
  struct Entry {
    double priority;
    std::uint64_t seq;
    int node;
    bool complete;
  };
  auto worse = [](const Entry &a, const Entry &b) {
    return a.priority != b.priority ? a.priority < b.priority : a.seq > b.seq;
  };
  std::vector<Node> nodes{{0, -1, -1, 0.0}};
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> queue(worse);
  std::uint64_t seq = 0;
  queue.push({best_completion[0], seq++, 0, false});

  std::vector<PathPosterior> result;
  std::set<std::vector<std::string>> emitted;
  while (!queue.empty() && result.size() < n) {
    const Entry e = queue.top();
    queue.pop();
    const Node node = nodes[e.node];
    if (e.complete) {
      PathPosterior p;
      for (int i = e.node; nodes[i].arc >= 0; i = nodes[i].parent) p.arcs.push_back(nodes[i].arc);
      std::reverse(p.arcs.begin(), p.arcs.end());
      p.labels = PathLabels(l, p.arcs);
      p.log_weight = e.priority;
      p.log_posterior = e.priority - log_z;
      if (unique_labels) {
        std::vector<std::string> key;
        for (const auto &s : p.labels) key.push_back(s.Text());
        if (!emitted.insert(key).second) continue;
      }
      result.push_back(std::move(p));
      continue;
    }
    if (final_count[node.state] > 0)
      queue.push({node.score + final_w[node.state], seq++, e.node, true});
    for (int ai : out[node.state]) {
      const auto &a = l.arcs[ai];
      const double g = node.score + a.Weight(acoustic_scale);
      nodes.push_back({a.to, ai, e.node, g});
      queue.push({g + best_completion[a.to], seq++, static_cast<int>(nodes.size()) - 1, false});
    }
  }
  return result;
}

inline PathPosterior BestPath(const Lattice &l, double acoustic_scale) {
  auto paths = NBest(l, acoustic_scale, 1);
  if (paths.empty()) Fail("lattice has no complete path");
  return std::move(paths.front());
}

// Posterior of the single best path.
inline double Confidence(const Lattice &l, double acoustic_scale) {
  return std::exp(BestPath(l, acoustic_scale).log_posterior);
}

// Number of complete paths (saturates at +inf for huge lattices).
inline double CountPaths(const Lattice &l) {
  const auto order = TopologicalOrder(l);
  const auto out = internal::OutArcs(l);
  const auto final_count = internal::FinalCounts(l);
  std::vector<double> n(l.num_states, 0.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    double c = final_count[*it];
    for (int ai : out[*it]) c += n[l.arcs[ai].to];
    n[*it] = c;
  }
  return n[0];
}

// Union of the inputs under a fresh start state; each branch carries
// lm = -log(count), so every system enters with prior 1/count. Inputs are
// not renormalised first; dividing each by its own log Z is the alternative.
inline Lattice Combine(const std::vector<Lattice> &lattices) {
  if (lattices.empty()) Fail("cannot combine an empty list of lattices");
  Lattice out;
  out.AddState();
  const double prior = -std::log(static_cast<double>(lattices.size()));
  for (const auto &l : lattices) {
    internal::CheckLatticeIds(l);
    const int offset = out.num_states;
    out.num_states += l.num_states;
    out.AddArc(0, offset, std::nullopt, 0.0, prior);
    for (const auto &a : l.arcs)
      out.AddArc(a.from + offset, a.to + offset, a.label, a.acoustic, a.lm);
    for (const auto &[s, w] : l.finals) out.SetFinal(s + offset, w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// MBR

struct MbrResult {
  Transcript hypothesis;
  double expected_risk = 0.0;
  double posterior = 0.0;            // of the chosen label sequence
  std::size_t num_candidates = 0;
  std::size_t num_paths = 0;         // paths used as evidence
  bool exhaustive = false;           // every lattice path was enumerated
};

inline std::vector<std::string> LabelKey(const Transcript &t) {
  std::vector<std::string> key;
  key.reserve(t.size());
  for (const auto &s : t) key.push_back(s.Text());
  return key;
}

// Expected tone-sensitive edit distance over the top `n_cap` paths (all
// paths when the lattice has no more). Ties on risk go to the higher
// posterior, then to the lexicographically smaller label sequence.
inline MbrResult MbrDecode(const Lattice &l, double acoustic_scale, std::size_t n_cap) {
  if (n_cap == 0) Fail<ConfigError>("MBR N-best cap must be positive");
  const auto paths = NBest(l, acoustic_scale, n_cap);
  if (paths.empty()) Fail("lattice has no complete path");
  MbrResult result;
  result.num_paths = paths.size();
  result.exhaustive = CountPaths(l) <= static_cast<double>(paths.size());

  std::map<std::vector<std::string>, std::pair<Transcript, double>> groups;
  KahanSum mass;
  for (const auto &p : paths) {
    const double post = std::exp(p.log_posterior);
    auto &g = groups[LabelKey(p.labels)];
    g.first = p.labels;
    g.second += post;
    mass.Add(post);
  }
  const double norm = result.exhaustive ? 1.0 : mass.Value();
  if (!(norm > 0.0)) Fail<NumericalError>("N-best paths carry no posterior mass");

  result.num_candidates = groups.size();
  bool have = false;
  for (const auto &[key, cand] : groups) {
    KahanSum risk;
    for (const auto &[k2, other] : groups)
      risk.Add(other.second / norm *
               static_cast<double>(EditDistance(cand.first, other.first, true)));
    const double r = risk.Value();
    const double post = cand.second / norm;
    bool take = !have;
    if (have) {
      const double tol = 1e-9 * std::max(1.0, std::abs(result.expected_risk));
      if (r < result.expected_risk - tol) {
        take = true;
      } else if (std::abs(r - result.expected_risk) <= tol) {
        const double ptol = 1e-12;
        if (post > result.posterior + ptol) take = true;
        // groups iterate in lexicographic key order, so an equal-posterior
        // later key never wins.
      }
    }
    if (take) {
      result.hypothesis = cand.first;
      result.expected_risk = r;
      result.posterior = post;
      have = true;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Text format: "from<TAB>to<TAB>label<TAB>acoustic<TAB>lm" per arc,
// "final<TAB>state<TAB>weight" per final state, '#' comments.

inline Lattice ReadLattice(std::istream &is, const std::string &name = "<stream>") {
  Lattice l;
  std::string line;
  std::size_t line_no = 0;
  int max_state = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view body = line;
    if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    if (Trim(body).empty()) continue;
    const auto f = SplitOn(Trim(body), '\t');
    auto bad = [&](const char *what) { Fail(name, ":", line_no, ": ", what); };
    if (f[0] == "final") {
      int s;
      double w = 0.0;
      if (f.size() != 3 || !ParseInt(f[1], &s) || s < 0 || !ParseDouble(f[2], &w))
        bad("malformed final-state line");
      l.SetFinal(s, w);
      max_state = std::max(max_state, s);
      continue;
    }
    if (f.size() != 5) bad("expected 5 tab-separated fields");
    LatticeArc a;
    if (!ParseInt(f[0], &a.from) || !ParseInt(f[1], &a.to) || a.from < 0 || a.to < 0)
      bad("bad state id");
    if (f[2] != kEpsilon) {
      try {
        a.label = ParseTonalSyllable(f[2]);
      } catch (const DataError &e) {
        Fail(name, ":", line_no, ": ", e.what());
      }
    }
    if (!ParseDouble(f[3], &a.acoustic) || !ParseDouble(f[4], &a.lm)) bad("bad score");
    max_state = std::max({max_state, a.from, a.to});
    l.arcs.push_back(std::move(a));
  }
  l.num_states = max_state + 1;
  if (l.finals.empty()) Fail(name, ": lattice has no final state");
  return l;
}

inline Lattice ReadLattice(const std::string &path) {
  std::ifstream is(path);
  if (!is) Fail("cannot open lattice '", path, "'");
  return ReadLattice(is, path);
}

inline void WriteLattice(const Lattice &l, std::ostream &os) {
  for (const auto &a : l.arcs)
    os << a.from << '\t' << a.to << '\t' << (a.label ? a.label->Text() : kEpsilon) << '\t'
       << ShortestDouble(a.acoustic) << '\t' << ShortestDouble(a.lm) << '\n';
  for (const auto &[s, w] : l.finals) os << "final\t" << s << '\t' << ShortestDouble(w) << '\n';
}

inline void WriteLattice(const Lattice &l, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail("cannot write lattice '", path, "'");
  WriteLattice(l, os);
}

}  // namespace tonalasr

#endif  // TONALASR_LATTICE_H_
