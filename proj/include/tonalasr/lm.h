// tonalasr/lm.h
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
// Backoff n-gram language models of order 1..4.
//
// Two estimators are provided. Good-Turing uses Katz backoff with counts
// above k=5 left undiscounted and counts-of-counts smoothed by a log-log
// linear fit. Kneser-Ney is the interpolated form with a single discount
// D = n1 / (n1 + 2 n2) per order and continuation counts below the top
// order; it is stored in backoff form, so both estimators share one
// evaluator and the ARPA writer.
//
// Vocabulary is closed over the training text. "<unk>" gets a unigram floor
// of 1e-7 / V and every other unigram is scaled by (1 - 1e-7 / V), where V
// counts the predictable types ("</s>" and "<unk>" included, "<s>" not).
// Probabilities are log10 throughout.
//
#ifndef TONALASR_LM_H_
#define TONALASR_LM_H_

#include <fstream>
#include <map>
#include <optional>
#include <set>

#include "tonalasr/corpus.h"

namespace tonalasr {

inline const std::string kBos = "<s>";
inline const std::string kEos = "</s>";
inline const std::string kUnk = "<unk>";

using NGram = std::vector<std::string>;
using Sentence = std::vector<std::string>;

inline constexpr int kMaxLmOrder = 4;
inline constexpr double kArpaLogZero = -99.0;

inline std::vector<Sentence> ToSentences(const std::vector<Transcript> &transcripts) {
  std::vector<Sentence> out;
  out.reserve(transcripts.size());
  for (const auto &t : transcripts) {
    Sentence s;
    for (const auto &syl : t) s.push_back(syl.Text());
    out.push_back(std::move(s));
  }
  return out;
}

// One whitespace-tokenized sentence per non-empty line.
inline std::vector<Sentence> ReadTextCorpus(const std::string &path) {
  std::ifstream is(path);
  if (!is) Fail("cannot open text corpus '", path, "'");
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(is, line)) {
    auto toks = SplitWhitespace(line);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Counting

using CountsOfCounts = std::map<std::uint64_t, std::uint64_t>;

struct CountTable {
  int order = 0;
  std::vector<std::map<NGram, std::uint64_t>> counts;  // [n-1]: n-gram -> count
  std::vector<CountsOfCounts> counts_of_counts;        // [n-1]: r -> n_r

  bool Empty() const { return counts.empty() || counts[0].empty(); }
};

inline CountsOfCounts ComputeCountsOfCounts(const std::map<NGram, std::uint64_t> &table) {
  CountsOfCounts nr;
  for (const auto &[g, c] : table) ++nr[c];
  return nr;
}

// Each sentence is padded as "<s> w1 .. wn </s>" and every window of length
// 1..order is counted.
inline CountTable CountNGrams(const std::vector<Sentence> &sentences, int order) {
  if (order < 1 || order > kMaxLmOrder)
    Fail<ConfigError>("n-gram order ", order, " outside 1..", kMaxLmOrder);
  CountTable table;
  table.order = order;
  table.counts.resize(order);
  for (const auto &s : sentences) {
    Sentence padded;
    padded.reserve(s.size() + 2);
    padded.push_back(kBos);
    padded.insert(padded.end(), s.begin(), s.end());
    padded.push_back(kEos);
    for (std::size_t i = 0; i < padded.size(); ++i)
      for (int n = 1; n <= order && i + n <= padded.size(); ++n)
        ++table.counts[n - 1][NGram(padded.begin() + i, padded.begin() + i + n)];
  }
  for (const auto &t : table.counts) table.counts_of_counts.push_back(ComputeCountsOfCounts(t));
  return table;
}

inline CountTable CountNGrams(const std::vector<Transcript> &transcripts, int order) {
  return CountNGrams(ToSentences(transcripts), order);
}

// ---------------------------------------------------------------------------
// Model

struct NGramEntry {
  double log10_prob = 0.0;
  std::optional<double> log10_backoff;
};

class NGramModel {
 public:
  NGramModel() = default;
  explicit NGramModel(int order) : order_(order), grams_(order) {
    if (order < 1 || order > kMaxLmOrder)
      Fail<ConfigError>("n-gram order ", order, " outside 1..", kMaxLmOrder);
  }

  int Order() const { return order_; }

  void Set(const NGram &g, NGramEntry e) {
    if (g.empty() || static_cast<int>(g.size()) > order_)
      Fail<Error>("n-gram of length ", g.size(), " does not fit an order-", order_, " model");
    grams_[g.size() - 1][g] = e;
  }

  void SetBackoff(const NGram &context, double log10_bow) {
    auto &table = grams_.at(context.size() - 1);
    auto it = table.find(context);
    if (it == table.end())
      Fail<Error>("backoff weight for context not stored as an n-gram");
    it->second.log10_backoff = log10_bow;
  }

  const NGramEntry *Find(const NGram &g) const {
    if (g.empty() || static_cast<int>(g.size()) > order_) return nullptr;
    const auto &table = grams_[g.size() - 1];
    auto it = table.find(g);
    return it == table.end() ? nullptr : &it->second;
  }

  const std::map<NGram, NGramEntry> &Table(int n) const { return grams_.at(n - 1); }

  bool InVocabulary(const std::string &w) const { return Find(NGram{w}) != nullptr; }

  // Every unigram except "<s>", i.e. the words the model can predict.
  std::vector<std::string> PredictableVocabulary() const {
    std::vector<std::string> v;
    for (const auto &[g, e] : grams_[0])
      if (g[0] != kBos) v.push_back(g[0]);
    return v;
  }

  // log10 p(word | context) by longest-match backoff. Unknown words map to
  // "<unk>"; the context is truncated to the last order-1 tokens.
  double LogProb(const NGram &context, const std::string &word) const {
    const std::string &w = InVocabulary(word) ? word : kUnk;
    const std::size_t keep = std::min<std::size_t>(context.size(), order_ - 1);
    NGram ctx(context.end() - keep, context.end());
    for (auto &t : ctx)
      if (!InVocabulary(t)) t = kUnk;
    double acc = 0.0;
    for (std::size_t start = 0; start <= ctx.size(); ++start) {
      NGram g(ctx.begin() + start, ctx.end());
      g.push_back(w);
      if (const NGramEntry *e = Find(g)) return acc + e->log10_prob;
      if (start < ctx.size()) {
        const NGram h(ctx.begin() + start, ctx.end());
        if (const NGramEntry *he = Find(h); he && he->log10_backoff)
          acc += *he->log10_backoff;
      }
    }
    return kLogZero;
  }

  std::vector<std::string> &Warnings() { return warnings_; }
  const std::vector<std::string> &Warnings() const { return warnings_; }

 private:
  int order_ = 0;
  std::vector<std::map<NGram, NGramEntry>> grams_;
  std::vector<std::string> warnings_;
};

inline double ClampLog10(double x) {
  return (std::isnan(x) || x < kArpaLogZero) ? kArpaLogZero : x;
}

namespace internal {

// Words other than "<s>" and the unigram mass scale after the "<unk>" floor.
struct UnigramSetup {
  std::vector<std::string> words;
  double unk_prob = 0.0;
  double scale = 1.0;
};

inline UnigramSetup SetupUnigrams(const std::map<NGram, std::uint64_t> &unigrams) {
  UnigramSetup s;
  for (const auto &[g, c] : unigrams)
    if (g[0] != kBos) s.words.push_back(g[0]);
  const bool has_unk = std::find(s.words.begin(), s.words.end(), kUnk) != s.words.end();
  if (!has_unk) {
    const double V = static_cast<double>(s.words.size() + 1);
    s.unk_prob = 1e-7 / V;
    s.scale = 1.0 - s.unk_prob;
  }
  return s;
}

inline void StoreUnigrams(NGramModel *model, const UnigramSetup &setup,
                          const std::map<std::string, double> &q) {
  model->Set({kBos}, {kArpaLogZero, std::nullopt});
  for (const auto &[w, p] : q) model->Set({w}, {std::log10(setup.scale * p), std::nullopt});
  if (setup.unk_prob > 0.0) model->Set({kUnk}, {std::log10(setup.unk_prob), std::nullopt});
}

// Groups order-n counts by their (n-1)-token context.
inline std::map<NGram, std::vector<std::pair<std::string, double>>> GroupByContext(
    const std::map<NGram, double> &counts) {
  std::map<NGram, std::vector<std::pair<std::string, double>>> out;
  for (const auto &[g, c] : counts) out[NGram(g.begin(), g.end() - 1)].emplace_back(g.back(), c);
  return out;
}

// Backoff weight making context `h` normalize, given the explicit
// probabilities of its followers.
inline double KatzBackoff(const NGramModel &model, const NGram &h,
                          const std::vector<std::pair<std::string, double>> &explicit_probs,
                          std::vector<std::string> *warnings) {
  const NGram shorter(h.begin() + 1, h.end());
  KahanSum seen, seen_lower;
  for (const auto &[w, p] : explicit_probs) {
    seen.Add(p);
    seen_lower.Add(std::pow(10.0, model.LogProb(shorter, w)));
  }
  const double num = 1.0 - seen.Value();
  const double den = 1.0 - seen_lower.Value();
  if (num <= 0.0) return kArpaLogZero;
  if (den <= 0.0) {
    warnings->push_back("backoff denominator underflow for a context; weight clamped");
    return kArpaLogZero;
  }
  return ClampLog10(std::log10(num / den));
}

}  // namespace internal

// ---------------------------------------------------------------------------
// Good-Turing / Katz

inline constexpr std::uint64_t kGoodTuringMaxCount = 5;

// r* = (r+1) n_{r+1} / n_r from raw counts-of-counts.
inline double GoodTuringDiscountedCount(std::uint64_t r, const CountsOfCounts &nr) {
  auto get = [&](std::uint64_t k) {
    auto it = nr.find(k);
    return it == nr.end() ? 0.0 : static_cast<double>(it->second);
  };
  const double n_r = get(r);
  if (n_r == 0.0) Fail<NumericalError>("n_", r, " is zero");
  return static_cast<double>(r + 1) * get(r + 1) / n_r;
}

// Least-squares line through (log r, log n_r) over r with n_r > 0.
struct LogLinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  bool ok = false;

  double Smoothed(double r) const { return std::exp(intercept + slope * std::log(r)); }
};

inline LogLinearFit FitCountsOfCounts(const CountsOfCounts &nr) {
  LogLinearFit fit;
  if (nr.size() < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(nr.size());
  for (const auto &[r, c] : nr) {
    const double x = std::log(static_cast<double>(r)), y = std::log(static_cast<double>(c));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) return fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.ok = true;
  return fit;
}

// Per-count discount ratios d_r = r*/r for r <= k; 1 above.
struct GoodTuringDiscounts {
  std::vector<double> ratio;   // index r, 1..k
  bool absolute = false;       // fallback: c -> c - D
  double absolute_discount = 0.0;

  double Discounted(double c) const {
    if (absolute) return c - absolute_discount;
    const auto r = static_cast<std::uint64_t>(c);
    return (r >= 1 && r <= kGoodTuringMaxCount) ? ratio[r] * c : c;
  }
};

inline double AbsoluteDiscountFor(const CountsOfCounts &nr) {
  auto get = [&](std::uint64_t k) {
    auto it = nr.find(k);
    return it == nr.end() ? 0.0 : static_cast<double>(it->second);
  };
  const double n1 = get(1), n2 = get(2);
  if (n1 > 0.0 && n2 > 0.0) return n1 / (n1 + 2.0 * n2);
  return 0.5;
}

inline GoodTuringDiscounts ComputeGoodTuringDiscounts(const CountsOfCounts &nr, int order,
                                                      std::vector<std::string> *warnings) {
  GoodTuringDiscounts d;
  d.ratio.assign(kGoodTuringMaxCount + 1, 1.0);
  // Nothing to discount when every count is above k.
  if (nr.empty() || nr.begin()->first > kGoodTuringMaxCount) return d;
  const LogLinearFit fit = FitCountsOfCounts(nr);
  bool valid = fit.ok && nr.count(1) > 0;
  if (valid) {
    for (std::uint64_t r = 1; r <= kGoodTuringMaxCount; ++r) {
      const double rstar = (r + 1) * fit.Smoothed(r + 1.0) / fit.Smoothed(static_cast<double>(r));
      d.ratio[r] = rstar / static_cast<double>(r);
      if (!(d.ratio[r] > 0.0 && d.ratio[r] <= 1.0)) valid = false;
    }
  }
  if (!valid) {
    d.absolute = true;
    d.absolute_discount = AbsoluteDiscountFor(nr);
    warnings->push_back("order " + std::to_string(order) +
                        ": degenerate counts-of-counts, using absolute discounting D=" +
                        ShortestDouble(d.absolute_discount));
  }
  return d;
}

inline NGramModel GoodTuringEstimate(const CountTable &counts) {
  if (counts.Empty()) Fail("cannot estimate a language model from an empty count table");
  NGramModel model(counts.order);
  auto *warnings = &model.Warnings();

  // Unigrams: discounted mass is spread evenly over the vocabulary.
  const auto setup = internal::SetupUnigrams(counts.counts[0]);
  {
    std::map<NGram, std::uint64_t> effective;
    for (const auto &[g, c] : counts.counts[0])
      if (g[0] != kBos) effective[g] = c;
    const auto disc = ComputeGoodTuringDiscounts(ComputeCountsOfCounts(effective), 1, warnings);
    KahanSum total, kept;
    for (const auto &[g, c] : effective) total.Add(static_cast<double>(c));
    for (const auto &[g, c] : effective) kept.Add(disc.Discounted(static_cast<double>(c)));
    const double N = total.Value();
    const double leftover = (N - kept.Value()) / N;
    std::map<std::string, double> q;
    for (const auto &[g, c] : effective)
      q[g[0]] = disc.Discounted(static_cast<double>(c)) / N +
                leftover / static_cast<double>(effective.size());
    internal::StoreUnigrams(&model, setup, q);
  }

  for (int n = 2; n <= counts.order; ++n) {
    const auto &table = counts.counts[n - 1];
    const auto disc = ComputeGoodTuringDiscounts(counts.counts_of_counts[n - 1], n, warnings);
    std::map<NGram, double> as_double;
    for (const auto &[g, c] : table) as_double[g] = static_cast<double>(c);
    for (const auto &[h, followers] : internal::GroupByContext(as_double)) {
      KahanSum ctx_total;
      for (const auto &[w, c] : followers) ctx_total.Add(c);
      std::vector<std::pair<std::string, double>> probs;
      for (const auto &[w, c] : followers) {
        const double p = disc.Discounted(c) / ctx_total.Value();
        probs.emplace_back(w, p);
        NGram g = h;
        g.push_back(w);
        model.Set(g, {std::log10(p), std::nullopt});
      }
      model.SetBackoff(h, internal::KatzBackoff(model, h, probs, warnings));
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Interpolated Kneser-Ney

inline double KneserNeyDiscount(std::uint64_t n1, std::uint64_t n2) {
  if (n1 + 2 * n2 == 0) return 0.5;
  return static_cast<double>(n1) / static_cast<double>(n1 + 2 * n2);
}

// Counts used at order n of an order-N KN model: raw at the top order and
// for n-grams starting with "<s>"; otherwise the number of distinct left
// extensions found in the order n+1 table.
inline std::map<NGram, std::uint64_t> KneserNeyCounts(const CountTable &counts, int n) {
  if (n == counts.order) return counts.counts[n - 1];
  std::map<NGram, std::uint64_t> out;
  for (const auto &[g, c] : counts.counts[n - 1])
    if (g[0] == kBos) out[g] = c;
  for (const auto &[g, c] : counts.counts[n]) {
    const NGram tail(g.begin() + 1, g.end());
    if (tail[0] != kBos) ++out[tail];
  }
  return out;
}

inline NGramModel KneserNeyEstimate(const CountTable &counts) {
  if (counts.Empty()) Fail("cannot estimate a language model from an empty count table");
  NGramModel model(counts.order);
  auto &warnings = model.Warnings();

  auto discount_for = [&](const std::map<NGram, std::uint64_t> &mod, int n) {
    const auto nr = ComputeCountsOfCounts(mod);
    const auto n1 = nr.count(1) ? nr.at(1) : 0, n2 = nr.count(2) ? nr.at(2) : 0;
    double D = KneserNeyDiscount(n1, n2);
    if (n1 == 0 || n2 == 0) {
      D = std::clamp(D, 0.1, 0.9);
      warnings.push_back("order " + std::to_string(n) + ": n1 or n2 is zero, discount clamped to " +
                         ShortestDouble(D));
    }
    return D;
  };

  // Unigrams interpolate with the uniform distribution over seen words.
  const auto setup = internal::SetupUnigrams(counts.counts[0]);
  {
    std::map<NGram, std::uint64_t> mod;
    for (const auto &[g, c] : KneserNeyCounts(counts, 1))
      if (g[0] != kBos) mod[g] = c;
    const double D = discount_for(mod, 1);
    KahanSum total;
    for (const auto &[g, c] : mod) total.Add(static_cast<double>(c));
    const double C = total.Value();
    const double gamma = D * static_cast<double>(mod.size()) / C;
    std::map<std::string, double> q;
    for (const auto &w : setup.words) {
      auto it = mod.find(NGram{w});
      const double c = it == mod.end() ? 0.0 : static_cast<double>(it->second);
      q[w] = std::max(c - D, 0.0) / C + gamma / static_cast<double>(setup.words.size());
    }
    internal::StoreUnigrams(&model, setup, q);
  }

  for (int n = 2; n <= counts.order; ++n) {
    const auto mod = KneserNeyCounts(counts, n);
    const double D = discount_for(mod, n);
    std::map<NGram, double> as_double;
    for (const auto &[g, c] : mod) as_double[g] = static_cast<double>(c);
    for (const auto &[h, followers] : internal::GroupByContext(as_double)) {
      KahanSum ctx_total;
      for (const auto &[w, c] : followers) ctx_total.Add(c);
      const double total = ctx_total.Value();
      const double gamma = D * static_cast<double>(followers.size()) / total;
      const NGram shorter(h.begin() + 1, h.end());
      for (const auto &[w, c] : followers) {
        const double lower = std::pow(10.0, model.LogProb(shorter, w));
        const double p = std::max(c - D, 0.0) / total + gamma * lower;
        NGram g = h;
        g.push_back(w);
        model.Set(g, {std::log10(p), std::nullopt});
      }
      model.SetBackoff(h, ClampLog10(std::log10(gamma)));
    }
  }
  return model;
}

enum class Smoothing { kGoodTuring, kKneserNey };

inline Smoothing ParseSmoothing(std::string_view s) {
  if (s == "good-turing" || s == "gt") return Smoothing::kGoodTuring;
  if (s == "kneser-ney" || s == "kn") return Smoothing::kKneserNey;
  Fail<ConfigError>("unknown smoothing '", s, "' (expected gt, kn, good-turing or kneser-ney)");
}

inline std::string SmoothingName(Smoothing s) {
  return s == Smoothing::kGoodTuring ? "good-turing" : "kneser-ney";
}

inline NGramModel TrainLm(const std::vector<Sentence> &sentences, int order, Smoothing method) {
  const CountTable counts = CountNGrams(sentences, order);
  return method == Smoothing::kGoodTuring ? GoodTuringEstimate(counts)
                                          : KneserNeyEstimate(counts);
}

// ---------------------------------------------------------------------------
// Evaluation

struct PerplexityResult {
  double perplexity = 0.0;
  double total_log10 = 0.0;
  std::size_t num_tokens = 0;  // words plus one "</s>" per sentence
  std::size_t num_oov = 0;
};

inline PerplexityResult EvaluatePerplexity(const NGramModel &model,
                                           const std::vector<Sentence> &heldout) {
  if (heldout.empty()) Fail("perplexity needs a non-empty held-out set");
  PerplexityResult r;
  KahanSum total;
  for (const auto &s : heldout) {
    NGram ctx{kBos};
    for (std::size_t i = 0; i <= s.size(); ++i) {
      const std::string &w = i < s.size() ? s[i] : kEos;
      if (!model.InVocabulary(w)) ++r.num_oov;
      total.Add(model.LogProb(ctx, w));
      ++r.num_tokens;
      ctx.push_back(w);
    }
  }
  r.total_log10 = total.Value();
  r.perplexity = std::pow(10.0, -r.total_log10 / static_cast<double>(r.num_tokens));
  return r;
}

inline double Perplexity(const NGramModel &model, const std::vector<Sentence> &heldout) {
  return EvaluatePerplexity(model, heldout).perplexity;
}

// ---------------------------------------------------------------------------
// ARPA I/O

inline std::string FormatArpaLog(double x) {
  if (x <= kArpaLogZero || std::isnan(x)) return "-99";
  return FixedDouble(x, 6);
}

inline void WriteArpa(const NGramModel &model, std::ostream &os) {
  os << "\\data\\\n";
  for (int n = 1; n <= model.Order(); ++n)
    os << "ngram " << n << "=" << model.Table(n).size() << "\n";
  for (int n = 1; n <= model.Order(); ++n) {
    os << "\n\\" << n << "-grams:\n";
    for (const auto &[g, e] : model.Table(n)) {
      os << FormatArpaLog(e.log10_prob) << '\t';
      for (std::size_t i = 0; i < g.size(); ++i) os << (i ? " " : "") << g[i];
      if (e.log10_backoff) os << '\t' << FormatArpaLog(*e.log10_backoff);
      os << '\n';
    }
  }
  os << "\n\\end\\\n";
}

inline void WriteArpa(const NGramModel &model, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail("cannot write ARPA file '", path, "'");
  WriteArpa(model, os);
}

inline NGramModel ReadArpa(std::istream &is, const std::string &name = "<stream>") {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> bool {
    if (!std::getline(is, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  auto where = [&]() { return name + ":" + std::to_string(line_no) + ": "; };

  while (next() && Trim(line).empty()) {
  }
  if (Trim(line) != "\\data\\") Fail(where(), "expected \\data\\ header");
  std::vector<std::size_t> declared;
  while (next()) {
    const auto t = Trim(line);
    if (t.empty()) break;
    if (t.rfind("ngram ", 0) != 0) Fail(where(), "malformed ngram count line");
    const auto eq = t.find('=');
    int n;
    std::size_t count;
    if (eq == std::string_view::npos || !ParseInt(Trim(t.substr(6, eq - 6)), &n) ||
        !ParseInt(Trim(t.substr(eq + 1)), &count))
      Fail(where(), "malformed ngram count line");
    if (n != static_cast<int>(declared.size()) + 1) Fail(where(), "ngram orders out of sequence");
    declared.push_back(count);
  }
  if (declared.empty() || declared.size() > kMaxLmOrder)
    Fail(where(), "unsupported number of orders ", declared.size());
  NGramModel model(static_cast<int>(declared.size()));

  auto parse_log = [&](std::string_view s) {
    double v;
    if (!ParseDouble(s, &v)) Fail(where(), "bad log value '", s, "'");
    return v;
  };

  int current = 0;
  std::size_t seen = 0;
  auto close_section = [&]() {
    if (current > 0 && seen != declared[current - 1])
      Fail(where(), "order ", current, " declares ", declared[current - 1], " n-grams but has ",
           seen);
  };
  bool ended = false;
  while (next()) {
    const auto t = Trim(line);
    if (t.empty()) continue;
    if (t == "\\end\\") {
      close_section();
      ended = true;
      break;
    }
    if (t.front() == '\\') {
      close_section();
      int n;
      if (t.size() < 9 || t.substr(t.size() - 7) != "-grams:" ||
          !ParseInt(t.substr(1, t.size() - 8), &n) || n != current + 1 ||
          n > static_cast<int>(declared.size()))
        Fail(where(), "malformed section header '", t, "'");
      current = n;
      seen = 0;
      continue;
    }
    if (current == 0) Fail(where(), "n-gram entry outside a section");
    const auto fields = SplitWhitespace(t);
    const std::size_t n = static_cast<std::size_t>(current);
    if (fields.size() != n + 1 && fields.size() != n + 2)
      Fail(where(), "expected ", n + 1, " or ", n + 2, " fields, got ", fields.size());
    NGramEntry e;
    e.log10_prob = parse_log(fields[0]);
    if (fields.size() == n + 2) e.log10_backoff = parse_log(fields[n + 1]);
    const NGram g(fields.begin() + 1, fields.begin() + 1 + n);
    if (model.Find(g)) Fail(where(), "duplicate n-gram");
    model.Set(g, e);
    ++seen;
  }
  if (!ended) Fail(where(), "missing \\end\\ marker");
  if (current != static_cast<int>(declared.size()))
    Fail(where(), "declared ", declared.size(), " orders but found ", current);
  return model;
}

inline NGramModel ReadArpa(const std::string &path) {
  std::ifstream is(path);
  if (!is) Fail("cannot open ARPA file '", path, "'");
  return ReadArpa(is, path);
}

}  // namespace tonalasr

#endif  // TONALASR_LM_H_
