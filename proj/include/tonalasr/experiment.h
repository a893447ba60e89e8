// tonalasr/experiment.h
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
// Experiment driver: cleanse -> lexicon -> augment -> features -> LM ->
// decode/score -> toy LF-MMI, configured by a flat key=value file.
//
// Outputs under output_dir:
//   cleansed_manifest.tsv, lexicon.txt, augmented_manifest.tsv, audio/,
//   features/, lm.arpa, hyp_<system>.tsv, lfmmi_trace.csv,
//   report.tsv (key<TAB>value), report.txt (table), timings.tsv.
//
// Everything except timings.tsv is a function of the config alone.
//
#ifndef TONALASR_EXPERIMENT_H_
#define TONALASR_EXPERIMENT_H_

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>

#include "tonalasr/augment.h"
#include "tonalasr/features.h"
#include "tonalasr/lattice.h"
#include "tonalasr/lfmmi.h"
#include "tonalasr/lm.h"
#include "tonalasr/metrics.h"
#include "tonalasr/synthetic.h"

namespace tonalasr {

struct ExperimentConfig {
  std::string manifest;
  std::string lexicon;
  std::string noise_dir;
  std::string lm_train;
  std::string lm_heldout;
  std::string eval_ref;
  std::vector<std::string> lattice_dirs;
  std::string output_dir;
  std::uint64_t seed = 17;

  double cleanse_threshold = 0.5;
  std::vector<double> speed_factors = {0.9, 1.0, 1.1};
  double snr_min_db = -5.0;
  double snr_max_db = 15.0;
  SpecAugmentPolicy specaug;

  int lm_order = 3;
  Smoothing lm_smoothing = Smoothing::kKneserNey;

  double decode_scale = 1.0;
  std::size_t mbr_nbest = 200;

  int lfmmi_steps = 200;  // 0 skips the stage
  double lfmmi_lr = 0.1;
  LfMmiConfig lfmmi;

  void Validate() const {
    const std::pair<const char *, const std::string *> required[] = {
        {"manifest", &manifest},   {"lexicon", &lexicon},       {"noise_dir", &noise_dir},
        {"lm_train", &lm_train},   {"lm_heldout", &lm_heldout}, {"eval_ref", &eval_ref},
        {"output_dir", &output_dir}};
    for (const auto &[key, value] : required)
      if (value->empty()) Fail<ConfigError>("missing required key '", key, "'");
    if (lattice_dirs.empty()) Fail<ConfigError>("missing required key 'lattice_dirs'");
    if (!(cleanse_threshold >= 0.0 && cleanse_threshold <= 1.0))
      Fail<ConfigError>("cleanse_threshold ", cleanse_threshold, " outside [0,1]");
    if (speed_factors.empty()) Fail<ConfigError>("speed_factors is empty");
    for (double f : speed_factors)
      if (!(f >= 0.5 && f <= 2.0)) Fail<ConfigError>("speed factor ", f, " outside [0.5, 2.0]");
    if (!(snr_min_db <= snr_max_db)) Fail<ConfigError>("snr_min_db exceeds snr_max_db");
    if (specaug.num_time_masks < 0 || specaug.num_freq_masks < 0 ||
        specaug.max_time_width < 0 || specaug.max_freq_width < 0)
      Fail<ConfigError>("SpecAugment counts and widths must be non-negative");
    if (lm_order < 1 || lm_order > kMaxLmOrder)
      Fail<ConfigError>("lm_order ", lm_order, " outside 1..", kMaxLmOrder);
    if (!(decode_scale > 0.0)) Fail<ConfigError>("decode_scale must be positive");
    if (mbr_nbest == 0) Fail<ConfigError>("mbr_nbest must be positive");
    if (lfmmi_steps < 0) Fail<ConfigError>("lfmmi_steps must be non-negative");
    if (!(lfmmi_lr > 0.0)) Fail<ConfigError>("lfmmi_lr must be positive");
    lfmmi.Validate();
  }
};

namespace internal {

inline std::string ResolvePath(const std::filesystem::path &base, const std::string &p) {
  const std::filesystem::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal().string();
}

inline double ConfigDouble(const std::string &key, const std::string &v) {
  double x;
  if (!ParseDouble(v, &x) || !std::isfinite(x))
    Fail<ConfigError>("key '", key, "': '", v, "' is not a number");
  return x;
}

template <typename Int>
Int ConfigInt(const std::string &key, const std::string &v) {
  Int x;
  if (!ParseInt(v, &x)) Fail<ConfigError>("key '", key, "': '", v, "' is not an integer");
  return x;
}

}  // namespace internal

// `key = value` lines, '#' comments. Relative paths resolve against
// `base_dir`. Unknown and repeated keys are rejected.
inline ExperimentConfig ParseExperimentConfig(std::istream &is, const std::string &name,
                                              const std::filesystem::path &base_dir) {
  using internal::ConfigDouble;
  using internal::ConfigInt;
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (Trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) Fail<ConfigError>(name, ":", line_no, ": expected key = value");
    const std::string key(Trim(std::string_view(line).substr(0, eq)));
    const std::string v(Trim(std::string_view(line).substr(eq + 1)));
    if (!seen.insert(key).second) Fail<ConfigError>(name, ":", line_no, ": repeated key '", key, "'");
    auto path = [&] { return internal::ResolvePath(base_dir, v); };
    try {
      if (key == "manifest") cfg.manifest = path();
      else if (key == "lexicon") cfg.lexicon = path();
      else if (key == "noise_dir") cfg.noise_dir = path();
      else if (key == "lm_train") cfg.lm_train = path();
      else if (key == "lm_heldout") cfg.lm_heldout = path();
      else if (key == "eval_ref") cfg.eval_ref = path();
      else if (key == "output_dir") cfg.output_dir = path();
      else if (key == "lattice_dirs") {
        for (const auto &d : SplitOn(v, ','))
          if (!Trim(d).empty())
            cfg.lattice_dirs.push_back(internal::ResolvePath(base_dir, std::string(Trim(d))));
      } else if (key == "seed") cfg.seed = ConfigInt<std::uint64_t>(key, v);
      else if (key == "cleanse_threshold") cfg.cleanse_threshold = ConfigDouble(key, v);
      else if (key == "speed_factors") {
        cfg.speed_factors.clear();
        for (const auto &f : SplitOn(v, ','))
          cfg.speed_factors.push_back(ConfigDouble(key, std::string(Trim(f))));
      } else if (key == "snr_min_db") cfg.snr_min_db = ConfigDouble(key, v);
      else if (key == "snr_max_db") cfg.snr_max_db = ConfigDouble(key, v);
      else if (key == "specaug_time_masks") cfg.specaug.num_time_masks = ConfigInt<int>(key, v);
      else if (key == "specaug_max_time_width") cfg.specaug.max_time_width = ConfigInt<int>(key, v);
      else if (key == "specaug_freq_masks") cfg.specaug.num_freq_masks = ConfigInt<int>(key, v);
      else if (key == "specaug_max_freq_width") cfg.specaug.max_freq_width = ConfigInt<int>(key, v);
      else if (key == "specaug_fill") {
        if (v == "zero") cfg.specaug.fill = MaskFill::kZero;
        else if (v == "mean") cfg.specaug.fill = MaskFill::kUtteranceMean;
        else Fail<ConfigError>("specaug_fill must be 'zero' or 'mean', got '", v, "'");
      } else if (key == "lm_order") cfg.lm_order = ConfigInt<int>(key, v);
      else if (key == "lm_smoothing") cfg.lm_smoothing = ParseSmoothing(v);
      else if (key == "decode_scale") cfg.decode_scale = ConfigDouble(key, v);
      else if (key == "mbr_nbest") cfg.mbr_nbest = ConfigInt<std::size_t>(key, v);
      else if (key == "lfmmi_steps") cfg.lfmmi_steps = ConfigInt<int>(key, v);
      else if (key == "lfmmi_lr") cfg.lfmmi_lr = ConfigDouble(key, v);
      else if (key == "lfmmi_scale") cfg.lfmmi.acoustic_scale = ConfigDouble(key, v);
      else if (key == "lfmmi_den_order") cfg.lfmmi.den_order = ConfigInt<int>(key, v);
      else Fail<ConfigError>("unknown key '", key, "'");
    } catch (const Error &e) {
      Fail<ConfigError>(name, ":", line_no, ": ", e.what());
    }
  }
  cfg.Validate();
  return cfg;
}

inline ExperimentConfig ReadExperimentConfig(const std::string &path) {
  std::ifstream is(path);
  if (!is) Fail<ConfigError>("cannot open config '", path, "'");
  return ParseExperimentConfig(is, path, std::filesystem::path(path).parent_path());
}

// ---------------------------------------------------------------------------
// Report

class Report {
 public:
  void Set(const std::string &key, const std::string &value) {
    if (!index_.emplace(key, entries_.size()).second) Fail<Error>("report key '", key, "' set twice");
    entries_.emplace_back(key, value);
  }
  void Set(const std::string &key, double value, int decimals = 2) {
    Set(key, FixedDouble(value, decimals));
  }
  void Set(const std::string &key, std::size_t value) { Set(key, std::to_string(value)); }

  const std::string &Get(const std::string &key) const {
    auto it = index_.find(key);
    if (it == index_.end()) Fail<Error>("report has no key '", key, "'");
    return entries_[it->second].second;
  }
  bool Has(const std::string &key) const { return index_.count(key) > 0; }
  const std::vector<std::pair<std::string, std::string>> &Entries() const { return entries_; }

  std::string KeyValues() const {
    std::string out;
    for (const auto &[k, v] : entries_) out += k + "\t" + v + "\n";
    return out;
  }

  // Two columns, padded to the widest key.
  std::string Table() const {
    std::size_t kw = 3, vw = 5;
    for (const auto &[k, v] : entries_) {
      kw = std::max(kw, k.size());
      vw = std::max(vw, v.size());
    }
    const std::string rule = "+" + std::string(kw + 2, '-') + "+" + std::string(vw + 2, '-') + "+\n";
    auto row = [&](const std::string &k, const std::string &v) {
      return "| " + k + std::string(kw - k.size(), ' ') + " | " + std::string(vw - v.size(), ' ') +
             v + " |\n";
    };
    std::string out = rule + row("key", "value") + rule;
    for (const auto &[k, v] : entries_) out += row(k, v);
    return out + rule;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::size_t> index_;
};

namespace internal {

// Re-raises any failure with the stage name prefixed, keeping its kind.
template <typename F>
void RunStage(const std::string &stage, std::vector<std::pair<std::string, double>> *timings,
              F &&body) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body();
  } catch (const ConfigError &e) {
    throw ConfigError("stage '" + stage + "': " + e.what());
  } catch (const DataError &e) {
    throw DataError("stage '" + stage + "': " + e.what());
  } catch (const NumericalError &e) {
    throw NumericalError("stage '" + stage + "': " + e.what());
  } catch (const std::exception &e) {
    throw Error("stage '" + stage + "': " + e.what());
  }
  timings->emplace_back(
      stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

template <typename F>
void ParallelFor(std::size_t n, int jobs, F &&fn) {
  const std::size_t nj = static_cast<std::size_t>(std::max(1, jobs));
  if (nj == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(nj);
  for (std::size_t j = 0; j < nj; ++j)
    threads.emplace_back([&, j] {
      try {
        for (std::size_t i = j; i < n; i += nj) fn(i);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    });
  for (auto &t : threads) t.join();
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
}

inline void WriteText(const std::filesystem::path &p, const std::string &text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) Fail("cannot write '", p.string(), "'");
  os << text;
}

}  // namespace internal

inline std::string SmoothingKey(Smoothing s) { return s == Smoothing::kGoodTuring ? "gt" : "kn"; }

inline Report RunExperiment(const ExperimentConfig &cfg, int jobs = 1) {
  namespace fs = std::filesystem;
  using internal::RunStage;
  cfg.Validate();
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  Report report;
  std::vector<std::pair<std::string, double>> timings;

  // Cleanse.
  Manifest cleansed;
  RunStage("cleanse", &timings, [&] {
    ManifestReadStats stats;
    const Manifest m = ReadManifest(cfg.manifest, &stats);
    cleansed = Cleanse(m, cfg.cleanse_threshold);
    WriteManifest(cleansed, (out / "cleansed_manifest.tsv").string());
    report.Set("manifest_utterances", m.Size());
    report.Set("manifest_dropped_tokens", stats.dropped_tokens);
    report.Set("cleanse_threshold", cfg.cleanse_threshold);
    report.Set("cleanse_kept", cleansed.Size());
  });

  // Lexicon.
  RunStage("lexicon", &timings, [&] {
    const Lexicon lex = ReadLexicon(cfg.lexicon);
    const auto aug = AugmentLexicon(lex, cleansed.Transcripts());
    WriteLexicon(aug.lexicon, (out / "lexicon.txt").string());
    report.Set("lexicon_entries", lex.Size());
    report.Set("lexicon_added", aug.added.size());
  });

  // Six-fold augmentation.
  std::vector<AugmentedUtterance> augmented;
  RunStage("augment", &timings, [&] {
    const int rate = 16000;
    const NoisePool pool = LoadNoisePool(cfg.noise_dir, rate);
    const fs::path manifest_dir = fs::path(cfg.manifest).parent_path();
    const AudioLoader load = [&](const ManifestRecord &r) {
      return Resample(ReadWav(internal::ResolvePath(manifest_dir, r.audio_path)), rate);
    };
    SixFoldConfig sf;
    sf.speed_factors = cfg.speed_factors;
    sf.snr_min_db = cfg.snr_min_db;
    sf.snr_max_db = cfg.snr_max_db;
    sf.seed = StreamSeed(cfg.seed, "six-fold");
    sf.jobs = jobs;
    augmented = SixFold(cleansed, load, pool, sf, "audio/");
    fs::create_directories(out / "audio");
    internal::ParallelFor(augmented.size(), jobs, [&](std::size_t i) {
      WriteWav(augmented[i].audio, (out / augmented[i].record.audio_path).string());
    });
    WriteManifest(ToManifest(augmented), (out / "augmented_manifest.tsv").string());
    report.Set("augment_noise_clips", pool.Size());
    report.Set("augment_records", augmented.size());
  });

  // Log-mel features with SpecAugment.
  RunStage("features", &timings, [&] {
    fs::create_directories(out / "features");
    std::vector<std::size_t> frames(augmented.size()), masked(augmented.size());
    internal::ParallelFor(augmented.size(), jobs, [&](std::size_t i) {
      const auto &u = augmented[i];
      const FeatureMatrix f = LogMel(u.audio);
      Rng rng(StreamSeed(cfg.seed, u.record.utterance_id + "/specaugment"));
      const MaskPlan plan = PlanSpecAugment(f.NumFrames(), f.NumBins(), cfg.specaug, rng);
      WriteFeatures(ApplyMasks(f, plan, cfg.specaug.fill),
                    (out / "features" / (u.record.utterance_id + ".feats")).string());
      std::vector<char> t_mask(f.NumFrames(), 0), b_mask(f.NumBins(), 0);
      for (const auto &m : plan.time) std::fill_n(t_mask.begin() + m.start, m.width, 1);
      for (const auto &m : plan.freq) std::fill_n(b_mask.begin() + m.start, m.width, 1);
      const auto nt = static_cast<std::size_t>(std::count(t_mask.begin(), t_mask.end(), 1));
      const auto nb = static_cast<std::size_t>(std::count(b_mask.begin(), b_mask.end(), 1));
      frames[i] = f.NumFrames();
      masked[i] = nt * f.NumBins() + nb * f.NumFrames() - nt * nb;
    });
    std::size_t total_frames = 0, total_masked = 0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      total_frames += frames[i];
      total_masked += masked[i];
    }
    report.Set("features_utterances", augmented.size());
    report.Set("features_frames", total_frames);
    report.Set("specaugment_masked_cells", total_masked);
  });

  // SI-SNR of every noisy copy against its clean speed-perturbed source.
  RunStage("sisnr", &timings, [&] {
    KahanSum sum;
    double lo = kInfinity, hi = -kInfinity;
    std::size_t n = 0;
    for (std::size_t i = 0; i + 1 < augmented.size(); i += 2) {
      const double v = SiSnr(augmented[i].audio, augmented[i + 1].audio).value_db;
      sum.Add(v);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      ++n;
    }
    if (n == 0) Fail("no noisy copies to score");
    report.Set("sisnr_pairs", n);
    report.Set("sisnr_mean_db", sum.Value() / static_cast<double>(n));
    report.Set("sisnr_min_db", lo);
    report.Set("sisnr_max_db", hi);
  });

  // Language models.
  RunStage("lm", &timings, [&] {
    const auto train = ReadTextCorpus(cfg.lm_train);
    const auto heldout = ReadTextCorpus(cfg.lm_heldout);
    report.Set("lm_train_sentences", train.size());
    report.Set("lm_heldout_sentences", heldout.size());
    for (int n = 2; n <= std::max(cfg.lm_order, 2); ++n)
      for (Smoothing s : {Smoothing::kGoodTuring, Smoothing::kKneserNey})
        report.Set("lm_ppl_o" + std::to_string(n) + "_" + SmoothingKey(s),
                   Perplexity(TrainLm(train, n, s), heldout));
    const NGramModel primary = TrainLm(train, cfg.lm_order, cfg.lm_smoothing);
    WriteArpa(primary, (out / "lm.arpa").string());
    const auto ppl = EvaluatePerplexity(primary, heldout);
    report.Set("lm_primary", "o" + std::to_string(cfg.lm_order) + "_" + SmoothingKey(cfg.lm_smoothing));
    report.Set("lm_primary_ppl", ppl.perplexity);
    report.Set("lm_heldout_oov", ppl.num_oov);
  });

  // MBR decoding per system and on the combined lattices.
  RunStage("decode", &timings, [&] {
    const auto refs = ReadTranscriptTable(cfg.eval_ref);
    if (refs.empty()) Fail("evaluation reference set is empty");
    std::vector<std::string> names;
    for (const auto &d : cfg.lattice_dirs) names.push_back(fs::path(d).filename().string());
    std::vector<std::vector<Lattice>> lats(refs.size());
    for (std::size_t u = 0; u < refs.size(); ++u)
      for (const auto &d : cfg.lattice_dirs)
        lats[u].push_back(ReadLattice((fs::path(d) / (refs[u].first + ".lat")).string()));
    names.push_back("combined");
    report.Set("decode_utterances", refs.size());
    for (std::size_t s = 0; s < names.size(); ++s) {
      std::vector<std::pair<std::string, Transcript>> hyps(refs.size());
      internal::ParallelFor(refs.size(), jobs, [&](std::size_t u) {
        const Lattice l = s + 1 < names.size() ? lats[u][s] : Combine(lats[u]);
        hyps[u] = {refs[u].first, MbrDecode(l, cfg.decode_scale, cfg.mbr_nbest).hypothesis};
      });
      WriteTranscriptTable(hyps, (out / ("hyp_" + names[s] + ".tsv")).string());
      std::vector<std::pair<Transcript, Transcript>> pairs;
      for (std::size_t u = 0; u < refs.size(); ++u) pairs.emplace_back(refs[u].second, hyps[u].second);
      report.Set("ser_tonal_" + names[s], 100.0 * CorpusSer(pairs, true));
      report.Set("ser_toneless_" + names[s], 100.0 * CorpusSer(pairs, false));
    }
  });

  // Toy LF-MMI training on the synthetic separable set.
  if (cfg.lfmmi_steps > 0) {
    RunStage("lfmmi", &timings, [&] {
      const auto data = MakeToyLfMmiData(StreamSeed(cfg.seed, "lfmmi"));
      const auto r = ToyTrain(data.train, data.phones.Size(), cfg.lfmmi, cfg.lfmmi_steps,
                              cfg.lfmmi_lr, jobs);
      std::string csv = "step,objective\n";
      for (std::size_t i = 0; i < r.objective_trace.size(); ++i)
        csv += std::to_string(i) + "," + FixedDouble(r.objective_trace[i], 6) + "\n";
      internal::WriteText(out / "lfmmi_trace.csv", csv);
      std::vector<std::pair<Transcript, Transcript>> pairs;
      for (const auto &u : data.heldout)
        pairs.emplace_back(u.transcript, ToyDecode(r.model, r.den, u, data.phones,
                                                   cfg.lfmmi.acoustic_scale));
      report.Set("lfmmi_steps", static_cast<std::size_t>(cfg.lfmmi_steps));
      report.Set("lfmmi_objective_first", r.objective_trace.front(), 4);
      report.Set("lfmmi_objective_last", r.objective_trace.back(), 4);
      report.Set("lfmmi_heldout_ser_tonal", 100.0 * CorpusSer(pairs, true));
    });
  }

  internal::WriteText(out / "report.tsv", report.KeyValues());
  internal::WriteText(out / "report.txt", report.Table());
  std::string t;
  for (const auto &[stage, secs] : timings) t += stage + "\t" + FixedDouble(secs, 3) + "\n";
  internal::WriteText(out / "timings.tsv", t);
  return report;
}

}  // namespace tonalasr

#endif  // TONALASR_EXPERIMENT_H_
