// tools/tonalasr.cc
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
// Command-line front end. Exit codes: 0 ok, 2 config, 3 data, 4 numerical.
//
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "tonalasr/tonalasr.h"

namespace fs = std::filesystem;
using namespace tonalasr;

namespace {

std::vector<double> ParseList(const std::string &s) {
  std::vector<double> out;
  for (const auto &f : SplitOn(s, ',')) {
    double x;
    if (!ParseDouble(Trim(f), &x)) Fail<ConfigError>("'", f, "' is not a number");
    out.push_back(x);
  }
  return out;
}

std::string FormatDb(double db) { return std::isinf(db) ? "inf" : FixedDouble(db, 2); }

void ValidateManifest(const std::string &path) {
  ManifestReadStats stats;
  const Manifest m = ReadManifest(path, &stats);
  std::size_t with_conf = 0, syllables = 0;
  for (const auto &r : m.Records()) {
    with_conf += r.confidence.has_value();
    syllables += r.transcript.size();
  }
  std::cout << "records\t" << m.Size() << "\nsyllables\t" << syllables
            << "\nwith_confidence\t" << with_conf << "\ndropped_tokens\t" << stats.dropped_tokens
            << "\n";
}

void AugmentLexiconCmd(const std::string &lexicon, const std::string &manifest,
                       const std::string &out) {
  const auto aug = AugmentLexicon(ReadLexicon(lexicon), ReadManifest(manifest).Transcripts());
  WriteLexicon(aug.lexicon, out);
  std::cout << "added\t" << aug.added.size() << "\nentries\t" << aug.lexicon.Size() << "\n";
}

void CleanseCmd(const std::string &manifest, double threshold, const std::string &out) {
  const Manifest m = ReadManifest(manifest);
  const Manifest kept = Cleanse(m, threshold);
  WriteManifest(kept, out);
  std::cout << "kept\t" << kept.Size() << "\ndropped\t" << m.Size() - kept.Size() << "\n";
}

void AugmentCmd(const std::string &manifest, const std::string &noise_dir, std::uint64_t seed,
                const std::string &factors, double snr_min, double snr_max, int jobs,
                const std::string &out) {
  const Manifest m = ReadManifest(manifest);
  const NoisePool pool = LoadNoisePool(noise_dir, 16000);
  const fs::path base = fs::path(manifest).parent_path();
  const AudioLoader load = [&](const ManifestRecord &r) {
    const fs::path p(r.audio_path);
    return Resample(ReadWav((p.is_absolute() ? p : base / p).string()), 16000);
  };
  SixFoldConfig cfg;
  cfg.speed_factors = ParseList(factors);
  cfg.snr_min_db = snr_min;
  cfg.snr_max_db = snr_max;
  cfg.seed = seed;
  cfg.jobs = jobs;
  const auto utts = SixFold(m, load, pool, cfg, "audio/");
  fs::create_directories(fs::path(out) / "audio");
  for (const auto &u : utts) WriteWav(u.audio, (fs::path(out) / u.record.audio_path).string());
  WriteManifest(ToManifest(utts), (fs::path(out) / "manifest.tsv").string());
  std::cout << "records\t" << utts.size() << "\n";
}

void LmTrainCmd(int order, const std::string &smoothing, const std::string &text,
                const std::string &out) {
  const auto model = TrainLm(ReadTextCorpus(text), order, ParseSmoothing(smoothing));
  WriteArpa(model, out);
  for (const auto &w : model.Warnings()) std::cerr << "warning: " << w << "\n";
  std::cout << "order\t" << order << "\nsmoothing\t" << SmoothingName(ParseSmoothing(smoothing))
            << "\n";
}

void LmPplCmd(const std::string &model, const std::string &text) {
  const auto r = EvaluatePerplexity(ReadArpa(model), ReadTextCorpus(text));
  std::cout << "ppl\t" << FixedDouble(r.perplexity, 2) << "\ntokens\t" << r.num_tokens
            << "\noov\t" << r.num_oov << "\n";
}

void ScoreSerCmd(const std::string &ref, const std::string &hyp, bool ignore_tones) {
  const auto refs = ReadTranscriptTable(ref);
  std::map<std::string, Transcript> hyps;
  for (auto &[id, t] : ReadTranscriptTable(hyp))
    if (!hyps.emplace(id, t).second) Fail("duplicate hypothesis id '", id, "'");
  EditStats total;
  for (const auto &[id, r] : refs) {
    auto it = hyps.find(id);
    if (it == hyps.end()) Fail("no hypothesis for utterance '", id, "'");
    total += ComputeEditStats(r, it->second, !ignore_tones);
  }
  if (total.ref_len == 0) Fail("reference set has no syllables");
  std::cout << "SER\t" << FixedDouble(100.0 * total.Rate(), 2) << "%\nS\t" << total.substitutions
            << "\nD\t" << total.deletions << "\nI\t" << total.insertions << "\nN\t"
            << total.ref_len << "\n";
}

void ScoreSiSnrCmd(const std::string &ref, const std::string &est) {
  std::cout << "SI-SNR\t" << FormatDb(SiSnr(ReadWav(ref), ReadWav(est)).value_db) << " dB\n";
}

void LatCombineCmd(const std::vector<std::string> &inputs, const std::string &out) {
  std::vector<Lattice> lats;
  for (const auto &p : inputs) lats.push_back(ReadLattice(p));
  WriteLattice(Combine(lats), out);
  std::cout << "combined\t" << lats.size() << "\n";
}

void LatMbrCmd(const std::string &lattice, double scale, std::size_t nbest) {
  const auto r = MbrDecode(ReadLattice(lattice), scale, nbest);
  std::cout << "hypothesis\t" << FormatTranscript(r.hypothesis) << "\nexpected_risk\t"
            << FixedDouble(r.expected_risk, 4) << "\nposterior\t" << FixedDouble(r.posterior, 4)
            << "\ncandidates\t" << r.num_candidates << "\npaths\t" << r.num_paths
            << "\nexhaustive\t" << (r.exhaustive ? "yes" : "no") << "\n";
}

void LatConfidenceCmd(const std::string &lattice, double scale) {
  const Lattice l = ReadLattice(lattice);
  const auto best = BestPath(l, scale);
  std::cout << "best\t" << FormatTranscript(best.labels) << "\nconfidence\t"
            << FixedDouble(std::exp(best.log_posterior), 4) << "\n";
}

void LfMmiCheckCmd(int frames, int phones, std::uint64_t seed, int instances) {
  double worst = 0.0;
  for (int i = 0; i < instances; ++i)
    worst = std::max(worst, MaxGradientRelativeError(
                                RandomLfMmiInstance(frames, phones, StreamSeed(seed, std::to_string(i)))));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", worst);
  std::cout << "max_relative_error\t" << buf << "\n";
  if (!(worst <= 1e-4)) Fail<NumericalError>("gradient check failed: ", buf, " > 1e-4");
}

void LfMmiToyTrainCmd(int steps, double lr, double scale, std::uint64_t seed, int jobs) {
  LfMmiConfig cfg;
  cfg.acoustic_scale = scale;
  const auto data = MakeToyLfMmiData(seed);
  const auto r = ToyTrain(data.train, data.phones.Size(), cfg, steps, lr, jobs);
  std::cout << "step,objective\n";
  for (std::size_t i = 0; i < r.objective_trace.size(); ++i)
    std::cout << i << "," << FixedDouble(r.objective_trace[i], 6) << "\n";
  std::vector<std::pair<Transcript, Transcript>> pairs;
  for (const auto &u : data.heldout)
    pairs.emplace_back(u.transcript, ToyDecode(r.model, r.den, u, data.phones, scale));
  std::cerr << "heldout tonal SER " << FixedDouble(100.0 * CorpusSer(pairs, true), 2) << "%\n";
}

void RunExperimentCmd(const std::string &config, int jobs) {
  const Report report = RunExperiment(ReadExperimentConfig(config), jobs);
  std::cout << report.Table();
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Tonal-syllable ASR toolkit"};
  app.require_subcommand(1);
  std::string manifest, lexicon, out, noise_dir, text, model, ref, hyp, est, lattice, config;
  std::string smoothing = "kn", factors = "0.9,1.0,1.1";
  std::vector<std::string> inputs;
  double threshold = 0.5, snr_min = -5.0, snr_max = 15.0, scale = 1.0, lr = 0.1;
  std::uint64_t seed = 17;
  int order = 3, jobs = 1, frames = 5, phones = 3, instances = 1, steps = 200;
  std::size_t nbest = 200;
  bool ignore_tones = false;

  auto *validate = app.add_subcommand("validate-manifest", "Parse and check a manifest");
  validate->add_option("--manifest", manifest, "Manifest TSV")->required();

  auto *auglex = app.add_subcommand("augment-lexicon", "Add missing transcript syllables via G2P");
  auglex->add_option("--lexicon", lexicon, "Input lexicon")->required();
  auglex->add_option("--manifest", manifest, "Manifest supplying transcripts")->required();
  auglex->add_option("--out", out, "Output lexicon")->required();

  auto *cleanse = app.add_subcommand("cleanse", "Keep utterances with confidence >= threshold");
  cleanse->add_option("--manifest", manifest, "Input manifest")->required();
  cleanse->add_option("--threshold", threshold, "Confidence threshold in [0,1]");
  cleanse->add_option("--out", out, "Output manifest")->required();

  auto *augment = app.add_subcommand("augment", "Six-fold speed and noise augmentation");
  augment->add_option("--manifest", manifest, "Input manifest")->required();
  augment->add_option("--noise-dir", noise_dir, "Directory of noise .wav files")->required();
  augment->add_option("--seed", seed, "Random seed");
  augment->add_option("--factors", factors, "Comma-separated speed factors");
  augment->add_option("--snr-min", snr_min, "Lowest SNR in dB");
  augment->add_option("--snr-max", snr_max, "Highest SNR in dB");
  augment->add_option("--jobs", jobs, "Worker threads");
  augment->add_option("--out", out, "Output directory")->required();

  auto *lmtrain = app.add_subcommand("lm-train", "Train a backoff n-gram and write ARPA");
  lmtrain->add_option("--order", order, "N-gram order (1-4)");
  lmtrain->add_option("--smoothing", smoothing, "gt or kn");
  lmtrain->add_option("--text", text, "Training text, one sentence per line")->required();
  lmtrain->add_option("--out", out, "Output ARPA file")->required();

  auto *lmppl = app.add_subcommand("lm-ppl", "Held-out perplexity of an ARPA model");
  lmppl->add_option("--model", model, "ARPA file")->required();
  lmppl->add_option("--text", text, "Held-out text")->required();

  auto *ser = app.add_subcommand("score-ser", "Syllable error rate");
  ser->add_option("--ref", ref, "Reference table (id<TAB>syllables) or manifest")->required();
  ser->add_option("--hyp", hyp, "Hypothesis table (id<TAB>syllables) or manifest")->required();
  ser->add_flag("--ignore-tones", ignore_tones, "Compare bases only");

  auto *sisnr = app.add_subcommand("score-sisnr", "Scale-invariant SNR of two wavs");
  sisnr->add_option("--ref", ref, "Reference wav")->required();
  sisnr->add_option("--est", est, "Estimate wav")->required();

  auto *combine = app.add_subcommand("lat-combine", "Union of lattices under equal priors");
  combine->add_option("inputs", inputs, "Input lattices")->required();
  combine->add_option("-o,--out", out, "Output lattice")->required();

  auto *mbr = app.add_subcommand("lat-mbr", "Minimum-risk decoding of a lattice");
  mbr->add_option("lattice", lattice, "Input lattice")->required();
  mbr->add_option("--scale", scale, "Acoustic scale");
  mbr->add_option("--nbest", nbest, "N-best cap on the evidence space");

  auto *conf = app.add_subcommand("lat-confidence", "Best path and its posterior");
  conf->add_option("lattice", lattice, "Input lattice")->required();
  conf->add_option("--scale", scale, "Acoustic scale");

  auto *check = app.add_subcommand("lfmmi-check", "Finite-difference check of the gradient");
  check->add_option("--frames", frames, "Frames T");
  check->add_option("--phones", phones, "Phones P");
  check->add_option("--seed", seed, "Random seed");
  check->add_option("--instances", instances, "Random instances to check");

  auto *toy = app.add_subcommand("lfmmi-toy-train", "Toy training; objective trace as CSV");
  toy->add_option("--steps", steps, "Gradient steps");
  toy->add_option("--lr", lr, "Learning rate");
  toy->add_option("--scale", scale, "Acoustic scale k");
  toy->add_option("--seed", seed, "Random seed");
  toy->add_option("--jobs", jobs, "Worker threads");

  auto *synth = app.add_subcommand("make-synthetic", "Write the synthetic experiment corpus");
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("--seed", seed, "Random seed");

  auto *run = app.add_subcommand("run-experiment", "Run the full pipeline from a config");
  run->add_option("--config", config, "key=value config file")->required();
  run->add_option("--jobs", jobs, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) ValidateManifest(manifest);
    else if (*auglex) AugmentLexiconCmd(lexicon, manifest, out);
    else if (*cleanse) CleanseCmd(manifest, threshold, out);
    else if (*augment) AugmentCmd(manifest, noise_dir, seed, factors, snr_min, snr_max, jobs, out);
    else if (*lmtrain) LmTrainCmd(order, smoothing, text, out);
    else if (*lmppl) LmPplCmd(model, text);
    else if (*ser) ScoreSerCmd(ref, hyp, ignore_tones);
    else if (*sisnr) ScoreSiSnrCmd(ref, est);
    else if (*combine) LatCombineCmd(inputs, out);
    else if (*mbr) LatMbrCmd(lattice, scale, nbest);
    else if (*conf) LatConfidenceCmd(lattice, scale);
    else if (*check) LfMmiCheckCmd(frames, phones, seed, instances);
    else if (*toy) LfMmiToyTrainCmd(steps, lr, scale, seed, jobs);
    else if (*synth) {
      SyntheticCorpusOptions opts;
      opts.seed = seed;
      MakeSyntheticCorpus(out, opts);
    } else if (*run) RunExperimentCmd(config, jobs);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.ExitCode();
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
