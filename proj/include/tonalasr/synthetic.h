// tonalasr/synthetic.h
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
// Seeded synthetic data: tonal-syllable text from a Markov source, toy
// speech and noise, per-system decoding lattices, the toy LF-MMI dataset,
// and a complete experiment directory.
//
#ifndef TONALASR_SYNTHETIC_H_
#define TONALASR_SYNTHETIC_H_

#include <filesystem>

#include "tonalasr/augment.h"
#include "tonalasr/lattice.h"
#include "tonalasr/lfmmi.h"

namespace tonalasr {

// Base x tone product, in base-major order.
inline std::vector<TonalSyllable> SyllableInventory(const std::vector<std::string> &bases,
                                                    const std::vector<int> &tones) {
  std::vector<TonalSyllable> out;
  for (const auto &b : bases)
    for (int t : tones) out.emplace_back(b, t);
  return out;
}

inline std::vector<TonalSyllable> DefaultVocabulary() {
  return SyllableInventory({"a", "gu", "li", "tai", "siong"}, {1, 2, 3, 5});
}

// Sentences from a source whose next syllable depends on the previous
// `memory` syllables. Each context owns three favoured successors (drawn from
// a context-keyed stream) with weights 0.7/0.2/0.08; the rest is uniform.
inline std::vector<Transcript> MarkovSentences(const std::vector<TonalSyllable> &vocab,
                                               std::size_t num_sentences, std::uint64_t seed,
                                               int memory = 3, int min_len = 4,
                                               int max_len = 10) {
  if (vocab.empty()) Fail<ConfigError>("Markov source needs a vocabulary");
  if (memory < 0 || min_len < 1 || max_len < min_len)
    Fail<ConfigError>("bad Markov source shape");
  const auto v = static_cast<std::int64_t>(vocab.size());
  Rng rng(seed);
  std::vector<Transcript> out;
  out.reserve(num_sentences);
  for (std::size_t i = 0; i < num_sentences; ++i) {
    const auto len = rng.UniformInt(min_len, max_len);
    std::vector<std::int64_t> hist(static_cast<std::size_t>(memory), -1);
    Transcript t;
    for (std::int64_t j = 0; j < len; ++j) {
      std::string key;
      for (auto h : hist) key += std::to_string(h) + ",";
      Rng ctx(StreamSeed(seed ^ 0x6d61726b6f76ull, key));
      const std::int64_t fav[3] = {ctx.UniformInt(0, v - 1), ctx.UniformInt(0, v - 1),
                                   ctx.UniformInt(0, v - 1)};
      const double u = rng.Uniform();
      std::int64_t w;
      if (u < 0.7)
        w = fav[0];
      else if (u < 0.9)
        w = fav[1];
      else if (u < 0.98)
        w = fav[2];
      else
        w = rng.UniformInt(0, v - 1);
      t.push_back(vocab[static_cast<std::size_t>(w)]);
      if (memory > 0) {
        hist.erase(hist.begin());
        hist.push_back(w);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Toy speech

// f0 contour endpoints (Hz) per tone.
inline std::pair<double, double> ToneContour(int tone) {
  switch (tone) {
    case 1: return {230, 230};
    case 2: return {240, 160};
    case 3: return {150, 140};
    case 4: return {180, 180};
    case 5: return {160, 240};
    case 7: return {190, 190};
    case 8: return {210, 250};
    default: return {200, 200};
  }
}

// Harmonic tone per syllable, timbre keyed by the base, pitch by the tone;
// short low-level noise gaps between syllables.
inline Waveform SynthesizeSpeech(const Transcript &t, std::uint64_t seed,
                                 int sample_rate = 16000) {
  Rng rng(seed);
  Waveform w;
  w.sample_rate = sample_rate;
  const auto syl_len = static_cast<std::size_t>(0.16 * sample_rate);
  const auto gap_len = static_cast<std::size_t>(0.04 * sample_rate);
  auto gap = [&] {
    for (std::size_t i = 0; i < gap_len; ++i) w.samples.push_back(0.002 * rng.Gaussian());
  };
  gap();
  for (const auto &s : t) {
    Rng timbre(StreamSeed(0x74696d627265ull, s.Base()));
    double amps[4];
    for (double &a : amps) a = timbre.Uniform(0.2, 1.0);
    const auto [f_lo, f_hi] = ToneContour(s.Tone());
    double phase = 0.0;
    for (std::size_t i = 0; i < syl_len; ++i) {
      const double x = static_cast<double>(i) / syl_len;
      const double f0 = f_lo + (f_hi - f_lo) * x;
      phase += 2.0 * M_PI * f0 / sample_rate;
      double v = 0.0;
      for (int h = 0; h < 4; ++h) v += amps[h] * std::sin((h + 1) * phase);
      const double env = std::sin(M_PI * x);
      w.samples.push_back(0.12 * env * v + 0.002 * rng.Gaussian());
    }
    gap();
  }
  return w;
}

enum class NoiseKind { kWhite, kBabble, kHum };

inline Waveform SynthesizeNoise(NoiseKind kind, double seconds, int sample_rate,
                                std::uint64_t seed) {
  Rng rng(seed);
  Waveform w;
  w.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(seconds * sample_rate);
  w.samples.resize(n);
  if (kind == NoiseKind::kWhite) {
    for (auto &x : w.samples) x = 0.1 * rng.Gaussian();
  } else if (kind == NoiseKind::kBabble) {
    double f[6], ph[6];
    for (int k = 0; k < 6; ++k) {
      f[k] = rng.Uniform(120.0, 900.0);
      ph[k] = rng.Uniform(0.0, 2.0 * M_PI);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / sample_rate;
      double v = 0.0;
      for (int k = 0; k < 6; ++k)
        v += std::sin(2.0 * M_PI * f[k] * t + ph[k]) * (0.6 + 0.4 * std::sin(2.0 * M_PI * (k + 1) * 1.3 * t));
      w.samples[i] = 0.03 * v + 0.01 * rng.Gaussian();
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / sample_rate;
      w.samples[i] = 0.08 * std::sin(2.0 * M_PI * 60.0 * t) +
                     0.04 * std::sin(2.0 * M_PI * 180.0 * t) + 0.005 * rng.Gaussian();
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Decoding lattices

// Sausage-shaped lattice around `ref`. Each slot offers the reference, a
// tone confusion and a base confusion; some slots also allow a deletion.
// `accuracy` controls how often the reference carries the best score.
inline Lattice SyntheticLattice(const Transcript &ref, const std::vector<TonalSyllable> &vocab,
                                double accuracy, std::uint64_t seed) {
  if (ref.empty()) Fail("synthetic lattice needs a non-empty reference");
  Rng rng(seed);
  Lattice l;
  l.AddState();
  for (const auto &s : ref) {
    const int from = l.num_states - 1;
    const int to = l.AddState();
    int tone = s.Tone();
    while (tone == s.Tone()) tone = static_cast<int>(rng.UniformInt(1, 5));
    TonalSyllable tone_conf(s.Base(), tone);
    TonalSyllable base_conf = vocab[static_cast<std::size_t>(
        rng.UniformInt(0, static_cast<std::int64_t>(vocab.size()) - 1))];
    if (base_conf == s) base_conf = tone_conf;
    // Winner: 0 reference, 1 tone confusion, 2 base confusion. A losing
    // reference trails by a small margin, other losers by a wide one.
    const double u = rng.Uniform();
    const int winner = u < accuracy ? 0 : (u < accuracy + 0.6 * (1.0 - accuracy) ? 1 : 2);
    const double top = -rng.Uniform(1.0, 2.0);
    double ac[3];
    for (int c = 0; c < 3; ++c)
      ac[c] = c == winner ? top : top - (c == 0 ? rng.Uniform(0.1, 0.8) : rng.Uniform(1.0, 3.0));
    const double lm = -rng.Uniform(0.5, 1.0);
    l.AddArc(from, to, s, ac[0], lm);
    l.AddArc(from, to, tone_conf, ac[1], lm);
    l.AddArc(from, to, base_conf, ac[2], lm);
    if (rng.Uniform() < 0.2) l.AddArc(from, to, std::nullopt, top - rng.Uniform(2.0, 5.0), -2.0);
  }
  l.SetFinal(l.num_states - 1, 0.0);
  return l;
}

// ---------------------------------------------------------------------------
// Toy LF-MMI data: whole-phone frames with one-hot means plus Gaussian noise.

struct ToyLfMmiData {
  Lexicon lexicon;
  PhoneSet phones;
  std::vector<ToyUtterance> train;
  std::vector<ToyUtterance> heldout;
};

inline ToyUtterance MakeToyUtterance(const std::string &id, Transcript t, const Lexicon &lex,
                                     const PhoneSet &phones, double separation, double noise,
                                     Rng &rng) {
  ToyUtterance u;
  u.id = id;
  u.transcript = std::move(t);
  for (const auto &s : u.transcript)
    for (const auto &p : lex.Lookup(s)) u.phones.push_back(phones.Id(p));
  std::vector<int> frame_phone;
  for (int p : u.phones) {
    const auto dur = rng.UniformInt(2, 4);
    for (std::int64_t i = 0; i < dur; ++i) frame_phone.push_back(p);
  }
  const auto dim = static_cast<std::size_t>(phones.Size());
  u.features = Matrix(frame_phone.size(), dim);
  for (std::size_t f = 0; f < frame_phone.size(); ++f)
    for (std::size_t d = 0; d < dim; ++d)
      u.features(f, d) = (static_cast<int>(d) == frame_phone[f] ? separation : 0.0) +
                         noise * rng.Gaussian();
  return u;
}

inline ToyLfMmiData MakeToyLfMmiData(std::uint64_t seed, std::size_t num_train = 40,
                                     std::size_t num_heldout = 10, double separation = 3.0,
                                     double noise = 0.7) {
  ToyLfMmiData data;
  const auto vocab = SyllableInventory({"a", "ku", "ti", "sa"}, {1, 2, 3, 5});
  for (const auto &s : vocab) data.lexicon.Add(s, DefaultG2p(s));
  data.phones = PhoneSet(data.lexicon);
  Rng rng(seed);
  auto make = [&](const std::string &prefix, std::size_t n, std::vector<ToyUtterance> *out) {
    for (std::size_t i = 0; i < n; ++i) {
      Transcript t;
      const auto len = rng.UniformInt(2, 4);
      for (std::int64_t j = 0; j < len; ++j)
        t.push_back(vocab[static_cast<std::size_t>(
            rng.UniformInt(0, static_cast<std::int64_t>(vocab.size()) - 1))]);
      char id[32];
      std::snprintf(id, sizeof(id), "%s%03zu", prefix.c_str(), i);
      out->push_back(MakeToyUtterance(id, std::move(t), data.lexicon, data.phones, separation,
                                      noise, rng));
    }
  };
  make("toytrain", num_train, &data.train);
  make("toyheld", num_heldout, &data.heldout);
  return data;
}

// Reads base/tone phone pairs back into syllables; stray phones are dropped.
inline Transcript PhonesToTranscript(const std::vector<int> &tokens, const PhoneSet &phones) {
  Transcript t;
  auto is_tone = [&](int p) {
    const auto &s = phones.Symbol(p);
    return s.size() >= 2 && s[0] == 'T' && std::isdigit(static_cast<unsigned char>(s[1]));
  };
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (is_tone(tokens[i]) || !is_tone(tokens[i + 1])) continue;
    t.emplace_back(phones.Symbol(tokens[i]), std::stoi(phones.Symbol(tokens[i + 1]).substr(1)));
    ++i;
  }
  return t;
}

inline Transcript ToyDecode(const LinearEmissionModel &model, const Graph &den,
                            const ToyUtterance &u, const PhoneSet &phones, double k) {
  return PhonesToTranscript(ViterbiPhones(den, model.Scores(u.features), k), phones);
}

// ---------------------------------------------------------------------------
// Experiment directory

struct SyntheticCorpusOptions {
  std::uint64_t seed = 17;
  std::size_t num_utterances = 10;
  std::size_t num_eval = 8;
  std::size_t lm_sentences = 2000;  // split 90/10 into train/heldout
  std::vector<double> system_accuracy = {0.75, 0.7};
};

inline void WriteTranscriptTable(const std::vector<std::pair<std::string, Transcript>> &rows,
                                 const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail("cannot write '", path, "'");
  for (const auto &[id, t] : rows) os << id << '\t' << FormatTranscript(t) << '\n';
}

// "id<TAB>syllables" per line, or full manifest lines (the transcript is
// the fourth field). Foreign tokens are dropped.
inline std::vector<std::pair<std::string, Transcript>> ReadTranscriptTable(
    const std::string &path) {
  std::ifstream is(path);
  if (!is) Fail("cannot open transcript table '", path, "'");
  std::vector<std::pair<std::string, Transcript>> rows;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty() || Trim(line)[0] == '#') continue;
    const auto fields = SplitOn(line, '\t');
    if (fields.size() > 2 && fields.size() != 4)
      Fail(path, ":", line_no, ": expected 2 or 4 tab-separated fields, got ", fields.size());
    const std::string id(Trim(fields[0]));
    if (id.empty()) Fail(path, ":", line_no, ": empty utterance id");
    if (!ids.insert(id).second) Fail(path, ":", line_no, ": duplicate utterance id '", id, "'");
    try {
      const std::string text = fields.size() == 1 ? "" : fields.back();
      rows.emplace_back(id, ParseTranscript(text).transcript);
    } catch (const DataError &e) {
      Fail(path, ":", line_no, ": ", e.what());
    }
  }
  return rows;
}

inline void WriteSentences(const std::vector<Transcript> &ts, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail("cannot write '", path, "'");
  for (const auto &t : ts) os << FormatTranscript(t) << '\n';
}

// Populates `dir` with everything the bundled experiment config needs.
inline void MakeSyntheticCorpus(const std::string &dir, const SyntheticCorpusOptions &opts = {}) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  for (const char *sub : {"audio", "noise/white", "noise/babble", "noise/hum", "lm", "lattices"})
    fs::create_directories(root / sub);
  const auto vocab = DefaultVocabulary();

  const auto text = MarkovSentences(vocab, opts.lm_sentences, opts.seed);
  const std::size_t n_train = text.size() * 9 / 10;
  WriteSentences({text.begin(), text.begin() + static_cast<std::ptrdiff_t>(n_train)},
                 (root / "lm/train.txt").string());
  WriteSentences({text.begin() + static_cast<std::ptrdiff_t>(n_train), text.end()},
                 (root / "lm/heldout.txt").string());

  const auto utts = MarkovSentences(vocab, opts.num_utterances + opts.num_eval,
                                    StreamSeed(opts.seed, "utterances"), 3, 3, 6);
  Rng rng(StreamSeed(opts.seed, "manifest"));
  {
    std::ofstream os(root / "manifest.tsv", std::ios::binary);
    for (std::size_t i = 0; i < opts.num_utterances; ++i) {
      char id[16];
      std::snprintf(id, sizeof(id), "utt%02zu", i + 1);
      const std::string rel = std::string("audio/") + id + ".wav";
      WriteWav(SynthesizeSpeech(utts[i], StreamSeed(opts.seed, id)), (root / rel).string());
      std::string words = FormatTranscript(utts[i]);
      if (i == 2) words += " Google";  // code-switched token, dropped on read
      os << id << '\t' << rel << '\t' << FixedDouble(rng.Uniform(0.55, 0.99), 2) << '\t'
         << words << '\n';
    }
  }

  // Seed lexicon covers the first half of the inventory only.
  Lexicon lex;
  for (std::size_t i = 0; i < vocab.size() / 2; ++i) lex.Add(vocab[i], DefaultG2p(vocab[i]));
  WriteLexicon(lex, (root / "lexicon.txt").string());

  WriteWav(SynthesizeNoise(NoiseKind::kWhite, 1.5, 16000, StreamSeed(opts.seed, "white")),
           (root / "noise/white/white1.wav").string());
  WriteWav(SynthesizeNoise(NoiseKind::kBabble, 2.0, 16000, StreamSeed(opts.seed, "babble")),
           (root / "noise/babble/babble1.wav").string());
  WriteWav(SynthesizeNoise(NoiseKind::kHum, 1.0, 8000, StreamSeed(opts.seed, "hum")),
           (root / "noise/hum/hum1.wav").string());

  std::vector<std::pair<std::string, Transcript>> refs;
  for (std::size_t i = 0; i < opts.num_eval; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "eval%02zu", i + 1);
    refs.emplace_back(id, utts[opts.num_utterances + i]);
  }
  WriteTranscriptTable(refs, (root / "eval_ref.tsv").string());
  for (std::size_t s = 0; s < opts.system_accuracy.size(); ++s) {
    const std::string sys = "sys" + std::string(1, static_cast<char>('A' + s));
    fs::create_directories(root / "lattices" / sys);
    for (const auto &[id, ref] : refs)
      WriteLattice(SyntheticLattice(ref, vocab, opts.system_accuracy[s],
                                    StreamSeed(opts.seed, sys + "/" + id)),
                   (root / "lattices" / sys / (id + ".lat")).string());
  }

  std::ofstream conf(root / "experiment.conf", std::ios::binary);
  conf << "# Synthetic desk-scale experiment. Paths are relative to this file.\n"
          "manifest = manifest.tsv\n"
          "lexicon = lexicon.txt\n"
          "noise_dir = noise\n"
          "lm_train = lm/train.txt\n"
          "lm_heldout = lm/heldout.txt\n"
          "eval_ref = eval_ref.tsv\n"
          "lattice_dirs = lattices/sysA,lattices/sysB\n"
          "output_dir = out\n"
          "seed = " << opts.seed << "\n"
          "\n"
          "cleanse_threshold = 0.5\n"
          "speed_factors = 0.9,1.0,1.1\n"
          "snr_min_db = -5\n"
          "snr_max_db = 15\n"
          "specaug_time_masks = 2\n"
          "specaug_max_time_width = 20\n"
          "specaug_freq_masks = 2\n"
          "specaug_max_freq_width = 10\n"
          "specaug_fill = zero\n"
          "\n"
          "lm_order = 4\n"
          "lm_smoothing = kn\n"
          "\n"
          "decode_scale = 1.0\n"
          "mbr_nbest = 200\n"
          "\n"
          "lfmmi_steps = 200\n"
          "lfmmi_lr = 0.1\n"
          "lfmmi_scale = 1.0\n"
          "lfmmi_den_order = 2\n";
}

}  // namespace tonalasr

#endif  // TONALASR_SYNTHETIC_H_
