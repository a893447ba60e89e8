// tonalasr/corpus.h
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
// Tonal syllables, transcripts, pronunciation lexicons and utterance
// manifests, plus the two corpus-preparation passes: greedy lexicon
// augmentation and confidence-based cleansing.
//
#ifndef TONALASR_CORPUS_H_
#define TONALASR_CORPUS_H_

#include <compare>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "tonalasr/base.h"

namespace tonalasr {

// A romanized base syllable plus a tone index in 1..9, e.g. "tai5".
class TonalSyllable {
 public:
  TonalSyllable() = default;
  TonalSyllable(std::string base, int tone) : base_(std::move(base)), tone_(tone) {
    Validate();
  }

  const std::string &Base() const { return base_; }
  int Tone() const { return tone_; }

  std::string Text() const { return base_ + static_cast<char>('0' + tone_); }

  auto operator<=>(const TonalSyllable &) const = default;
  bool operator==(const TonalSyllable &) const = default;

 private:
  void Validate() const {
    if (base_.empty()) Fail("tonal syllable has an empty base");
    for (std::size_t i = 0; i < base_.size(); ++i) {
      const char c = base_[i];
      if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')))
        Fail("tonal syllable base '", base_, "' has non-letter character at position ", i);
    }
    if (tone_ < 1 || tone_ > 9)
      Fail("tone ", tone_, " out of range 1..9");
  }

  std::string base_ = "a";
  int tone_ = 1;
};

inline TonalSyllable ParseTonalSyllable(std::string_view token) {
  if (token.empty()) Fail("empty syllable token");
  const char last = token.back();
  if (last < '0' || last > '9')
    Fail("syllable '", token, "' lacks a tone digit at position ", token.size() - 1);
  if (last == '0')
    Fail("syllable '", token, "' has tone 0 at position ", token.size() - 1,
         " (tones are 1..9)");
  std::string_view base = token.substr(0, token.size() - 1);
  if (base.empty()) Fail("syllable '", token, "' has an empty base");
  for (std::size_t i = 0; i < base.size(); ++i) {
    const char c = base[i];
    if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')))
      Fail("syllable '", token, "' has invalid character '", c, "' at position ", i);
  }
  return TonalSyllable(std::string(base), last - '0');
}

using Transcript = std::vector<TonalSyllable>;

inline std::string FormatTranscript(const Transcript &t) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ' ';
    out += t[i].Text();
  }
  return out;
}

// A token with no digit at all ("Google", "OK") is a non-Taiwanese lexical
// pattern and is excluded; anything carrying digits must be a well-formed
// tonal syllable.
inline bool IsForeignToken(std::string_view token) {
  return std::none_of(token.begin(), token.end(),
                      [](char c) { return c >= '0' && c <= '9'; });
}

struct TranscriptParse {
  Transcript transcript;
  std::size_t dropped = 0;
};

inline TranscriptParse ParseTranscript(std::string_view text) {
  TranscriptParse result;
  for (const auto &tok : SplitWhitespace(text)) {
    if (IsForeignToken(tok)) {
      ++result.dropped;
      continue;
    }
    result.transcript.push_back(ParseTonalSyllable(tok));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Lexicon

using Pronunciation = std::vector<std::string>;
using G2pRule = std::function<Pronunciation(const TonalSyllable &)>;

// "tai5" -> {"tai", "T5"}.
inline Pronunciation DefaultG2p(const TonalSyllable &s) {
  return {s.Base(), "T" + std::to_string(s.Tone())};
}

class Lexicon {
 public:
  void Add(const TonalSyllable &syl, Pronunciation pron) {
    if (pron.empty()) Fail("empty pronunciation for '", syl.Text(), "'");
    for (const auto &p : pron)
      if (p.empty()) Fail("empty phone symbol in pronunciation of '", syl.Text(), "'");
    const auto [it, inserted] = entries_.emplace(syl.Text(), std::move(pron));
    if (!inserted) Fail("duplicate lexicon entry '", syl.Text(), "'");
  }

  bool Contains(const TonalSyllable &syl) const {
    return entries_.count(syl.Text()) > 0;
  }

  const Pronunciation &Lookup(const TonalSyllable &syl) const {
    auto it = entries_.find(syl.Text());
    if (it == entries_.end()) Fail("no pronunciation for '", syl.Text(), "'");
    return it->second;
  }

  std::size_t Size() const { return entries_.size(); }
  const std::map<std::string, Pronunciation> &Entries() const { return entries_; }

  bool operator==(const Lexicon &) const = default;

 private:
  std::map<std::string, Pronunciation> entries_;
};

struct LexiconAugmentation {
  Lexicon lexicon;
  std::vector<TonalSyllable> added;
};

// Greedy augmentation: every distinct transcript syllable missing from the
// lexicon is added through `g2p`, in order of first appearance.
inline LexiconAugmentation AugmentLexicon(const Lexicon &lexicon,
                                          const std::vector<Transcript> &transcripts,
                                          const G2pRule &g2p = DefaultG2p) {
  LexiconAugmentation result{lexicon, {}};
  for (const auto &t : transcripts) {
    for (const auto &syl : t) {
      if (result.lexicon.Contains(syl)) continue;
      result.lexicon.Add(syl, g2p(syl));
      result.added.push_back(syl);
    }
  }
  return result;
}

inline Lexicon ReadLexicon(std::istream &is, const std::string &name = "<stream>") {
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string_view body = line;
    if (auto hash = body.find('#'); hash != std::string_view::npos)
      body = body.substr(0, hash);
    auto fields = SplitWhitespace(body);
    if (fields.empty()) continue;
    if (fields.size() < 2)
      Fail(name, ":", line_no, ": lexicon entry '", fields[0], "' has no phones");
    try {
      lex.Add(ParseTonalSyllable(fields[0]),
              Pronunciation(fields.begin() + 1, fields.end()));
    } catch (const DataError &e) {
      Fail(name, ":", line_no, ": ", e.what());
    }
  }
  return lex;
}

inline Lexicon ReadLexicon(const std::string &path) {
  std::ifstream is(path);
  if (!is) Fail("cannot open lexicon '", path, "'");
  return ReadLexicon(is, path);
}

inline void WriteLexicon(const Lexicon &lex, std::ostream &os) {
  for (const auto &[key, pron] : lex.Entries()) {
    os << key;
    for (const auto &p : pron) os << ' ' << p;
    os << '\n';
  }
}

inline void WriteLexicon(const Lexicon &lex, const std::string &path) {
  std::ofstream os(path);
  if (!os) Fail("cannot write lexicon '", path, "'");
  WriteLexicon(lex, os);
}

// ---------------------------------------------------------------------------
// Manifest

struct ManifestRecord {
  std::string utterance_id;
  std::string audio_path;
  Transcript transcript;
  std::optional<double> confidence;

  bool operator==(const ManifestRecord &) const = default;
};

class Manifest {
 public:
  Manifest() = default;
  explicit Manifest(std::vector<ManifestRecord> records) {
    for (auto &r : records) Add(std::move(r));
  }

  void Add(ManifestRecord record) {
    if (record.utterance_id.empty()) Fail("empty utterance id");
    if (record.confidence &&
        !(*record.confidence >= 0.0 && *record.confidence <= 1.0))
      Fail("utterance '", record.utterance_id, "': confidence ",
           *record.confidence, " outside [0,1]");
    if (!ids_.insert(record.utterance_id).second)
      Fail("duplicate utterance id '", record.utterance_id, "'");
    records_.push_back(std::move(record));
  }

  const std::vector<ManifestRecord> &Records() const { return records_; }
  std::size_t Size() const { return records_.size(); }
  bool Contains(const std::string &id) const { return ids_.count(id) > 0; }

  const ManifestRecord &Find(const std::string &id) const {
    for (const auto &r : records_)
      if (r.utterance_id == id) return r;
    Fail("utterance '", id, "' not in manifest");
  }

  std::vector<Transcript> Transcripts() const {
    std::vector<Transcript> out;
    out.reserve(records_.size());
    for (const auto &r : records_) out.push_back(r.transcript);
    return out;
  }

  bool operator==(const Manifest &other) const { return records_ == other.records_; }

 private:
  std::vector<ManifestRecord> records_;
  std::unordered_set<std::string> ids_;
};

struct ManifestReadStats {
  std::size_t dropped_tokens = 0;
};

inline Manifest ReadManifest(std::istream &is, const std::string &name = "<stream>",
                             ManifestReadStats *stats = nullptr) {
  Manifest manifest;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    auto fields = SplitOn(line, '\t');
    if (fields.size() != 4)
      Fail(name, ":", line_no, ": expected 4 tab-separated fields, got ", fields.size());
    ManifestRecord rec;
    rec.utterance_id = fields[0];
    rec.audio_path = fields[1];
    if (rec.utterance_id.empty()) Fail(name, ":", line_no, ": empty utterance id");
    if (fields[2] != "-") {
      double c;
      if (!ParseDouble(fields[2], &c) || !(c >= 0.0 && c <= 1.0))
        Fail(name, ":", line_no, ": bad confidence '", fields[2], "'");
      rec.confidence = c;
    }
    try {
      auto parsed = ParseTranscript(fields[3]);
      rec.transcript = std::move(parsed.transcript);
      if (stats) stats->dropped_tokens += parsed.dropped;
      manifest.Add(std::move(rec));
    } catch (const DataError &e) {
      Fail(name, ":", line_no, ": ", e.what());
    }
  }
  return manifest;
}

inline Manifest ReadManifest(const std::string &path, ManifestReadStats *stats = nullptr) {
  std::ifstream is(path);
  if (!is) Fail("cannot open manifest '", path, "'");
  return ReadManifest(is, path, stats);
}

inline void WriteManifest(const Manifest &m, std::ostream &os) {
  for (const auto &r : m.Records()) {
    os << r.utterance_id << '\t' << r.audio_path << '\t'
       << (r.confidence ? ShortestDouble(*r.confidence) : std::string("-")) << '\t'
       << FormatTranscript(r.transcript) << '\n';
  }
}

inline void WriteManifest(const Manifest &m, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail("cannot write manifest '", path, "'");
  WriteManifest(m, os);
}

// Keeps records whose confidence is at least `threshold`, in order.
inline Manifest Cleanse(const Manifest &manifest, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    Fail<ConfigError>("cleansing threshold ", threshold, " outside [0,1]");
  Manifest out;
  for (const auto &r : manifest.Records()) {
    if (!r.confidence)
      Fail("utterance '", r.utterance_id, "' has no confidence score");
    if (*r.confidence >= threshold) out.Add(r);
  }
  return out;
}

}  // namespace tonalasr

#endif  // TONALASR_CORPUS_H_
