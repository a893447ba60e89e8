// tests/test_corpus.cc
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
// Tests for corpus.
//
#include <gtest/gtest.h>

#include <sstream>

#include "tonalasr/corpus.h"

namespace tonalasr {
namespace {

Transcript T(std::string_view text) { return ParseTranscript(text).transcript; }

TEST(ParseTonalSyllable, SplitsTrailingTone) {
  const auto s = ParseTonalSyllable("tai5");
  EXPECT_EQ(s.Base(), "tai");
  EXPECT_EQ(s.Tone(), 5);
  const auto a = ParseTonalSyllable("a1");
  EXPECT_EQ(a.Base(), "a");
  EXPECT_EQ(a.Tone(), 1);
}

TEST(ParseTonalSyllable, RejectsMalformed) {
  EXPECT_THROW(ParseTonalSyllable("tai0"), DataError);
  EXPECT_THROW(ParseTonalSyllable("tai"), DataError);
  EXPECT_THROW(ParseTonalSyllable("5"), DataError);
  EXPECT_THROW(ParseTonalSyllable("t-a5"), DataError);
  EXPECT_THROW(ParseTonalSyllable(""), DataError);
}

TEST(ParseTonalSyllable, ErrorNamesPosition) {
  try {
    ParseTonalSyllable("ta_i5");
    FAIL();
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos) << e.what();
  }
}

TEST(ParseTonalSyllable, FormatRoundTrip) {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    std::string base;
    const auto len = rng.UniformInt(1, 6);
    for (std::int64_t j = 0; j < len; ++j)
      base += static_cast<char>(rng.UniformInt(0, 1) ? 'a' + rng.UniformInt(0, 25)
                                                      : 'A' + rng.UniformInt(0, 25));
    const TonalSyllable s(base, static_cast<int>(rng.UniformInt(1, 9)));
    EXPECT_EQ(ParseTonalSyllable(s.Text()), s);
  }
}

TEST(ParseTranscript, DropsForeignTokens) {
  const auto p = ParseTranscript("li2 Google hoo2");
  EXPECT_EQ(p.dropped, 1u);
  EXPECT_EQ(FormatTranscript(p.transcript), "li2 hoo2");
  EXPECT_TRUE(ParseTranscript("").transcript.empty());
}

TEST(AugmentLexicon, AddsMissingInFirstAppearanceOrder) {
  Lexicon lex;
  lex.Add(ParseTonalSyllable("a1"), DefaultG2p(ParseTonalSyllable("a1")));
  auto r = AugmentLexicon(lex, {T("a1 tai5")});
  ASSERT_EQ(r.added.size(), 1u);
  EXPECT_EQ(r.added[0].Text(), "tai5");
  EXPECT_EQ(r.lexicon.Lookup(ParseTonalSyllable("tai5")), (Pronunciation{"tai", "T5"}));

  EXPECT_TRUE(AugmentLexicon(r.lexicon, {T("a1 tai5")}).added.empty());

  const auto fresh = AugmentLexicon(Lexicon{}, {T("a1 a1 e2")});
  ASSERT_EQ(fresh.added.size(), 2u);
  EXPECT_EQ(fresh.added[0].Text(), "a1");
  EXPECT_EQ(fresh.added[1].Text(), "e2");
}

TEST(AugmentLexicon, Idempotent) {
  const std::vector<Transcript> ts = {T("gu2 li3 gu2"), T("siong1 a5 li3")};
  const auto once = AugmentLexicon(Lexicon{}, ts);
  const auto twice = AugmentLexicon(once.lexicon, ts);
  EXPECT_TRUE(twice.added.empty());
  EXPECT_EQ(twice.lexicon, once.lexicon);
}

TEST(Lexicon, RejectsBadEntries) {
  Lexicon lex;
  EXPECT_THROW(lex.Add(ParseTonalSyllable("a1"), {}), DataError);
  EXPECT_THROW(lex.Add(ParseTonalSyllable("a1"), {"a", ""}), DataError);
  lex.Add(ParseTonalSyllable("a1"), {"a", "T1"});
  EXPECT_THROW(lex.Add(ParseTonalSyllable("a1"), {"a"}), DataError);
}

TEST(Lexicon, TextRoundTrip) {
  std::istringstream is("# seed lexicon\na1 a T1\ntai5 t ai T5\n\n");
  const Lexicon lex = ReadLexicon(is);
  EXPECT_EQ(lex.Size(), 2u);
  std::ostringstream os;
  WriteLexicon(lex, os);
  std::istringstream again(os.str());
  EXPECT_EQ(ReadLexicon(again), lex);
  std::istringstream bad("a1 a T1\ntai0 t\n");
  try {
    ReadLexicon(bad, "lex");
    FAIL();
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("lex:2"), std::string::npos) << e.what();
  }
}

Manifest ThreeRecords() {
  Manifest m;
  m.Add({"u1", "a.wav", T("a1"), 0.9});
  m.Add({"u2", "b.wav", T("tai5"), 0.5});
  m.Add({"u3", "c.wav", T("gi2 a1"), 0.95});
  return m;
}

TEST(Cleanse, FiltersByThreshold) {
  const Manifest m = ThreeRecords();
  const Manifest kept = Cleanse(m, 0.8);
  ASSERT_EQ(kept.Size(), 2u);
  EXPECT_EQ(kept.Records()[0].utterance_id, "u1");
  EXPECT_EQ(kept.Records()[1].utterance_id, "u3");
  EXPECT_EQ(Cleanse(m, 0.0).Size(), 3u);
  EXPECT_EQ(Cleanse(m, 1.0).Size(), 0u);
}

TEST(Cleanse, MonotoneInThreshold) {
  Rng rng(2);
  Manifest m;
  for (int i = 0; i < 50; ++i) m.Add({"u" + std::to_string(i), "x.wav", {}, rng.Uniform()});
  for (int i = 0; i < 20; ++i) {
    const double t1 = rng.Uniform(), t2 = t1 + (1.0 - t1) * rng.Uniform();
    const Manifest hi = Cleanse(m, t2), lo = Cleanse(m, t1);
    for (const auto &r : hi.Records()) EXPECT_TRUE(lo.Contains(r.utterance_id));
  }
}

TEST(Cleanse, MissingConfidenceNamesUtterance) {
  Manifest m;
  m.Add({"has", "a.wav", {}, 0.9});
  m.Add({"lacks", "b.wav", {}, std::nullopt});
  try {
    Cleanse(m, 0.5);
    FAIL();
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("lacks"), std::string::npos);
  }
  EXPECT_THROW(Cleanse(ThreeRecords(), 1.5), ConfigError);
}

TEST(Manifest, ByteIdenticalRoundTrip) {
  const std::string text =
      "u1\taudio/u1.wav\t0.9\ta1 tai5\n"
      "u2\taudio/u2.wav\t-\t\n"
      "u3\taudio/u3.wav\t0.125\tgi2\n";
  std::istringstream is(text);
  const Manifest m = ReadManifest(is);
  std::ostringstream os;
  WriteManifest(m, os);
  EXPECT_EQ(os.str(), text);
}

TEST(Manifest, ErrorsCarryLineNumbers) {
  std::istringstream dup("u1\ta.wav\t-\ta1\nu1\tb.wav\t-\ta1\n");
  try {
    ReadManifest(dup, "m.tsv");
    FAIL();
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("m.tsv:2"), std::string::npos) << e.what();
  }
  std::istringstream fields("u1\ta.wav\ta1\n");
  EXPECT_THROW(ReadManifest(fields), DataError);
  std::istringstream conf("u1\ta.wav\t1.5\ta1\n");
  EXPECT_THROW(ReadManifest(conf), DataError);
}

TEST(Manifest, CountsDroppedTokens) {
  std::istringstream is("u1\ta.wav\t-\ta1 Google tai5 OK\n");
  ManifestReadStats stats;
  const Manifest m = ReadManifest(is, "m", &stats);
  EXPECT_EQ(stats.dropped_tokens, 2u);
  EXPECT_EQ(m.Records()[0].transcript.size(), 2u);
}

}  // namespace
}  // namespace tonalasr
