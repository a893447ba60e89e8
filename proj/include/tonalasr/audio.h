// tonalasr/audio.h
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
// Mono waveforms and 16-bit PCM WAV I/O.
//
#ifndef TONALASR_AUDIO_H_
#define TONALASR_AUDIO_H_

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "tonalasr/base.h"

namespace tonalasr {

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  std::size_t Size() const { return samples.size(); }
  double Duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  bool operator==(const Waveform &) const = default;
};

inline double Rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  KahanSum s;
  for (double v : x) s.Add(v * v);
  return std::sqrt(s.Value() / static_cast<double>(x.size()));
}

namespace internal {

inline void PutU32(std::ostream &os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char *>(b), 4);
}

inline void PutU16(std::ostream &os, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char *>(b), 2);
}

inline std::uint32_t GetU32(const unsigned char *p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t GetU16(const unsigned char *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace internal

// Samples are clamped to [-1, 1] and rounded to the nearest 16-bit step.
inline void WriteWav(const Waveform &w, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail("cannot write wav '", path, "'");
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  os.write("RIFF", 4);
  internal::PutU32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  internal::PutU32(os, 16);
  internal::PutU16(os, 1);  // PCM
  internal::PutU16(os, 1);  // mono
  internal::PutU32(os, static_cast<std::uint32_t>(w.sample_rate));
  internal::PutU32(os, static_cast<std::uint32_t>(w.sample_rate) * 2);
  internal::PutU16(os, 2);
  internal::PutU16(os, 16);
  os.write("data", 4);
  internal::PutU32(os, data_bytes);
  for (double x : w.samples) {
    const double c = std::clamp(x, -1.0, 1.0);
    const auto v = static_cast<std::int16_t>(std::lround(c * 32767.0));
    internal::PutU16(os, static_cast<std::uint16_t>(v));
  }
  if (!os) Fail("error writing wav '", path, "'");
}

inline Waveform ReadWav(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail("cannot open wav '", path, "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    Fail("'", path, "' is not a RIFF/WAVE file");
  Waveform w;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char *chunk = bytes.data() + pos;
    const std::uint32_t size = internal::GetU32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) Fail("'", path, "': truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) Fail("'", path, "': short fmt chunk");
      const std::uint16_t format = internal::GetU16(bytes.data() + body);
      const std::uint16_t channels = internal::GetU16(bytes.data() + body + 2);
      const std::uint32_t rate = internal::GetU32(bytes.data() + body + 4);
      const std::uint16_t bits = internal::GetU16(bytes.data() + body + 14);
      if (format != 1 || channels != 1 || bits != 16)
        Fail("'", path, "': only 16-bit PCM mono is supported");
      if (rate == 0) Fail("'", path, "': zero sample rate");
      w.sample_rate = static_cast<int>(rate);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) Fail("'", path, "': data chunk before fmt chunk");
      w.samples.resize(size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(internal::GetU16(bytes.data() + body + 2 * i));
        w.samples[i] = v / 32767.0;
      }
      return w;
    }
    pos = body + size + (size & 1);
  }
  Fail("'", path, "': no data chunk");
}

}  // namespace tonalasr

#endif  // TONALASR_AUDIO_H_
