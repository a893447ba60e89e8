// tests/fixtures.cc
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
// Writes WAV fixtures for the CLI tests.
//
#include <cmath>

#include "tonalasr/audio.h"

// Writes tone.wav, dc.wav (constant, so zero energy after mean removal) and
// short.wav into argv[1].
int main(int argc, char **argv) {
  if (argc != 2) return 2;
  const std::string dir = argv[1];
  tonalasr::Waveform tone{std::vector<double>(1600), 16000};
  for (std::size_t i = 0; i < tone.samples.size(); ++i)
    tone.samples[i] = 0.5 * std::sin(2.0 * M_PI * 440.0 * i / 16000.0);
  tonalasr::WriteWav(tone, dir + "/tone.wav");
  tonalasr::WriteWav({std::vector<double>(1600, 0.25), 16000}, dir + "/dc.wav");
  tonalasr::WriteWav({std::vector<double>(800, 0.1), 16000}, dir + "/short.wav");
  return 0;
}
