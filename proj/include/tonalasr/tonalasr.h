// tonalasr/tonalasr.h
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
// Umbrella header.
//
#ifndef TONALASR_TONALASR_H_
#define TONALASR_TONALASR_H_

#include "tonalasr/audio.h"
#include "tonalasr/augment.h"
#include "tonalasr/base.h"
#include "tonalasr/corpus.h"
#include "tonalasr/experiment.h"
#include "tonalasr/features.h"
#include "tonalasr/lattice.h"
#include "tonalasr/lfmmi.h"
#include "tonalasr/lm.h"
#include "tonalasr/metrics.h"
#include "tonalasr/synthetic.h"

#endif  // TONALASR_TONALASR_H_
