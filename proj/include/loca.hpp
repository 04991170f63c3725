// Copyright 2026 The loca Authors
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

// Umbrella header.

#pragma once

#include "loca/anchors.hpp"
#include "loca/base_model.hpp"
#include "loca/config.hpp"
#include "loca/dae.hpp"
#include "loca/dataset.hpp"
#include "loca/ease.hpp"
#include "loca/embeddings.hpp"
#include "loca/eval.hpp"
#include "loca/loca.hpp"
#include "loca/neighborhood.hpp"
#include "loca/ranking.hpp"
#include "loca/synthetic.hpp"
