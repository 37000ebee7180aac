// Copyright 2026 The colbisbm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COLBISBM_COLBISBM_HPP
#define COLBISBM_COLBISBM_HPP

#include "colbisbm/emission.hpp"
#include "colbisbm/net_model.hpp"
#include "colbisbm/parallel.hpp"
#include "colbisbm/partition.hpp"
#include "colbisbm/predict.hpp"
#include "colbisbm/rng.hpp"
#include "colbisbm/selection.hpp"
#include "colbisbm/serialize.hpp"
#include "colbisbm/simulate.hpp"
#include "colbisbm/vem.hpp"

#endif  // COLBISBM_COLBISBM_HPP
