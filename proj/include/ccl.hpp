// Copyright 2026 The CCL Authors. All Rights Reserved.
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

#pragma once

#include "ccl/common.hpp"
#include "ccl/data_model.hpp"
#include "ccl/finch.hpp"
#include "ccl/hac.hpp"
#include "ccl/io.hpp"
#include "ccl/kmeans.hpp"
#include "ccl/metrics.hpp"
#include "ccl/pair_mining.hpp"
#include "ccl/pipeline.hpp"
#include "ccl/siamese.hpp"
#include "ccl/synth.hpp"
