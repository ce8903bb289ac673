// Copyright 2026 The qread Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "qread/analysis.hpp"
#include "qread/bayes.hpp"
#include "qread/cavity.hpp"
#include "qread/config.hpp"
#include "qread/io.hpp"
#include "qread/joint_state.hpp"
#include "qread/parallel.hpp"
#include "qread/qte_effective.hpp"
#include "qread/qubit.hpp"
#include "qread/random.hpp"
#include "qread/record.hpp"
#include "qread/sme_full.hpp"
