/*
 * Copyright 2026 The thermoptic Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "thermoptic/blackbody.hpp"
#include "thermoptic/common.hpp"
#include "thermoptic/fisher.hpp"
#include "thermoptic/fock.hpp"
#include "thermoptic/gaussian_state.hpp"
#include "thermoptic/optimize.hpp"
#include "thermoptic/parallel.hpp"
#include "thermoptic/params.hpp"
#include "thermoptic/photon_counting.hpp"
#include "thermoptic/povm.hpp"
#include "thermoptic/quadratic_observable.hpp"
#include "thermoptic/rng.hpp"
#include "thermoptic/schemes.hpp"
#include "thermoptic/spatial.hpp"
#include "thermoptic/verify.hpp"
