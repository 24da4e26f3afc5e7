// Copyright 2026 The LAIS Authors
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


#ifndef LAIS_LAIS_HPP
#define LAIS_LAIS_HPP

#include <lais/compression.hpp>
#include <lais/core.hpp>
#include <lais/eval_ledger.hpp>
#include <lais/gaussian.hpp>
#include <lais/harness/config.hpp>
#include <lais/harness/experiment.hpp>
#include <lais/harness/io.hpp>
#include <lais/log_sum_exp.hpp>
#include <lais/lower_layer.hpp>
#include <lais/models/bayesian_model.hpp>
#include <lais/models/conjugate_basis.hpp>
#include <lais/models/gaussian_location.hpp>
#include <lais/models/gaussian_mixture.hpp>
#include <lais/models/logistic_map.hpp>
#include <lais/models/regression.hpp>
#include <lais/parallel.hpp>
#include <lais/rng.hpp>
#include <lais/target.hpp>
#include <lais/upper_layer.hpp>

#endif
