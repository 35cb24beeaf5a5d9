// Copyright 2026 The nmqj Authors
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

// Umbrella header. cli.hpp is left out because it pulls in CLI11.
#include "nmqj/config.hpp"
#include "nmqj/csv.hpp"
#include "nmqj/error.hpp"
#include "nmqj/integrator.hpp"
#include "nmqj/linalg.hpp"
#include "nmqj/model.hpp"
#include "nmqj/observables.hpp"
#include "nmqj/statistics.hpp"
#include "nmqj/trajectory.hpp"
#include "nmqj/unraveling.hpp"
