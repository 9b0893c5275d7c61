// Copyright 2026 The diffrac-bcfw Authors.
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

#ifndef DIFFRAC_CONSTRAINTS_JSON_H_
#define DIFFRAC_CONSTRAINTS_JSON_H_

#include "diffrac/constraints.h"
#include "json.hpp"

namespace diffrac {

// Debug dump of a compiled constraint system. Layout:
//   {"block_id", "n_rows", "n_labels", "n_slack",
//    "slack": {"enabled", "penalty", "bound"},
//    "equalities": <n_rows>  (row n: sum_k y[n,k] = 1),
//    "inequalities": [{"origin", "bag_index", "label", "person"?,
//                      "rows", "coefs", "rhs", "slack_index"}]}
// Inspection format only; it may change between versions.
nlohmann::json PolytopeToJson(const BlockPolytope& polytope);

}  // namespace diffrac

#endif  // DIFFRAC_CONSTRAINTS_JSON_H_
