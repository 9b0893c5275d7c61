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

#ifndef DIFFRAC_ERRORS_H_
#define DIFFRAC_ERRORS_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace diffrac {

// A constraint system admits no feasible point. `constraints()` lists the
// inequality indices (in compiled order) that could not be satisfied.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& message,
                           std::vector<int> constraints = {})
      : std::runtime_error(message), constraints_(std::move(constraints)) {}

  const std::vector<int>& constraints() const { return constraints_; }

 private:
  std::vector<int> constraints_;
};

// Non-finite values, failed factorizations, simplex iteration limits and
// other numerical breakdowns.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace diffrac

#endif  // DIFFRAC_ERRORS_H_
