/*
 * Copyright 2026 The Fingertrace Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef FINGERTRACE_ERRORS_H_
#define FINGERTRACE_ERRORS_H_

#include <stdexcept>

namespace fingertrace {

// Bad arguments are reported with std::invalid_argument. The two types below
// cover the remaining failure classes.

// A caller broke a documented precondition that is not about argument
// ranges, e.g. evaluating a loss at an infeasible point.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A request that would exceed a fixed work ceiling.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fingertrace

#endif  // FINGERTRACE_ERRORS_H_
