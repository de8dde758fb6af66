/*
 * Copyright 2026 The seqdx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SEQDX_ERROR_H_
#define SEQDX_ERROR_H_

#include <stdexcept>
#include <string>

namespace seqdx {

// Precondition and configuration violations surface as std::invalid_argument.
// The classes below cover failures tied to files and stored artifacts.

// The filesystem refused a read or write.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file exists but its bytes do not parse (bad magic, truncation, bad label).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two artifacts that must agree (e.g. classifier and policy dimensions) do not.
class IncompatibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace seqdx

#endif  // SEQDX_ERROR_H_
