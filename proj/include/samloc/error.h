// Copyright 2026 The samloc Authors
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

#ifndef SAMLOC_ERROR_H_
#define SAMLOC_ERROR_H_

#include <stdexcept>
#include <string>

namespace samloc {

enum class ErrorCode {
  kInvalidArgument,  // bad configuration or precondition violation
  kOutOfRange,       // pose or index outside the map / pose grid
  kFormat,           // malformed input file (PGM, metadata, PMAP, JSONL)
  kIo,               // cannot open / read / write a file
  kNotFound,         // lookup miss (e.g. unknown frame id)
  kShape,            // mismatched dimensions between operands
  kState,            // operation impossible on this value (zero mass, no free space)
  kConfig,           // unknown key or bad value in an experiment configuration
};

const char* ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception type. The C API
// translates it into status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace samloc

#endif  // SAMLOC_ERROR_H_
