// Copyright 2026 The dpmaint Authors
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
//

#ifndef DPMAINT_ERROR_H_
#define DPMAINT_ERROR_H_

#include <stdexcept>
#include <string>

namespace dpmaint {

// Coarse error categories. These map one-to-one onto the status codes of the
// C API (see dpmaint/dpmaint.h).
enum class ErrorCode {
  kInvalidArgument = 1,
  kParse = 2,
  kValidation = 3,
  kIo = 4,
  kProtocol = 5,
  kSolver = 6,
  kConfiguration = 7,
  kInternal = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline Error InvalidArgument(const std::string& msg) {
  return Error(ErrorCode::kInvalidArgument, msg);
}
inline Error ParseError(const std::string& msg) {
  return Error(ErrorCode::kParse, msg);
}
inline Error ValidationError(const std::string& msg) {
  return Error(ErrorCode::kValidation, msg);
}
inline Error IoError(const std::string& msg) {
  return Error(ErrorCode::kIo, msg);
}
inline Error ProtocolError(const std::string& msg) {
  return Error(ErrorCode::kProtocol, msg);
}
inline Error SolverError(const std::string& msg) {
  return Error(ErrorCode::kSolver, msg);
}
inline Error ConfigurationError(const std::string& msg) {
  return Error(ErrorCode::kConfiguration, msg);
}

}  // namespace dpmaint

#endif  // DPMAINT_ERROR_H_
