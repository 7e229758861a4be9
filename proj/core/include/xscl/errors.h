// core/include/xscl/errors.h

// Copyright 2026  XSCL Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef XSCL_ERRORS_H_
#define XSCL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace xscl {

// Invalid user input: malformed manifest, bad config value, out-of-range
// request.  The CLI maps this to exit code 2; any other exception maps to 1.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string &msg) : std::runtime_error(msg) {}
};

}  // namespace xscl

#endif  // XSCL_ERRORS_H_
