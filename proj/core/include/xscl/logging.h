// core/include/xscl/logging.h

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

#ifndef XSCL_LOGGING_H_
#define XSCL_LOGGING_H_

#include <sstream>
#include <string>

namespace xscl {

enum class LogLevel { kOff = 0, kError = 1, kWarn = 2, kInfo = 3, kDebug = 4 };

// Level comes from the XSCL_LOG environment variable on first use
// (off|error|warn|info|debug); defaults to warn.
LogLevel log_level();
void set_log_level(LogLevel level);
void log_message(LogLevel level, const std::string &msg);

namespace internal {

class LogLine {
 public:
  explicit LogLine(LogLevel level) : level_(level) {}
  ~LogLine() { log_message(level_, os_.str()); }
  template <typename T>
  LogLine &operator<<(const T &v) {
    os_ << v;
    return *this;
  }

 private:
  LogLevel level_;
  std::ostringstream os_;
};

}  // namespace internal
}  // namespace xscl

#define XSCL_LOG_AT(level)                       \
  if (static_cast<int>(level) >                  \
      static_cast<int>(::xscl::log_level())) {   \
  } else                                         \
    ::xscl::internal::LogLine(level)

#define XSCL_INFO XSCL_LOG_AT(::xscl::LogLevel::kInfo)
#define XSCL_WARN XSCL_LOG_AT(::xscl::LogLevel::kWarn)
#define XSCL_DEBUG XSCL_LOG_AT(::xscl::LogLevel::kDebug)
#define XSCL_ERROR XSCL_LOG_AT(::xscl::LogLevel::kError)

#endif  // XSCL_LOGGING_H_
