#pragma once

#include <string>

namespace attx {

// Non-fatal diagnostics go to stderr. The counter lets tests assert that a
// warning actually fired.
void warn(const std::string& msg);
long warning_count();

}  // namespace attx
