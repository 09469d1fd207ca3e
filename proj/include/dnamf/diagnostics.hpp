#pragma once

#include <functional>
#include <iostream>
#include <string>

namespace dnamf {

using WarningHandler = std::function<void(const std::string&)>;

inline WarningHandler& warning_handler() {
  static WarningHandler h = [](const std::string& msg) {
    std::cerr << "dnamf: warning: " << msg << '\n';
  };
  return h;
}

// Returns the previous handler. An empty handler silences warnings.
inline WarningHandler set_warning_handler(WarningHandler h) {
  WarningHandler old = std::move(warning_handler());
  warning_handler() = std::move(h);
  return old;
}

inline void warn(const std::string& msg) {
  if (const auto& h = warning_handler()) h(msg);
}

}  // namespace dnamf
