#include "fovopt/log.hpp"

#include <cstdio>
#include <utility>

namespace fovopt {

namespace {
WarnHandler g_handler;
}

void set_warn_handler(WarnHandler handler) { g_handler = std::move(handler); }

void warn(const std::string& message) {
  if (g_handler) {
    g_handler(message);
  } else {
    std::fprintf(stderr, "warning: %s\n", message.c_str());
  }
}

}  // namespace fovopt
