#include "meshstyle/errors.hpp"

#include <cstdio>
#include <mutex>
#include <utility>

namespace meshstyle {

namespace {

std::mutex g_warn_mutex;
WarningHandler g_warn_handler;

}  // namespace

void warn(const std::string& message) {
  std::lock_guard lock(g_warn_mutex);
  if (g_warn_handler) {
    g_warn_handler(message);
  } else {
    std::fprintf(stderr, "[warning] %s\n", message.c_str());
  }
}

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(g_warn_mutex);
  g_warn_handler = std::move(handler);
}

}  // namespace meshstyle
