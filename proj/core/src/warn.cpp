#include "qrv/warn.hpp"

#include <iostream>
#include <mutex>

namespace qrv {

namespace {
std::mutex g_mutex;
WarningHandler g_handler = [](const std::string& msg) { std::clog << "qrv: warning: " << msg << '\n'; };
}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(g_mutex);
  auto prev = std::move(g_handler);
  g_handler = std::move(handler);
  return prev;
}

void warn(const std::string& message) {
  std::lock_guard lock(g_mutex);
  if (g_handler) g_handler(message);
}

}  // namespace qrv
