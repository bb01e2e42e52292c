#include "newsclick/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <utility>

namespace newsclick {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& sink() {
  static WarningSink s = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  return s;
}

std::atomic<std::size_t> g_count{0};

}  // namespace

void warn(std::string_view message) {
  ++g_count;
  std::lock_guard lock(sink_mutex());
  if (sink()) sink()(message);
}

WarningSink set_warning_sink(WarningSink s) {
  std::lock_guard lock(sink_mutex());
  return std::exchange(sink(), std::move(s));
}

std::size_t warning_count() { return g_count.load(); }

}  // namespace newsclick
