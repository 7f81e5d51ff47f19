#pragma once

#include <atomic>
#include <chrono>
#include <csignal>
#include <thread>

namespace swarmchat::tools {

inline std::atomic<bool> g_stop{false};

inline void wait_for_signal() {
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

}  // namespace swarmchat::tools
