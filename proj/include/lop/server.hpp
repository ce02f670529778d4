#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "lop/live.hpp"

namespace lop::live {

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8080;  // 0 picks a free port
  int metronome_ms = 0;       // 0 = ticks only on client pulses
  SessionOptions session;
};

/// HTTP + WebSocket front end. Serves GET /health, GET /models and the
/// WebSocket endpoint /session; every WebSocket connection gets its own
/// Session driven by one worker thread.
class Server {
 public:
  Server(ServerOptions options, std::shared_ptr<const ModelRegistry> registry);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts accepting in the background; returns the bound port.
  std::uint16_t start();
  void stop();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lop::live
