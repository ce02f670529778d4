#include "lop/server.hpp"

#include <condition_variable>
#include <deque>
#include <list>

#include <sys/socket.h>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace lop::live {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

/// Messages waiting for the session worker. Redundant pulses are dropped and a
/// piano_frame supersedes earlier pending note messages, so the queue cannot
/// grow without bound while a tick is being computed.
class Inbox {
 public:
  void push(json msg) {
    {
      std::lock_guard lock(mutex_);
      const auto type = msg.is_object() ? msg.value("type", std::string()) : std::string();
      if (type == "pulse" && std::any_of(pending_.begin(), pending_.end(), [](const json& m) {
            return m.is_object() && (m.value("type", "") == "pulse" || m.value("pulse", false));
          }))
        return;
      if (type == "piano_frame") {
        const bool pulse = msg.value("pulse", false) || std::any_of(pending_.begin(), pending_.end(), [](const json& m) {
                             return m.is_object() && (m.value("type", "") == "pulse" || m.value("pulse", false));
                           });
        std::erase_if(pending_, [](const json& m) {
          const auto t = m.is_object() ? m.value("type", std::string()) : std::string();
          return t == "note_on" || t == "note_off" || t == "piano_frame" || t == "pulse";
        });
        if (pulse) msg["pulse"] = true;
      }
      pending_.push_back(std::move(msg));
    }
    cv_.notify_one();
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    cv_.notify_one();
  }

  /// Waits for messages (or the metronome period); returns false once closed.
  bool take(std::vector<json>& out, int metronome_ms, bool& timed_out) {
    std::unique_lock lock(mutex_);
    auto ready = [&] { return closed_ || !pending_.empty(); };
    timed_out = false;
    if (metronome_ms > 0) {
      if (!cv_.wait_for(lock, std::chrono::milliseconds(metronome_ms), ready)) timed_out = true;
    } else {
      cv_.wait(lock, ready);
    }
    if (closed_) return false;
    out.assign(std::make_move_iterator(pending_.begin()), std::make_move_iterator(pending_.end()));
    pending_.clear();
    return true;
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<json> pending_;
  bool closed_ = false;
};

http::response<http::string_body> json_response(const http::request<http::string_body>& req, http::status status,
                                                const json& body) {
  http::response<http::string_body> res{status, req.version()};
  res.set(http::field::content_type, "application/json");
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(req.keep_alive());
  res.body() = body.dump();
  res.prepare_payload();
  return res;
}

}  // namespace

struct Server::Impl {
  ServerOptions options;
  std::shared_ptr<const ModelRegistry> registry;
  asio::io_context ioc;
  std::unique_ptr<tcp::acceptor> acceptor;
  std::thread accept_thread;
  std::atomic<bool> running{false};
  struct Connection {
    std::thread thread;
    std::mutex mutex;
    int fd = -1;  // valid while the socket is open
    std::atomic<bool> done{false};

    void shutdown() {
      std::lock_guard lock(mutex);
      if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
    }
  };
  /// Forgets the connection's fd before the socket that owns it is closed.
  struct FdRelease {
    Connection& conn;
    ~FdRelease() {
      std::lock_guard lock(conn.mutex);
      conn.fd = -1;
    }
  };
  std::mutex conn_mutex;
  std::list<std::shared_ptr<Connection>> connections;
  std::mutex wait_mutex;
  std::condition_variable wait_cv;

  void accept_loop() {
    while (running) {
      beast::error_code ec;
      tcp::socket socket(ioc);
      acceptor->accept(socket, ec);
      if (ec) {
        if (!running) break;
        continue;
      }
      auto conn = std::make_shared<Connection>();
      conn->fd = socket.native_handle();
      std::lock_guard lock(conn_mutex);
      connections.remove_if([](const std::shared_ptr<Connection>& c) {
        if (!c->done) return false;
        c->thread.join();
        return true;
      });
      conn->thread = std::thread([this, conn, s = std::move(socket)]() mutable {
        serve(std::move(s), *conn);
        conn->done = true;
      });
      connections.push_back(std::move(conn));
    }
  }

  void serve(tcp::socket socket, Connection& conn) {
    const FdRelease release{conn};
    beast::error_code ec;
    beast::flat_buffer buffer;
    for (;;) {
      http::request<http::string_body> req;
      http::read(socket, buffer, req, ec);
      if (ec) return;
      if (websocket::is_upgrade(req)) {
        if (req.target() == "/session") run_session(std::move(socket), std::move(req), conn);
        else http::write(socket, json_response(req, http::status::not_found, {{"error", "no such endpoint"}}), ec);
        return;
      }
      http::response<http::string_body> res;
      if (req.method() != http::verb::get) {
        res = json_response(req, http::status::method_not_allowed, {{"error", "GET only"}});
      } else if (req.target() == "/health") {
        res = json_response(req, http::status::ok,
                            {{"status", "ok"}, {"models", registry->ids().size()}, {"metronome_ms", options.metronome_ms}});
      } else if (req.target() == "/models") {
        res = json_response(req, http::status::ok, registry->describe());
      } else {
        res = json_response(req, http::status::not_found, {{"error", "no such endpoint"}});
      }
      const bool keep = res.keep_alive();
      http::write(socket, res, ec);
      if (ec || !keep) break;
    }
    socket.shutdown(tcp::socket::shutdown_send, ec);
  }

  void run_session(tcp::socket socket, http::request<http::string_body> req, Connection& conn) {
    websocket::stream<tcp::socket> ws(std::move(socket));
    const FdRelease release{conn};
    beast::error_code ec;
    ws.accept(req, ec);
    if (ec) return;
    ws.text(true);

    std::unique_ptr<Session> session;
    try {
      session = std::make_unique<Session>(registry, options.session);
    } catch (const std::exception& e) {
      ws.write(asio::buffer(error_reply(e.what()).dump()), ec);
      ws.close(websocket::close_code::internal_error, ec);
      return;
    }

    Inbox inbox;
    std::mutex write_mutex;
    auto send = [&](const json& msg) {
      std::lock_guard lock(write_mutex);
      beast::error_code wec;
      ws.write(asio::buffer(msg.dump()), wec);
    };

    std::thread worker([&] {
      std::vector<json> batch;
      bool timed_out = false;
      while (inbox.take(batch, options.metronome_ms, timed_out)) {
        std::vector<json> replies;
        if (!batch.empty()) replies = session->handle_batch(batch);
        const bool ticked = std::any_of(replies.begin(), replies.end(),
                                        [](const json& r) { return r.value("type", "") == "orchestra_frame"; });
        if (timed_out && !ticked) replies.push_back(session->tick());
        for (const auto& r : replies) send(r);
      }
    });

    beast::flat_buffer buffer;
    while (running) {
      buffer.clear();
      ws.read(buffer, ec);
      if (ec) break;
      const auto text = beast::buffers_to_string(buffer.data());
      json msg = json::parse(text, nullptr, false);
      if (msg.is_discarded()) {
        send(error_reply("protocol error: message is not valid JSON"));
        continue;
      }
      inbox.push(std::move(msg));
    }
    inbox.close();
    worker.join();
    if (ws.is_open()) {
      std::lock_guard lock(write_mutex);
      ws.close(websocket::close_code::normal, ec);
    }
  }
};

Server::Server(ServerOptions options, std::shared_ptr<const ModelRegistry> registry) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  impl_->registry = std::move(registry);
}

Server::~Server() { stop(); }

std::uint16_t Server::start() {
  auto& im = *impl_;
  const tcp::endpoint ep(asio::ip::make_address(im.options.address), im.options.port);
  im.acceptor = std::make_unique<tcp::acceptor>(im.ioc);
  im.acceptor->open(ep.protocol());
  im.acceptor->set_option(asio::socket_base::reuse_address(true));
  im.acceptor->bind(ep);
  im.acceptor->listen();
  im.running = true;
  im.accept_thread = std::thread([&im] { im.accept_loop(); });
  return im.acceptor->local_endpoint().port();
}

void Server::stop() {
  auto& im = *impl_;
  if (!im.running.exchange(false)) return;
  beast::error_code ec;
  // Unblock accept() with a throwaway connection, then close the acceptor.
  {
    tcp::socket poke(im.ioc);
    poke.connect(im.acceptor->local_endpoint(), ec);
  }
  if (im.accept_thread.joinable()) im.accept_thread.join();
  im.acceptor->close(ec);
  std::list<std::shared_ptr<Impl::Connection>> conns;
  {
    std::lock_guard lock(im.conn_mutex);
    conns.swap(im.connections);
  }
  // Unblock any pending reads; each connection then winds down on its own.
  for (auto& c : conns) c->shutdown();
  for (auto& c : conns) c->thread.join();
  im.wait_cv.notify_all();
}

void Server::wait() {
  auto& im = *impl_;
  std::unique_lock lock(im.wait_mutex);
  im.wait_cv.wait(lock, [&] { return !im.running.load(); });
}

}  // namespace lop::live
