#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <future>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "swarmchat/config.hpp"

namespace swarmchat {

inline constexpr std::string_view kCommandTopic = "swarmchat/commands";
inline constexpr std::string_view kFeedbackTopic = "swarmchat/feedback";

/// Nonempty, "/"-separated nonempty segments, no wildcard characters.
bool is_valid_topic(std::string_view topic) noexcept;

enum class FrameKind : std::uint8_t {
  Subscribe = 1,
  Publish = 2,
  Deliver = 3,
  Ack = 4,
  Error = 5,
};

/// Wire layout:
///   u32 payload length (big-endian) | u8 kind | u16 topic length (big-endian)
///   | topic bytes | payload bytes
/// Ack and Error frames echo the request topic; their payload is the
/// request's per-connection ordinal (decimal) or an error message.
struct BusFrame {
  FrameKind kind = FrameKind::Publish;
  std::string topic;
  std::string payload;
  std::uint64_t frame_id = 0;  // per-connection ordinal, not on the wire

  friend bool operator==(const BusFrame& a, const BusFrame& b) {
    return a.kind == b.kind && a.topic == b.topic && a.payload == b.payload;
  }
};

inline constexpr std::size_t kFrameHeaderSize = 7;
inline constexpr std::uint32_t kMaxPayload = 16u << 20;

std::string encode_frame(const BusFrame& frame);

/// Incremental decoder over a byte stream. Throws BadFrame on an unknown
/// kind or an oversized payload.
class FrameDecoder {
 public:
  void feed(std::string_view bytes);
  std::optional<BusFrame> next();
  std::size_t buffered() const noexcept { return buffer_.size() - offset_; }

 private:
  std::string buffer_;
  std::size_t offset_ = 0;
};

/// Topic router over TCP. Each connection gets a reader thread; every
/// Publish is fanned out to the topic's current subscribers before the
/// publisher is acknowledged, so one publisher's messages reach each
/// subscriber in publish order. Nothing is retained.
class Broker {
 public:
  explicit Broker(BusEndpoint bind);
  ~Broker();
  Broker(const Broker&) = delete;
  Broker& operator=(const Broker&) = delete;

  /// Binds and starts accepting. Throws BrokerError when the bind fails.
  void start();
  void stop();

  /// Actual bound port (useful with port 0).
  std::uint16_t port() const noexcept { return port_; }
  std::size_t subscriber_count(std::string_view topic) const;

 private:
  struct Connection;

  void accept_loop();
  void serve(std::shared_ptr<Connection> conn);
  void drop(const std::shared_ptr<Connection>& conn);

  BusEndpoint bind_;
  std::uint16_t port_ = 0;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;

  mutable std::mutex mu_;  // guards routes_, connections_, threads_
  std::map<std::string, std::vector<std::shared_ptr<Connection>>, std::less<>> routes_;
  std::vector<std::shared_ptr<Connection>> connections_;
  std::list<std::thread> threads_;
};

/// Blocking FIFO of payloads for one subscribed topic.
class Subscription {
 public:
  explicit Subscription(std::string topic) : topic_(std::move(topic)) {}

  const std::string& topic() const noexcept { return topic_; }

  /// Waits up to `timeout`; nullopt on timeout or once closed and drained.
  std::optional<std::string> next(std::chrono::milliseconds timeout);
  std::optional<std::string> try_next();
  bool closed() const;

  void push(std::string payload);
  void close();

 private:
  std::string topic_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> queue_;
  bool closed_ = false;
};

/// One connection to the broker: a reader thread routes Deliver frames into
/// subscriptions and resolves Acks in request order. publish() and
/// subscribe() may be called from any thread, but not from code that blocks
/// the reader.
class BusClient {
 public:
  BusClient() = default;
  ~BusClient();
  BusClient(const BusClient&) = delete;
  BusClient& operator=(const BusClient&) = delete;

  /// Throws NotConnected when the broker cannot be reached.
  void connect(const BusEndpoint& endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(5));
  bool connected() const noexcept { return connected_.load(); }
  void close();

  /// Returns once the broker acknowledged. Throws NotConnected or BrokerError.
  void publish(std::string_view topic, std::string_view payload);

  /// Messages published after this returns are delivered to the stream.
  std::shared_ptr<Subscription> subscribe(std::string_view topic);

 private:
  std::future<std::string> send(FrameKind kind, std::string_view topic, std::string_view payload);
  void read_loop();
  void fail_all(const std::string& why);

  int fd_ = -1;
  std::atomic<bool> connected_{false};
  std::thread reader_;
  std::mutex write_mu_;  // serializes frame writes and the pending queue
  std::mutex state_mu_;
  std::deque<std::promise<std::string>> pending_;
  std::multimap<std::string, std::shared_ptr<Subscription>, std::less<>> subs_;
  std::uint64_t next_frame_ = 1;
};

}  // namespace swarmchat
