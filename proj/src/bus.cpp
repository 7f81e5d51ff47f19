#include "swarmchat/bus.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "swarmchat/error.hpp"

namespace swarmchat {

bool is_valid_topic(std::string_view topic) noexcept {
  if (topic.empty() || topic.size() > 0xFFFF) return false;
  if (topic.find_first_of("*#+") != std::string_view::npos) return false;
  std::size_t start = 0;
  while (true) {
    auto slash = topic.find('/', start);
    auto seg = topic.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start);
    if (seg.empty()) return false;
    if (slash == std::string_view::npos) return true;
    start = slash + 1;
  }
}

std::string encode_frame(const BusFrame& frame) {
  if (frame.topic.size() > 0xFFFF) throw Error(ErrorCode::BadFrame, "topic too long");
  if (frame.payload.size() > kMaxPayload) throw Error(ErrorCode::BadFrame, "payload too large");
  const auto len = static_cast<std::uint32_t>(frame.payload.size());
  const auto tlen = static_cast<std::uint16_t>(frame.topic.size());
  std::string out;
  out.reserve(kFrameHeaderSize + frame.topic.size() + frame.payload.size());
  out.push_back(static_cast<char>((len >> 24) & 0xFF));
  out.push_back(static_cast<char>((len >> 16) & 0xFF));
  out.push_back(static_cast<char>((len >> 8) & 0xFF));
  out.push_back(static_cast<char>(len & 0xFF));
  out.push_back(static_cast<char>(frame.kind));
  out.push_back(static_cast<char>((tlen >> 8) & 0xFF));
  out.push_back(static_cast<char>(tlen & 0xFF));
  out += frame.topic;
  out += frame.payload;
  return out;
}

void FrameDecoder::feed(std::string_view bytes) {
  if (offset_ > 0 && offset_ >= buffer_.size() / 2) {
    buffer_.erase(0, offset_);
    offset_ = 0;
  }
  buffer_.append(bytes);
}

std::optional<BusFrame> FrameDecoder::next() {
  if (buffered() < kFrameHeaderSize) return std::nullopt;
  const auto* p = reinterpret_cast<const unsigned char*>(buffer_.data() + offset_);
  const std::uint32_t len = (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
                            (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
  const auto kind = p[4];
  const std::size_t tlen = (std::size_t{p[5]} << 8) | std::size_t{p[6]};
  if (kind < 1 || kind > 5) throw Error(ErrorCode::BadFrame, "unknown frame kind " + std::to_string(kind));
  if (len > kMaxPayload) throw Error(ErrorCode::BadFrame, "payload too large");
  if (buffered() < kFrameHeaderSize + tlen + len) return std::nullopt;

  BusFrame frame;
  frame.kind = static_cast<FrameKind>(kind);
  frame.topic.assign(buffer_, offset_ + kFrameHeaderSize, tlen);
  frame.payload.assign(buffer_, offset_ + kFrameHeaderSize + tlen, len);
  offset_ += kFrameHeaderSize + tlen + len;
  return frame;
}

namespace {

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

addrinfo* resolve(const BusEndpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const auto port = std::to_string(ep.port);
  const char* host = ep.host.empty() ? nullptr : ep.host.c_str();
  if (int rc = ::getaddrinfo(host, port.c_str(), &hints, &res); rc != 0)
    throw Error(passive ? ErrorCode::BrokerError : ErrorCode::NotConnected,
                "cannot resolve " + ep.host + ": " + ::gai_strerror(rc));
  return res;
}

}  // namespace

// ---------------------------------------------------------------------------
// Broker

struct Broker::Connection {
  int fd = -1;
  std::mutex write_mu;
  std::string name;

  bool write(const BusFrame& frame) {
    auto bytes = encode_frame(frame);
    std::lock_guard lock(write_mu);
    return fd >= 0 && write_all(fd, bytes);
  }

  void shutdown() {
    std::lock_guard lock(write_mu);
    if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
  }

  void close() {
    std::lock_guard lock(write_mu);
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

Broker::Broker(BusEndpoint bind) : bind_(std::move(bind)) {}

Broker::~Broker() { stop(); }

void Broker::start() {
  if (running_) return;
  addrinfo* res = resolve(bind_, true);
  int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    throw Error(ErrorCode::BrokerError, std::strerror(errno));
  }
  int yes = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  if (::bind(fd, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd, 64) != 0) {
    auto why = std::string(std::strerror(errno));
    ::freeaddrinfo(res);
    ::close(fd);
    throw Error(ErrorCode::BrokerError, "bind " + bind_.host + ":" + std::to_string(bind_.port) + ": " + why);
  }
  ::freeaddrinfo(res);

  sockaddr_in addr{};
  socklen_t alen = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &alen);
  port_ = ntohs(addr.sin_port);
  listen_fd_ = fd;
  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
  spdlog::debug("broker listening on {}:{}", bind_.host, port_);
}

void Broker::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (accept_thread_.joinable()) accept_thread_.join();

  std::list<std::thread> threads;
  {
    std::lock_guard lock(mu_);
    for (auto& c : connections_) c->shutdown();
    threads.swap(threads_);
  }
  for (auto& t : threads)
    if (t.joinable()) t.join();
  std::lock_guard lock(mu_);
  routes_.clear();
  connections_.clear();
}

std::size_t Broker::subscriber_count(std::string_view topic) const {
  std::lock_guard lock(mu_);
  auto it = routes_.find(topic);
  return it == routes_.end() ? 0 : it->second.size();
}

void Broker::accept_loop() {
  while (running_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      if (!running_) break;
      spdlog::warn("broker accept failed: {}", std::strerror(errno));
      continue;
    }
    int yes = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof(yes));
    auto conn = std::make_shared<Connection>();
    conn->fd = fd;
    conn->name = "conn-" + std::to_string(fd);
    std::lock_guard lock(mu_);
    if (!running_) {
      conn->close();
      break;
    }
    connections_.push_back(conn);
    threads_.emplace_back([this, conn] { serve(conn); });
  }
}

void Broker::drop(const std::shared_ptr<Connection>& conn) {
  std::lock_guard lock(mu_);
  for (auto it = routes_.begin(); it != routes_.end();) {
    auto& subs = it->second;
    subs.erase(std::remove(subs.begin(), subs.end(), conn), subs.end());
    it = subs.empty() ? routes_.erase(it) : std::next(it);
  }
  connections_.erase(std::remove(connections_.begin(), connections_.end(), conn), connections_.end());
}

void Broker::serve(std::shared_ptr<Connection> conn) {
  FrameDecoder decoder;
  std::uint64_t ordinal = 0;
  char buf[16384];
  bool open = true;
  while (open) {
    auto n = ::recv(conn->fd, buf, sizeof(buf), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    decoder.feed(std::string_view(buf, static_cast<std::size_t>(n)));
    try {
      while (auto frame = decoder.next()) {
        const auto id = std::to_string(++ordinal);
        if (!is_valid_topic(frame->topic)) {
          conn->write({FrameKind::Error, frame->topic, "InvalidTopic: " + frame->topic});
          continue;
        }
        switch (frame->kind) {
          case FrameKind::Subscribe: {
            {
              std::lock_guard lock(mu_);
              auto& subs = routes_[frame->topic];
              if (std::find(subs.begin(), subs.end(), conn) == subs.end()) subs.push_back(conn);
            }
            conn->write({FrameKind::Ack, frame->topic, id});
            break;
          }
          case FrameKind::Publish: {
            std::vector<std::shared_ptr<Connection>> targets;
            {
              std::lock_guard lock(mu_);
              if (auto it = routes_.find(frame->topic); it != routes_.end()) targets = it->second;
            }
            const BusFrame deliver{FrameKind::Deliver, frame->topic, frame->payload};
            for (auto& t : targets) t->write(deliver);
            conn->write({FrameKind::Ack, frame->topic, id});
            break;
          }
          default:
            conn->write({FrameKind::Error, frame->topic, "BrokerError: unexpected frame kind"});
        }
      }
    } catch (const Error& e) {
      conn->write({FrameKind::Error, "", e.what()});
      open = false;
    }
  }
  drop(conn);
  conn->close();
}

// ---------------------------------------------------------------------------
// Subscription

std::optional<std::string> Subscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
  if (queue_.empty()) return std::nullopt;
  auto v = std::move(queue_.front());
  queue_.pop_front();
  return v;
}

std::optional<std::string> Subscription::try_next() {
  std::lock_guard lock(mu_);
  if (queue_.empty()) return std::nullopt;
  auto v = std::move(queue_.front());
  queue_.pop_front();
  return v;
}

bool Subscription::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

void Subscription::push(std::string payload) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    queue_.push_back(std::move(payload));
  }
  cv_.notify_one();
}

void Subscription::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

// ---------------------------------------------------------------------------
// BusClient

BusClient::~BusClient() { close(); }

void BusClient::connect(const BusEndpoint& endpoint, std::chrono::milliseconds timeout) {
  if (connected_) throw Error(ErrorCode::BrokerError, "already connected");
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::string last_error;
  // The broker may still be starting; retry until the deadline.
  while (true) {
    addrinfo* res = resolve(endpoint, false);
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) == 0) {
      ::freeaddrinfo(res);
      int yes = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof(yes));
      fd_ = fd;
      break;
    }
    last_error = std::strerror(errno);
    if (fd >= 0) ::close(fd);
    ::freeaddrinfo(res);
    if (std::chrono::steady_clock::now() >= deadline)
      throw Error(ErrorCode::NotConnected,
                  endpoint.host + ":" + std::to_string(endpoint.port) + ": " + last_error);
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  connected_ = true;
  reader_ = std::thread([this] { read_loop(); });
}

void BusClient::close() {
  {
    std::lock_guard lock(write_mu_);
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  }
  if (reader_.joinable()) reader_.join();
  std::lock_guard lock(write_mu_);
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  connected_ = false;
}

std::future<std::string> BusClient::send(FrameKind kind, std::string_view topic, std::string_view payload) {
  auto bytes = encode_frame({kind, std::string(topic), std::string(payload)});
  std::lock_guard lock(write_mu_);
  if (!connected_ || fd_ < 0) throw Error(ErrorCode::NotConnected, "bus client is not connected");
  std::future<std::string> fut;
  {
    std::lock_guard slock(state_mu_);
    pending_.emplace_back();
    fut = pending_.back().get_future();
  }
  ++next_frame_;
  if (!write_all(fd_, bytes)) {
    ::shutdown(fd_, SHUT_RDWR);
    throw Error(ErrorCode::NotConnected, "write failed");
  }
  return fut;
}

namespace {

std::string await_ack(std::future<std::string>& fut) {
  if (fut.wait_for(std::chrono::seconds(10)) != std::future_status::ready)
    throw Error(ErrorCode::BrokerError, "timed out waiting for acknowledgement");
  return fut.get();
}

}  // namespace

void BusClient::publish(std::string_view topic, std::string_view payload) {
  if (!is_valid_topic(topic)) throw Error(ErrorCode::InvalidTopic, std::string(topic));
  auto fut = send(FrameKind::Publish, topic, payload);
  await_ack(fut);
}

std::shared_ptr<Subscription> BusClient::subscribe(std::string_view topic) {
  if (!is_valid_topic(topic)) throw Error(ErrorCode::InvalidTopic, std::string(topic));
  auto sub = std::make_shared<Subscription>(std::string(topic));
  decltype(subs_)::iterator entry;
  {
    std::lock_guard lock(state_mu_);
    entry = subs_.emplace(std::string(topic), sub);
  }
  try {
    auto fut = send(FrameKind::Subscribe, topic, {});
    await_ack(fut);
  } catch (...) {
    std::lock_guard lock(state_mu_);
    subs_.erase(entry);
    throw;
  }
  return sub;
}

void BusClient::fail_all(const std::string& why) {
  std::lock_guard lock(state_mu_);
  for (auto& p : pending_) p.set_exception(std::make_exception_ptr(Error(ErrorCode::NotConnected, why)));
  pending_.clear();
  for (auto& [topic, sub] : subs_) sub->close();
  subs_.clear();
}

void BusClient::read_loop() {
  FrameDecoder decoder;
  char buf[16384];
  std::string why = "connection closed";
  while (true) {
    auto n = ::recv(fd_, buf, sizeof(buf), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    decoder.feed(std::string_view(buf, static_cast<std::size_t>(n)));
    try {
      while (auto frame = decoder.next()) {
        if (frame->kind == FrameKind::Deliver) {
          std::lock_guard lock(state_mu_);
          auto [lo, hi] = subs_.equal_range(frame->topic);
          for (auto it = lo; it != hi; ++it) it->second->push(frame->payload);
        } else if (frame->kind == FrameKind::Ack || frame->kind == FrameKind::Error) {
          std::lock_guard lock(state_mu_);
          if (pending_.empty()) continue;
          if (frame->kind == FrameKind::Ack)
            pending_.front().set_value(frame->payload);
          else
            pending_.front().set_exception(std::make_exception_ptr(Error(ErrorCode::BrokerError, frame->payload)));
          pending_.pop_front();
        }
      }
    } catch (const Error& e) {
      why = e.what();
      break;
    }
  }
  connected_ = false;
  fail_all(why);
}

}  // namespace swarmchat
