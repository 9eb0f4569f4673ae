#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "qx/eval.hpp"
#include "qx/expr.hpp"

namespace qx::wire {

inline constexpr std::int64_t kProtocolVersion = 1;
inline constexpr std::size_t kMaxPayload = 16u * 1024u * 1024u;
inline constexpr std::size_t kHeaderSize = 4;

struct Hello {
  std::int64_t version = kProtocolVersion;
  friend bool operator==(const Hello&, const Hello&) = default;
};
struct HelloOk {
  std::int64_t version = kProtocolVersion;
  friend bool operator==(const HelloOk&, const HelloOk&) = default;
};
struct Eval {
  std::uint64_t id;
  Expr expr;
  std::optional<std::uint64_t> fuel;
  friend bool operator==(const Eval& a, const Eval& b) {
    return a.id == b.id && a.expr == b.expr && a.fuel == b.fuel;
  }
};
/// `value` is a literal form (int/float/bool/str/unit/list).
struct Result {
  std::uint64_t id;
  Expr value;
  friend bool operator==(const Result& a, const Result& b) { return a.id == b.id && a.value == b.value; }
};
struct Error {
  std::uint64_t id;
  ErrorCode code;
  std::string detail;
  friend bool operator==(const Error&, const Error&) = default;
};
struct Ping {
  friend bool operator==(const Ping&, const Ping&) = default;
};
struct Pong {
  friend bool operator==(const Pong&, const Pong&) = default;
};

using Message = std::variant<Hello, HelloOk, Eval, Result, Error, Ping, Pong>;

class WireError : public std::runtime_error {
 public:
  enum class Kind { truncated, oversize, bad_payload };

  WireError(Kind kind, std::size_t offset, const std::string& detail);

  Kind kind() const { return kind_; }
  /// Byte offset into the payload (bad_payload) or the frame.
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

std::string_view to_string(WireError::Kind kind);

/// Canonical payload text for a message, without framing.
std::string encode_payload(const Message& m);
/// Parses one message form; throws WireError(bad_payload).
Message decode_payload(std::string_view payload);

/// Length-prefixed frame: 4-byte big-endian payload length, then payload.
std::string encode_message(const Message& m);
/// Decodes exactly one complete frame.
Message decode_message(std::string_view frame);

/// Best-effort recovery of the request id from a malformed `(eval ID ...)`
/// payload, so the receiver can address its error reply.
std::optional<std::uint64_t> recover_request_id(std::string_view payload);

/// Incremental decoder for a byte stream of concatenated frames. Chunk
/// boundaries are arbitrary.
class FrameDecoder {
 public:
  void feed(std::string_view bytes);
  /// Next complete message, or nullopt if more bytes are needed. Throws
  /// WireError on oversize or malformed frames; the stream is then unusable.
  std::optional<Message> next();
  /// Raw payload of the next complete frame (for callers that want to
  /// handle decode failures themselves).
  std::optional<std::string> next_payload();
  std::size_t buffered() const { return buffer_.size() - consumed_; }

 private:
  std::string buffer_;
  std::size_t consumed_ = 0;
};

}  // namespace qx::wire
