#include "qx/wire.hpp"

#include "qx/syntax.hpp"

namespace qx::wire {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::uint32_t read_length(std::string_view bytes) {
  auto b = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i])); };
  return (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
}

}  // namespace

WireError::WireError(Kind kind, std::size_t offset, const std::string& detail)
    : std::runtime_error(std::string(wire::to_string(kind)) + " at " + std::to_string(offset) + ": " + detail),
      kind_(kind),
      offset_(offset) {}

std::string_view to_string(WireError::Kind kind) {
  switch (kind) {
    case WireError::Kind::truncated: return "truncated";
    case WireError::Kind::oversize: return "oversize";
    case WireError::Kind::bad_payload: return "bad-payload";
  }
  return "?";
}

std::string encode_payload(const Message& m) {
  return std::visit(
      overloaded{
          [](const Hello& h) { return "(hello " + std::to_string(h.version) + ")"; },
          [](const HelloOk& h) { return "(hello-ok " + std::to_string(h.version) + ")"; },
          [](const Eval& e) {
            std::string out = "(eval " + std::to_string(e.id) + " " + print_expr(e.expr);
            if (e.fuel) out += " " + std::to_string(*e.fuel);
            return out + ")";
          },
          [](const Result& r) { return "(result " + std::to_string(r.id) + " " + print_expr(r.value) + ")"; },
          [](const Error& e) {
            return "(error " + std::to_string(e.id) + " " + std::string(qx::to_string(e.code)) + " " +
                   quote_string(e.detail) + ")";
          },
          [](const Ping&) { return std::string("(ping)"); },
          [](const Pong&) { return std::string("(pong)"); },
      },
      m);
}

Message decode_payload(std::string_view payload) {
  Reader r(payload);
  try {
    r.expect_open();
    std::size_t head_at = (r.skip_space(), r.offset());
    std::string_view head = r.read_atom();
    Message m = [&]() -> Message {
      if (head == "hello") return Hello{r.read_int()};
      if (head == "hello-ok") return HelloOk{r.read_int()};
      if (head == "ping") return Ping{};
      if (head == "pong") return Pong{};
      if (head == "eval") {
        std::uint64_t id = r.read_uint();
        Expr e = r.read_expr();
        std::optional<std::uint64_t> fuel;
        if (!r.at_close()) {
          std::size_t at = (r.skip_space(), r.offset());
          fuel = r.read_uint();
          if (*fuel == 0) r.fail(at, "fuel override must be positive");
        }
        return Eval{id, std::move(e), fuel};
      }
      if (head == "result") {
        std::uint64_t id = r.read_uint();
        std::size_t at = (r.skip_space(), r.offset());
        Expr value = r.read_expr();
        if (!is_literal(value)) r.fail(at, "result value must be a literal");
        return Result{id, std::move(value)};
      }
      if (head == "error") {
        std::uint64_t id = r.read_uint();
        std::size_t at = (r.skip_space(), r.offset());
        auto code = error_code_from_string(r.read_atom());
        if (!code) r.fail(at, "unknown error code");
        return Error{id, *code, r.read_string()};
      }
      r.fail(head_at, "unknown message '" + std::string(head) + "'");
    }();
    r.expect_close();
    r.expect_end();
    return m;
  } catch (const ParseError& e) {
    throw WireError(WireError::Kind::bad_payload, e.offset(), e.message());
  }
}

std::string encode_message(const Message& m) {
  std::string payload = encode_payload(m);
  if (payload.size() > kMaxPayload) {
    throw WireError(WireError::Kind::oversize, 0, "payload of " + std::to_string(payload.size()) + " bytes");
  }
  auto n = static_cast<std::uint32_t>(payload.size());
  std::string frame;
  frame.reserve(kHeaderSize + payload.size());
  frame += static_cast<char>((n >> 24) & 0xFF);
  frame += static_cast<char>((n >> 16) & 0xFF);
  frame += static_cast<char>((n >> 8) & 0xFF);
  frame += static_cast<char>(n & 0xFF);
  frame += payload;
  return frame;
}

Message decode_message(std::string_view frame) {
  if (frame.size() < kHeaderSize) {
    throw WireError(WireError::Kind::truncated, frame.size(), "incomplete length header");
  }
  std::uint32_t n = read_length(frame);
  if (n > kMaxPayload) throw WireError(WireError::Kind::oversize, 0, "declared length " + std::to_string(n));
  if (frame.size() - kHeaderSize < n) {
    throw WireError(WireError::Kind::truncated, frame.size(),
                    "declared " + std::to_string(n) + " payload bytes, have " + std::to_string(frame.size() - kHeaderSize));
  }
  if (frame.size() - kHeaderSize > n) {
    throw WireError(WireError::Kind::bad_payload, n, "trailing bytes after frame");
  }
  return decode_payload(frame.substr(kHeaderSize));
}

std::optional<std::uint64_t> recover_request_id(std::string_view payload) {
  try {
    Reader r(payload);
    r.expect_open();
    if (r.read_atom() != "eval") return std::nullopt;
    return r.read_uint();
  } catch (const ParseError&) {
    return std::nullopt;
  }
}

void FrameDecoder::feed(std::string_view bytes) {
  if (consumed_ > 0 && consumed_ * 2 >= buffer_.size()) {
    buffer_.erase(0, consumed_);
    consumed_ = 0;
  }
  buffer_.append(bytes);
}

std::optional<std::string> FrameDecoder::next_payload() {
  std::string_view pending = std::string_view(buffer_).substr(consumed_);
  if (pending.size() < kHeaderSize) return std::nullopt;
  std::uint32_t n = read_length(pending);
  if (n > kMaxPayload) throw WireError(WireError::Kind::oversize, 0, "declared length " + std::to_string(n));
  if (pending.size() - kHeaderSize < n) return std::nullopt;
  std::string payload(pending.substr(kHeaderSize, n));
  consumed_ += kHeaderSize + n;
  return payload;
}

std::optional<Message> FrameDecoder::next() {
  auto payload = next_payload();
  if (!payload) return std::nullopt;
  return decode_payload(*payload);
}

}  // namespace qx::wire
