#include "geonet/alp.hpp"

#include <fmt/format.h>

#include <charconv>
#include <sstream>

namespace geonet {

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0F]);
  }
  return out;
}

Bytes from_hex(std::string_view text) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Bytes out;
  int high = -1;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
    int v = nibble(c);
    if (v < 0) throw std::invalid_argument(fmt::format("invalid hex character '{}'", c));
    if (high < 0) {
      high = v;
    } else {
      out.push_back(static_cast<std::uint8_t>((high << 4) | v));
      high = -1;
    }
  }
  if (high >= 0) throw std::invalid_argument("odd number of hex digits");
  return out;
}

}  // namespace geonet

namespace geonet::alp {

std::optional<Opcode> opcode_from_byte(std::uint8_t byte) {
  switch (byte) {
    case 0x01: return Opcode::ReadFileData;
    case 0x04: return Opcode::WriteFileData;
    case 0x20: return Opcode::ReturnFileData;
    case 0x7F: return Opcode::Status;
    default: return std::nullopt;
  }
}

const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::ReadFileData: return "ReadFileData";
    case Opcode::WriteFileData: return "WriteFileData";
    case Opcode::ReturnFileData: return "ReturnFileData";
    case Opcode::Status: return "Status";
  }
  return "?";
}

AlpAction AlpAction::read(FileId file, std::uint32_t offset, std::uint32_t length) {
  return AlpAction{Opcode::ReadFileData, file, offset, length, {}};
}

AlpAction AlpAction::write(FileId file, std::uint32_t offset, Bytes payload) {
  auto len = static_cast<std::uint32_t>(payload.size());
  return AlpAction{Opcode::WriteFileData, file, offset, len, std::move(payload)};
}

AlpAction AlpAction::ret(FileId file, std::uint32_t offset, Bytes payload) {
  auto len = static_cast<std::uint32_t>(payload.size());
  return AlpAction{Opcode::ReturnFileData, file, offset, len, std::move(payload)};
}

AlpAction AlpAction::status(FileId file, std::uint32_t offset, std::uint32_t length,
                            std::uint8_t code) {
  return AlpAction{Opcode::Status, file, offset, length, Bytes{code}};
}

std::size_t AlpAction::encoded_size() const {
  switch (opcode) {
    case Opcode::ReadFileData: return kActionHeaderSize;
    case Opcode::Status: return kActionHeaderSize + 1;
    default: return kActionHeaderSize + payload.size();
  }
}

namespace {

void check_action(const AlpAction& a) {
  bool ok = true;
  switch (a.opcode) {
    case Opcode::ReadFileData: ok = a.payload.empty(); break;
    case Opcode::WriteFileData:
    case Opcode::ReturnFileData: ok = a.payload.size() == a.length; break;
    case Opcode::Status: ok = a.payload.size() == 1; break;
  }
  if (!ok) {
    throw std::invalid_argument(
        fmt::format("{} action payload size {} inconsistent with length {}",
                    opcode_name(a.opcode), a.payload.size(), a.length));
  }
}

}  // namespace

Bytes encode_command(const AlpCommand& cmd) {
  std::size_t total = 0;
  for (const auto& a : cmd.actions) total += a.encoded_size();
  Bytes out;
  out.reserve(total);
  for (const auto& a : cmd.actions) {
    check_action(a);
    out.push_back(static_cast<std::uint8_t>(a.opcode));
    out.push_back(a.file.value);
    put_u32le(out, a.offset);
    put_u32le(out, a.length);
    out.insert(out.end(), a.payload.begin(), a.payload.end());
  }
  return out;
}

AlpCommand decode_command(ByteView bytes) {
  if (bytes.empty()) {
    throw DecodeError(DecodeErrc::TruncatedInput, 0, "empty command");
  }
  AlpCommand cmd;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t start = pos;
    auto op = opcode_from_byte(bytes[pos]);
    if (!op) {
      throw DecodeError(DecodeErrc::UnknownOpcode, start,
                        fmt::format("unknown opcode 0x{:02X} at byte offset {}", bytes[pos], start));
    }
    const std::size_t remaining = bytes.size() - pos;
    if (remaining < kActionHeaderSize) {
      throw DecodeError(DecodeErrc::TruncatedInput, start,
                        fmt::format("truncated action header at byte offset {} ({} of {} bytes)",
                                    start, remaining, kActionHeaderSize));
    }
    AlpAction a;
    a.opcode = *op;
    a.file = FileId{bytes[pos + 1]};
    a.offset = get_u32le(bytes, pos + 2);
    a.length = get_u32le(bytes, pos + 6);
    pos += kActionHeaderSize;

    std::size_t body = 0;
    if (a.opcode == Opcode::WriteFileData || a.opcode == Opcode::ReturnFileData) {
      body = a.length;
    } else if (a.opcode == Opcode::Status) {
      body = 1;
    }
    if (bytes.size() - pos < body) {
      throw DecodeError(DecodeErrc::TruncatedInput, start,
                        fmt::format("truncated payload for action at byte offset {} (need {}, have {})",
                                    start, body, bytes.size() - pos));
    }
    a.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                     bytes.begin() + static_cast<std::ptrdiff_t>(pos + body));
    pos += body;
    cmd.actions.push_back(std::move(a));
  }
  return cmd;
}

std::string describe_action(const AlpAction& a) {
  std::string out = fmt::format("{} file=0x{:02X} offset={} len={}", opcode_name(a.opcode),
                                a.file.value, a.offset, a.length);
  switch (a.opcode) {
    case Opcode::ReadFileData: break;
    case Opcode::Status: out += fmt::format(" status=0x{:02X}", a.status_code()); break;
    default: out += " payload=" + to_hex(a.payload); break;
  }
  return out;
}

namespace {

std::uint64_t parse_number(std::string_view key, std::string_view v) {
  int base = 10;
  if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
    v.remove_prefix(2);
    base = 16;
  }
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw std::invalid_argument(fmt::format("bad value for {}: '{}'", key, v));
  }
  return out;
}

}  // namespace

AlpAction parse_action(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string name;
  if (!(in >> name)) throw std::invalid_argument("empty action");

  AlpAction a;
  if (name == "ReadFileData") a.opcode = Opcode::ReadFileData;
  else if (name == "WriteFileData") a.opcode = Opcode::WriteFileData;
  else if (name == "ReturnFileData") a.opcode = Opcode::ReturnFileData;
  else if (name == "Status") a.opcode = Opcode::Status;
  else throw std::invalid_argument(fmt::format("unknown action '{}'", name));

  bool have_file = false, have_len = false, have_payload = false, have_status = false;
  std::string token;
  while (in >> token) {
    auto eq = token.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(fmt::format("expected key=value, got '{}'", token));
    std::string_view key(token.data(), eq);
    std::string_view val(token.data() + eq + 1, token.size() - eq - 1);
    if (key == "file") {
      auto v = parse_number(key, val);
      if (v > 0xFF) throw std::invalid_argument("file id exceeds 0xFF");
      a.file = FileId{static_cast<std::uint8_t>(v)};
      have_file = true;
    } else if (key == "offset") {
      auto v = parse_number(key, val);
      if (v > 0xFFFFFFFFu) throw std::invalid_argument("offset exceeds 32 bits");
      a.offset = static_cast<std::uint32_t>(v);
    } else if (key == "len") {
      auto v = parse_number(key, val);
      if (v > 0xFFFFFFFFu) throw std::invalid_argument("len exceeds 32 bits");
      a.length = static_cast<std::uint32_t>(v);
      have_len = true;
    } else if (key == "payload") {
      a.payload = from_hex(val);
      have_payload = true;
    } else if (key == "status") {
      auto v = parse_number(key, val);
      if (v > 0xFF) throw std::invalid_argument("status exceeds 0xFF");
      a.payload = Bytes{static_cast<std::uint8_t>(v)};
      have_status = true;
    } else {
      throw std::invalid_argument(fmt::format("unknown key '{}'", key));
    }
  }
  if (!have_file) throw std::invalid_argument("missing file=");

  switch (a.opcode) {
    case Opcode::ReadFileData:
      if (have_payload || have_status) throw std::invalid_argument("ReadFileData takes no payload");
      if (!have_len) throw std::invalid_argument("missing len=");
      break;
    case Opcode::WriteFileData:
    case Opcode::ReturnFileData:
      if (have_status) throw std::invalid_argument("status= only valid for Status");
      if (!have_len) a.length = static_cast<std::uint32_t>(a.payload.size());
      if (a.payload.size() != a.length) throw std::invalid_argument("len does not match payload size");
      break;
    case Opcode::Status:
      if (have_payload) throw std::invalid_argument("Status takes status=, not payload=");
      if (!have_status) throw std::invalid_argument("missing status=");
      break;
  }
  return a;
}

}  // namespace geonet::alp
