#pragma once

#include "geonet/bytes.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace geonet::alp {

struct FileId {
  std::uint8_t value = 0;

  friend constexpr auto operator<=>(FileId, FileId) = default;
};

inline constexpr FileId kSensorDataFile{0x40};
inline constexpr FileId kNodeConfigFile{0x41};

enum class Opcode : std::uint8_t {
  ReadFileData = 0x01,
  WriteFileData = 0x04,
  ReturnFileData = 0x20,
  Status = 0x7F,
};

std::optional<Opcode> opcode_from_byte(std::uint8_t byte);
const char* opcode_name(Opcode op);

/// Status byte values carried by Status actions.
namespace status {
inline constexpr std::uint8_t kOk = 0x00;
inline constexpr std::uint8_t kNoSuchFile = 0x01;
inline constexpr std::uint8_t kPermissionDenied = 0x02;
inline constexpr std::uint8_t kOutOfBounds = 0x03;
inline constexpr std::uint8_t kUnsupportedAction = 0x04;
inline constexpr std::uint8_t kMalformedCommand = 0x05;
inline constexpr std::uint8_t kUnknownSensorType = 0x10;
inline constexpr std::uint8_t kReservedSensorAction = 0x11;
inline constexpr std::uint8_t kDriverFault = 0x12;
}  // namespace status

/// One file operation. Write/Return carry `length` payload bytes, Read carries
/// none and Status carries exactly one status byte.
struct AlpAction {
  Opcode opcode = Opcode::ReadFileData;
  FileId file;
  std::uint32_t offset = 0;
  std::uint32_t length = 0;
  Bytes payload;

  static AlpAction read(FileId file, std::uint32_t offset, std::uint32_t length);
  static AlpAction write(FileId file, std::uint32_t offset, Bytes payload);
  static AlpAction ret(FileId file, std::uint32_t offset, Bytes payload);
  static AlpAction status(FileId file, std::uint32_t offset, std::uint32_t length,
                          std::uint8_t code);

  std::uint8_t status_code() const { return payload.empty() ? 0 : payload.front(); }
  std::size_t encoded_size() const;

  friend bool operator==(const AlpAction&, const AlpAction&) = default;
};

struct AlpCommand {
  std::vector<AlpAction> actions;

  friend bool operator==(const AlpCommand&, const AlpCommand&) = default;
};

inline constexpr std::size_t kActionHeaderSize = 10;

enum class DecodeErrc { TruncatedInput, UnknownOpcode };

class DecodeError : public std::runtime_error {
 public:
  DecodeError(DecodeErrc code, std::size_t offset, const std::string& what)
      : std::runtime_error(what), code_(code), offset_(offset) {}

  DecodeErrc code() const { return code_; }
  /// Byte offset of the action that failed to decode.
  std::size_t offset() const { return offset_; }

 private:
  DecodeErrc code_;
  std::size_t offset_;
};

/// Layout per action: opcode, file id, u32le offset, u32le length, then the
/// payload (Write/Return) or one status byte (Status).
Bytes encode_command(const AlpCommand& cmd);
AlpCommand decode_command(ByteView bytes);

/// "WriteFileData file=0x41 offset=3 len=1 payload=AA"
std::string describe_action(const AlpAction& action);
/// Inverse of describe_action. Throws std::invalid_argument.
AlpAction parse_action(std::string_view text);

// ---------------------------------------------------------------------------
// File store

enum class Storage { Volatile, Persistent };

struct Permissions {
  bool readable = true;
  bool writable = true;
};

struct FileHeader {
  FileId id;
  std::uint32_t length = 0;
  Permissions permissions;
  Storage storage = Storage::Volatile;
};

enum class Trigger { OnWrite, OnRead };

struct FileAccess {
  FileId file;
  Trigger trigger = Trigger::OnWrite;
  std::uint32_t offset = 0;
  std::uint32_t length = 0;
};

struct ActionHook {
  FileId file;
  Trigger trigger = Trigger::OnWrite;
  std::string name;
  std::function<void(const FileAccess&)> action;
};

enum class FileErrc { NoSuchFile, PermissionDenied, OutOfBounds, AlreadyExists, InvalidHeader };

class FileError : public std::runtime_error {
 public:
  FileError(FileErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  FileErrc code() const { return code_; }

 private:
  FileErrc code_;
};

/// Maps a file error to the status byte a node reports for it.
std::uint8_t status_for(FileErrc code);

/// Fixed-size files addressed by id. Writes never grow a file. Hooks run after
/// a successful access, once per access, in registration order.
class FileStore {
 public:
  void create(const FileHeader& header);
  bool contains(FileId id) const { return files_.contains(id); }
  const FileHeader& header(FileId id) const;
  ByteView content(FileId id) const;

  Bytes read(FileId id, std::uint32_t offset, std::uint32_t length);
  void write(FileId id, std::uint32_t offset, ByteView payload);

  void register_hook(ActionHook hook);
  std::size_t hook_count() const { return hooks_.size(); }

  /// Simulated power loss: volatile files return to all zeros.
  void reset();

 private:
  struct File {
    FileHeader header;
    Bytes data;
  };

  File& lookup(FileId id);
  const File& lookup(FileId id) const;
  static void check_range(const File& f, std::uint32_t offset, std::uint64_t length);
  void fire(const FileAccess& access);

  std::map<FileId, File> files_;
  std::vector<ActionHook> hooks_;
};

}  // namespace geonet::alp
