#include "geonet/alp.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace geonet::alp {

std::uint8_t status_for(FileErrc code) {
  switch (code) {
    case FileErrc::NoSuchFile: return status::kNoSuchFile;
    case FileErrc::PermissionDenied: return status::kPermissionDenied;
    case FileErrc::OutOfBounds: return status::kOutOfBounds;
    default: return status::kUnsupportedAction;
  }
}

void FileStore::create(const FileHeader& header) {
  if (header.length == 0) {
    throw FileError(FileErrc::InvalidHeader, fmt::format("file 0x{:02X} has zero length", header.id.value));
  }
  if (files_.contains(header.id)) {
    throw FileError(FileErrc::AlreadyExists, fmt::format("file 0x{:02X} already exists", header.id.value));
  }
  files_.emplace(header.id, File{header, Bytes(header.length, 0)});
}

FileStore::File& FileStore::lookup(FileId id) {
  auto it = files_.find(id);
  if (it == files_.end()) {
    throw FileError(FileErrc::NoSuchFile, fmt::format("no such file 0x{:02X}", id.value));
  }
  return it->second;
}

const FileStore::File& FileStore::lookup(FileId id) const {
  return const_cast<FileStore*>(this)->lookup(id);
}

const FileHeader& FileStore::header(FileId id) const { return lookup(id).header; }

ByteView FileStore::content(FileId id) const { return lookup(id).data; }

void FileStore::check_range(const File& f, std::uint32_t offset, std::uint64_t length) {
  if (static_cast<std::uint64_t>(offset) + length > f.header.length) {
    throw FileError(FileErrc::OutOfBounds,
                    fmt::format("range [{}, {}) exceeds file 0x{:02X} length {}", offset,
                                static_cast<std::uint64_t>(offset) + length, f.header.id.value,
                                f.header.length));
  }
}

Bytes FileStore::read(FileId id, std::uint32_t offset, std::uint32_t length) {
  const File& f = lookup(id);
  if (!f.header.permissions.readable) {
    throw FileError(FileErrc::PermissionDenied, fmt::format("file 0x{:02X} is not readable", id.value));
  }
  check_range(f, offset, length);
  Bytes out(f.data.begin() + offset, f.data.begin() + offset + length);
  fire(FileAccess{id, Trigger::OnRead, offset, length});
  return out;
}

void FileStore::write(FileId id, std::uint32_t offset, ByteView payload) {
  File& f = lookup(id);
  if (!f.header.permissions.writable) {
    throw FileError(FileErrc::PermissionDenied, fmt::format("file 0x{:02X} is not writable", id.value));
  }
  check_range(f, offset, payload.size());
  std::copy(payload.begin(), payload.end(), f.data.begin() + offset);
  fire(FileAccess{id, Trigger::OnWrite, offset, static_cast<std::uint32_t>(payload.size())});
}

void FileStore::register_hook(ActionHook hook) {
  lookup(hook.file);
  hooks_.push_back(std::move(hook));
}

void FileStore::fire(const FileAccess& access) {
  // Hooks may access the store again; index over a fixed count so hooks
  // registered during dispatch only see later accesses.
  const std::size_t count = hooks_.size();
  for (std::size_t i = 0; i < count; ++i) {
    const ActionHook& h = hooks_[i];
    if (h.file == access.file && h.trigger == access.trigger && h.action) {
      auto action = h.action;
      action(access);
    }
  }
}

void FileStore::reset() {
  for (auto& [id, f] : files_) {
    if (f.header.storage == Storage::Volatile) std::fill(f.data.begin(), f.data.end(), 0);
  }
}

}  // namespace geonet::alp
