#pragma once

#include "geonet/bytes.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <vector>

namespace geonet::node {

/// Ring of serialized readings. Pushing into a full ring drops the oldest
/// record and counts it as overwritten.
class FlashBuffer {
 public:
  explicit FlashBuffer(std::size_t capacity);

  void push(Bytes record);
  /// Up to `n` records, oldest first, without removing them.
  std::vector<Bytes> peek(std::size_t n) const;
  void pop(std::size_t n);

  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return records_.empty(); }
  std::uint64_t overwritten() const { return overwritten_; }

 private:
  std::size_t capacity_;
  std::deque<Bytes> records_;
  std::uint64_t overwritten_ = 0;
};

}  // namespace geonet::node
