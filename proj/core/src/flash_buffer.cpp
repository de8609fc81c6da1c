#include "geonet/flash_buffer.hpp"

#include <algorithm>
#include <stdexcept>

namespace geonet::node {

FlashBuffer::FlashBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("flash buffer capacity must be positive");
}

void FlashBuffer::push(Bytes record) {
  if (records_.size() == capacity_) {
    records_.pop_front();
    ++overwritten_;
  }
  records_.push_back(std::move(record));
}

std::vector<Bytes> FlashBuffer::peek(std::size_t n) const {
  n = std::min(n, records_.size());
  return {records_.begin(), records_.begin() + static_cast<std::ptrdiff_t>(n)};
}

void FlashBuffer::pop(std::size_t n) {
  n = std::min(n, records_.size());
  records_.erase(records_.begin(), records_.begin() + static_cast<std::ptrdiff_t>(n));
}

}  // namespace geonet::node
