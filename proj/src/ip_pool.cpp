// SPDX-License-Identifier: Apache-2.0

#include "ztc/ip_pool.hpp"

#include <charconv>

#include "ztc/error.hpp"

namespace ztc {

std::uint32_t parse_ipv4(std::string_view text) {
  std::uint32_t addr = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int octet = 0; octet < 4; ++octet) {
    unsigned value = 0;
    auto [next, ec] = std::from_chars(p, end, value);
    if (ec != std::errc() || next == p || value > 255) {
      throw Error(ErrorCode::kParse, "bad IPv4 address \"" + std::string(text) + "\"");
    }
    addr = (addr << 8) | value;
    p = next;
    if (octet < 3) {
      if (p == end || *p != '.') throw Error(ErrorCode::kParse, "bad IPv4 address \"" + std::string(text) + "\"");
      ++p;
    }
  }
  if (p != end) throw Error(ErrorCode::kParse, "bad IPv4 address \"" + std::string(text) + "\"");
  return addr;
}

std::string format_ipv4(std::uint32_t addr) {
  return std::to_string((addr >> 24) & 0xff) + "." + std::to_string((addr >> 16) & 0xff) + "." +
         std::to_string((addr >> 8) & 0xff) + "." + std::to_string(addr & 0xff);
}

IpPool::IpPool(std::string_view first, std::string_view last) : first_(parse_ipv4(first)) {
  const auto hi = parse_ipv4(last);
  if (hi < first_) throw Error(ErrorCode::kInvalidArgument, "empty IP range");
  slots_.resize(static_cast<std::size_t>(hi - first_) + 1);
}

IpLease IpPool::allocate(const std::string& holder) {
  std::lock_guard lock(mutex_);
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (!slots_[i]) {
      slots_[i] = holder;
      return {format_ipv4(first_ + static_cast<std::uint32_t>(i)), holder};
    }
  }
  throw Error(ErrorCode::kPoolExhausted, "IP pool exhausted");
}

std::size_t IpPool::index_of(const std::string& ipAddress) const {
  const auto addr = parse_ipv4(ipAddress);
  if (addr < first_ || addr - first_ >= slots_.size()) {
    throw Error(ErrorCode::kInvalidArgument, ipAddress + " is outside the pool");
  }
  return addr - first_;
}

void IpPool::release(const std::string& ipAddress) {
  std::lock_guard lock(mutex_);
  auto& slot = slots_[index_of(ipAddress)];
  if (!slot) throw Error(ErrorCode::kAccounting, ipAddress + " is not leased");
  slot.reset();
}

std::size_t IpPool::leased_count() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& s : slots_) n += s.has_value();
  return n;
}

std::vector<IpLease> IpPool::leases() const {
  std::lock_guard lock(mutex_);
  std::vector<IpLease> out;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i]) out.push_back({format_ipv4(first_ + static_cast<std::uint32_t>(i)), *slots_[i]});
  }
  return out;
}

std::optional<std::string> IpPool::holder_of(const std::string& ipAddress) const {
  std::lock_guard lock(mutex_);
  return slots_[index_of(ipAddress)];
}

}  // namespace ztc
