// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ztc {

std::uint32_t parse_ipv4(std::string_view text);
std::string format_ipv4(std::uint32_t addr);

struct IpLease {
  std::string ipAddress;
  std::string leasedTo;

  bool operator==(const IpLease&) const = default;
};

// Flat DHCP-style pool over an inclusive address range. Allocation always hands
// out the lowest free address, so lease sequences are reproducible.
class IpPool {
 public:
  static constexpr std::string_view kDefaultFirst = "10.42.0.2";
  static constexpr std::string_view kDefaultLast = "10.42.0.254";

  IpPool() : IpPool(kDefaultFirst, kDefaultLast) {}
  IpPool(std::string_view first, std::string_view last);

  IpLease allocate(const std::string& holder);
  void release(const std::string& ipAddress);

  std::size_t capacity() const { return slots_.size(); }
  std::size_t leased_count() const;
  std::vector<IpLease> leases() const;
  std::optional<std::string> holder_of(const std::string& ipAddress) const;

 private:
  std::size_t index_of(const std::string& ipAddress) const;

  mutable std::mutex mutex_;
  std::uint32_t first_;
  std::vector<std::optional<std::string>> slots_;
};

}  // namespace ztc
