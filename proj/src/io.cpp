#include "kdb/io.hpp"

#include <cstdint>

#include <fmt/format.h>

namespace kdb {

std::string format_real(double value) { return fmt::format("{:.17g}", value); }

std::string content_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::string csv_comment_header(const std::string& config_hash) {
  return fmt::format("# {} {} config_hash={}", kToolName, kToolVersion, config_hash);
}

}  // namespace kdb
