#pragma once

#include <string>

namespace kdb {

inline constexpr const char* kToolName = "kdblock";
inline constexpr const char* kToolVersion = "0.1.0";

// 17 significant digits, '.' decimal, shortest exponent form where needed.
std::string format_real(double value);

// 64-bit FNV-1a of the text, as 16 lowercase hex digits.
std::string content_hash(const std::string& text);

// "# kdblock 0.1.0 config_hash=<hash>" for CSV headers.
std::string csv_comment_header(const std::string& config_hash);

}  // namespace kdb
