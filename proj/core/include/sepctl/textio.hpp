#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sepctl {

// Round-trip-exact decimal form ("%.17g"); every artifact writes numbers
// through this so logs are reproducible bit-for-bit.
std::string format_double(double v);

// Strict double parse of a whole token; errors (parse) otherwise.
double parse_double(const std::string& token);
long long parse_int(const std::string& token);

std::string trim(const std::string& s);
std::vector<std::string> split_whitespace(const std::string& s);
std::vector<std::string> split_char(const std::string& s, char sep);

// 64-bit FNV-1a over a byte string, and its fixed-width hex form.
std::uint64_t fnv1a64(const std::string& bytes);
std::string to_hex64(std::uint64_t v);

}  // namespace sepctl
