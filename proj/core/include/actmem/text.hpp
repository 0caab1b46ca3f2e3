#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace actmem {

// Lowercased maximal runs of ASCII alphanumerics. Everything else is a
// separator. Shared by the toy scorer, the mock embedder and the evidence
// matcher so their notions of "token" agree.
std::vector<std::string> tokenize(std::string_view text);

// Approximate token count used when a provider reports no usage metadata:
// every alphanumeric run counts as one token and every non-space punctuation
// character counts as one token.
std::size_t approx_token_count(std::string_view text);

// FNV-1a, 64 bit. Stable across runs and platforms.
std::uint64_t fnv1a64(std::string_view data);

// Fixed-width lowercase hex (16 chars), so lexicographic order equals
// numeric order.
std::string to_hex64(std::uint64_t value);

std::string_view trim(std::string_view s);

// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string_view> split_lines(std::string_view text);

}  // namespace actmem
