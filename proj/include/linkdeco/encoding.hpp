#pragma once

#include <array>
#include <string>
#include <string_view>

namespace linkdeco {

/// Encodings under which a storage value is searched for inside decoration
/// and response text. Order is the match priority.
enum class Encoding { kPlain, kBase64, kMd5, kSha1, kSha256 };

inline constexpr std::array<Encoding, 5> kAllEncodings = {
    Encoding::kPlain, Encoding::kBase64, Encoding::kMd5, Encoding::kSha1, Encoding::kSha256};

std::string_view to_string(Encoding encoding);
Encoding parse_encoding(std::string_view text);

/// Hex digests compare case-insensitively; plain and Base64 do not.
bool is_hex_digest(Encoding encoding);

/// Standard padded Base64 (RFC 4648 alphabet).
std::string base64_encode(std::string_view data);
/// Lowercase hexadecimal digests.
std::string md5_hex(std::string_view data);
std::string sha1_hex(std::string_view data);
std::string sha256_hex(std::string_view data);

std::string encode(std::string_view value, Encoding encoding);

struct EncodedCandidate {
  Encoding encoding;
  std::string text;
};

/// The value under every encoding in kAllEncodings order. `value` must be
/// non-empty; an empty value throws std::invalid_argument.
std::array<EncodedCandidate, 5> encode_candidates(std::string_view value);

/// Position of `needle` in `haystack`, ASCII case-insensitive when
/// `ignore_case` is set. npos when absent or when `needle` is empty.
std::size_t find_encoded(std::string_view haystack, std::string_view needle, bool ignore_case);

}  // namespace linkdeco
