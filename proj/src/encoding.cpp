#include "linkdeco/encoding.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <memory>
#include <stdexcept>

#include "linkdeco/error.hpp"

namespace linkdeco {

namespace {

std::string hex_digest(const EVP_MD* md, std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1) {
    throw std::runtime_error("digest computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

char fold(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

}  // namespace

std::string_view to_string(Encoding encoding) {
  switch (encoding) {
    case Encoding::kPlain:
      return "plain";
    case Encoding::kBase64:
      return "base64";
    case Encoding::kMd5:
      return "md5";
    case Encoding::kSha1:
      return "sha1";
    case Encoding::kSha256:
      return "sha256";
  }
  return "plain";
}

Encoding parse_encoding(std::string_view text) {
  for (auto e : kAllEncodings) {
    if (to_string(e) == text) return e;
  }
  throw InputError("unknown encoding '" + std::string(text) + "'");
}

bool is_hex_digest(Encoding encoding) {
  return encoding == Encoding::kMd5 || encoding == Encoding::kSha1 ||
         encoding == Encoding::kSha256;
}

std::string base64_encode(std::string_view data) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    auto n = (static_cast<unsigned char>(data[i]) << 16) |
             (static_cast<unsigned char>(data[i + 1]) << 8) |
             static_cast<unsigned char>(data[i + 2]);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  auto rest = data.size() - i;
  if (rest == 1) {
    auto n = static_cast<unsigned char>(data[i]) << 16;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    auto n = (static_cast<unsigned char>(data[i]) << 16) |
             (static_cast<unsigned char>(data[i + 1]) << 8);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += '=';
  }
  return out;
}

std::string md5_hex(std::string_view data) { return hex_digest(EVP_md5(), data); }
std::string sha1_hex(std::string_view data) { return hex_digest(EVP_sha1(), data); }
std::string sha256_hex(std::string_view data) { return hex_digest(EVP_sha256(), data); }

std::string encode(std::string_view value, Encoding encoding) {
  switch (encoding) {
    case Encoding::kPlain:
      return std::string(value);
    case Encoding::kBase64:
      return base64_encode(value);
    case Encoding::kMd5:
      return md5_hex(value);
    case Encoding::kSha1:
      return sha1_hex(value);
    case Encoding::kSha256:
      return sha256_hex(value);
  }
  return std::string(value);
}

std::array<EncodedCandidate, 5> encode_candidates(std::string_view value) {
  if (value.empty()) throw std::invalid_argument("encode_candidates requires a non-empty value");
  return {EncodedCandidate{Encoding::kPlain, std::string(value)},
          EncodedCandidate{Encoding::kBase64, base64_encode(value)},
          EncodedCandidate{Encoding::kMd5, md5_hex(value)},
          EncodedCandidate{Encoding::kSha1, sha1_hex(value)},
          EncodedCandidate{Encoding::kSha256, sha256_hex(value)}};
}

std::size_t find_encoded(std::string_view haystack, std::string_view needle, bool ignore_case) {
  if (needle.empty() || needle.size() > haystack.size()) return std::string_view::npos;
  if (!ignore_case) return haystack.find(needle);
  auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                        [](char a, char b) { return fold(a) == fold(b); });
  return it == haystack.end() ? std::string_view::npos
                              : static_cast<std::size_t>(it - haystack.begin());
}

}  // namespace linkdeco
