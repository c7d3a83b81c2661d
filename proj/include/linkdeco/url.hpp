#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linkdeco/error.hpp"

namespace linkdeco {

/// Raised by decompose() for URLs that cannot be split into components.
/// `offset`/`length` locate the offending span inside the input text.
class UrlParseError : public InputError {
 public:
  UrlParseError(std::string message, std::size_t offset, std::size_t length);

  std::size_t offset() const { return offset_; }
  std::size_t length() const { return length_; }

 private:
  std::size_t offset_;
  std::size_t length_;
};

enum class DecorationKind { kPath, kQuery, kFragment };

std::string_view to_string(DecorationKind kind);
/// Accepts "path", "query" or "fragment"; throws InputError otherwise.
DecorationKind parse_decoration_kind(std::string_view text);

/// One `&`-separated token of a query string or keyed fragment. Key and value
/// hold the text exactly as it appeared in the URL (still percent-encoded).
struct UrlParam {
  std::string key;
  std::string value;
  bool has_separator = true;  // false for bare tokens such as `?flag`

  std::string decoded_key() const;
  std::string decoded_value() const;
  bool empty() const { return key.empty() && !has_separator; }

  auto operator<=>(const UrlParam&) const = default;
};

/// Fragment text after `#`. When every `&`-separated token carries a `=`
/// the fragment is keyed and `params` holds the tokens; otherwise `params`
/// is empty and the fragment is a single opaque value.
struct UrlFragment {
  std::string text;
  std::vector<UrlParam> params;

  bool keyed() const { return !params.empty(); }
  /// Keyed fragments compare by their tokens, unkeyed ones by text.
  bool operator==(const UrlFragment& other) const;
};

/// A URL split into base URL plus the parts that can carry link decorations.
///
/// All component strings are stored in their original (encoded) form so that
/// reassemble() reproduces the input byte for byte. Decoded views are exposed
/// through name_decorations().
struct DecoratedUrl {
  std::string scheme;
  std::string authority;  // userinfo, host and port as written
  std::string fqdn;       // lowercase host without port or brackets
  bool rooted = false;    // path component starts with '/'
  std::vector<std::string> path_segments;  // directory levels, root first
  std::string resource_name;               // final path segment, may be empty
  std::optional<std::vector<UrlParam>> query;  // nullopt when there is no '?'
  std::optional<UrlFragment> fragment;         // nullopt when there is no '#'
  std::string raw;

  /// Structural equality; `raw` is not compared.
  bool operator==(const DecoratedUrl& other) const;
};

/// Identity of a link decoration: where the page was loaded, which host
/// received the request, and the decoration key (`path|<i>`, a query or
/// fragment key, or `fragment` for an unkeyed fragment).
struct DecorationId {
  std::string site;
  std::string fqdn;
  std::string key;

  /// `fqdn|key`, the display form used in reports.
  std::string name() const;
  /// `site|fqdn|key`, the form used in data files.
  std::string to_string() const;
  /// Inverse of to_string(). Throws InputError on fewer than three fields.
  static DecorationId parse(std::string_view text);

  auto operator<=>(const DecorationId&) const = default;
};

struct LinkDecoration {
  DecorationId id;
  DecorationKind kind = DecorationKind::kQuery;
  std::string value;      // percent-decoded once
  std::string raw_value;  // as written in the URL
  std::size_t position = 0;  // ordinal within its kind

  /// `fqdn|key:value`
  std::string to_string() const;

  auto operator<=>(const LinkDecoration&) const = default;
};

inline constexpr std::string_view kFragmentKey = "fragment";

/// `path|<level>`
std::string path_key(std::size_t level);
/// Level encoded in a `path|<i>` key, or nullopt for other keys.
std::optional<std::size_t> path_level(std::string_view key);

/// Splits `url` into its components.
///
/// Requires an absolute URL with a scheme and a non-empty host. Throws
/// UrlParseError naming the offending span otherwise.
DecoratedUrl decompose(std::string_view url);

/// One decoration per directory level, per non-empty query token and per
/// fragment entry, in URL order. The resource name is never a decoration.
std::vector<LinkDecoration> name_decorations(const DecoratedUrl& url,
                                             std::string_view site);

std::string reassemble(const DecoratedUrl& url);

/// Percent-decodes once. Throws InputError on a truncated or non-hex escape.
std::string percent_decode(std::string_view text);
/// Encodes everything outside the RFC 3986 unreserved set. Used when a
/// component value is replaced with text that did not come from a URL.
std::string percent_encode(std::string_view text);

std::string lowercase_ascii(std::string_view text);

}  // namespace linkdeco
