#include "linkdeco/url.hpp"

#include <algorithm>
#include <charconv>
#include <utility>

namespace linkdeco {

namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_unreserved(char c) {
  return is_alpha(c) || is_digit(c) || c == '-' || c == '.' || c == '_' || c == '~';
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

UrlParam parse_param(std::string_view token) {
  auto eq = token.find('=');
  if (eq == std::string_view::npos) return {std::string(token), "", false};
  return {std::string(token.substr(0, eq)), std::string(token.substr(eq + 1)), true};
}

std::string join_params(const std::vector<UrlParam>& params) {
  std::string out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out += '&';
    out += params[i].key;
    if (params[i].has_separator) {
      out += '=';
      out += params[i].value;
    }
  }
  return out;
}

// Checks escapes in `text` (located at `base` in the full URL) so malformed
// input is reported with its real position.
void check_escapes(std::string_view text, std::size_t base) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '%') continue;
    if (i + 2 >= text.size()) {
      throw UrlParseError("truncated percent escape", base + i, text.size() - i);
    }
    if (hex_value(text[i + 1]) < 0 || hex_value(text[i + 2]) < 0) {
      throw UrlParseError("invalid percent escape", base + i, 3);
    }
  }
}

void parse_host(std::string_view authority, std::size_t base, DecoratedUrl& out) {
  std::string_view host_port = authority;
  if (auto at = authority.rfind('@'); at != std::string_view::npos) {
    host_port = authority.substr(at + 1);
    base += at + 1;
  }
  std::string_view host;
  std::string_view port;
  if (!host_port.empty() && host_port.front() == '[') {
    auto close = host_port.find(']');
    if (close == std::string_view::npos) {
      throw UrlParseError("unterminated IPv6 literal", base, host_port.size());
    }
    host = host_port.substr(1, close - 1);
    auto rest = host_port.substr(close + 1);
    if (!rest.empty()) {
      if (rest.front() != ':') {
        throw UrlParseError("unexpected text after IPv6 literal", base + close + 1, rest.size());
      }
      port = rest.substr(1);
    }
  } else {
    auto colon = host_port.rfind(':');
    host = host_port.substr(0, colon);
    if (colon != std::string_view::npos) port = host_port.substr(colon + 1);
  }
  if (host.empty()) throw UrlParseError("missing host", base, host_port.size());
  for (std::size_t i = 0; i < host.size(); ++i) {
    char c = host[i];
    if (!(is_unreserved(c) || c == ':' || c == '%' || c == '!' || c == '$' || c == '&' ||
          c == '\'' || c == '(' || c == ')' || c == '*' || c == '+' || c == ',' ||
          c == ';' || c == '=')) {
      throw UrlParseError("invalid character in host", base + i, 1);
    }
  }
  for (std::size_t i = 0; i < port.size(); ++i) {
    if (!is_digit(port[i])) {
      throw UrlParseError("non-numeric port", base + (host_port.size() - port.size()),
                          port.size());
    }
  }
  out.fqdn = lowercase_ascii(host);
}

}  // namespace

UrlParseError::UrlParseError(std::string message, std::size_t offset, std::size_t length)
    : InputError(message + " at offset " + std::to_string(offset) + " (length " +
                 std::to_string(length) + ")"),
      offset_(offset),
      length_(length) {}

std::string_view to_string(DecorationKind kind) {
  switch (kind) {
    case DecorationKind::kPath:
      return "path";
    case DecorationKind::kQuery:
      return "query";
    case DecorationKind::kFragment:
      return "fragment";
  }
  return "query";
}

DecorationKind parse_decoration_kind(std::string_view text) {
  if (text == "path") return DecorationKind::kPath;
  if (text == "query") return DecorationKind::kQuery;
  if (text == "fragment") return DecorationKind::kFragment;
  throw InputError("unknown decoration kind '" + std::string(text) + "'");
}

bool UrlFragment::operator==(const UrlFragment& other) const {
  if (keyed() != other.keyed()) return false;
  return keyed() ? params == other.params : text == other.text;
}

std::string UrlParam::decoded_key() const { return percent_decode(key); }
std::string UrlParam::decoded_value() const { return percent_decode(value); }

bool DecoratedUrl::operator==(const DecoratedUrl& other) const {
  return scheme == other.scheme && authority == other.authority && fqdn == other.fqdn &&
         rooted == other.rooted && path_segments == other.path_segments &&
         resource_name == other.resource_name && query == other.query &&
         fragment == other.fragment;
}

std::string DecorationId::name() const { return fqdn + "|" + key; }
std::string DecorationId::to_string() const { return site + "|" + fqdn + "|" + key; }

DecorationId DecorationId::parse(std::string_view text) {
  auto first = text.find('|');
  auto second = first == std::string_view::npos ? first : text.find('|', first + 1);
  if (second == std::string_view::npos) {
    throw InputError("decoration id '" + std::string(text) + "' needs site|fqdn|key");
  }
  return {std::string(text.substr(0, first)),
          std::string(text.substr(first + 1, second - first - 1)),
          std::string(text.substr(second + 1))};
}

std::string LinkDecoration::to_string() const { return id.name() + ":" + value; }

std::string path_key(std::size_t level) { return "path|" + std::to_string(level); }

std::optional<std::size_t> path_level(std::string_view key) {
  constexpr std::string_view prefix = "path|";
  if (!key.starts_with(prefix) || key.size() == prefix.size()) return std::nullopt;
  std::size_t level = 0;
  auto digits = key.substr(prefix.size());
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), level);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return level;
}

std::string lowercase_ascii(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
  });
  return out;
}

std::string percent_decode(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '%') {
      out += text[i];
      continue;
    }
    if (i + 2 >= text.size()) {
      throw InputError("truncated percent escape in '" + std::string(text) + "'");
    }
    int hi = hex_value(text[i + 1]);
    int lo = hex_value(text[i + 2]);
    if (hi < 0 || lo < 0) {
      throw InputError("invalid percent escape in '" + std::string(text) + "'");
    }
    out += static_cast<char>(hi * 16 + lo);
    i += 2;
  }
  return out;
}

std::string percent_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(text.size());
  for (unsigned char c : text) {
    if (is_unreserved(static_cast<char>(c))) {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

DecoratedUrl decompose(std::string_view url) {
  DecoratedUrl out;
  out.raw = std::string(url);

  for (std::size_t i = 0; i < url.size(); ++i) {
    auto c = static_cast<unsigned char>(url[i]);
    if (c <= 0x20 || c == 0x7F) {
      throw UrlParseError("whitespace or control character", i, 1);
    }
  }

  auto colon = url.find(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw UrlParseError("missing scheme", 0, url.size());
  }
  if (!is_alpha(url[0])) throw UrlParseError("scheme must start with a letter", 0, colon);
  for (std::size_t i = 1; i < colon; ++i) {
    char c = url[i];
    if (!(is_alpha(c) || is_digit(c) || c == '+' || c == '-' || c == '.')) {
      throw UrlParseError("invalid character in scheme", i, 1);
    }
  }
  out.scheme = std::string(url.substr(0, colon));

  if (url.substr(colon + 1, 2) != "//") {
    throw UrlParseError("missing host", colon + 1, url.size() - colon - 1);
  }
  std::size_t authority_start = colon + 3;
  std::size_t authority_end = url.find_first_of("/?#", authority_start);
  if (authority_end == std::string_view::npos) authority_end = url.size();
  auto authority = url.substr(authority_start, authority_end - authority_start);
  parse_host(authority, authority_start, out);
  out.authority = std::string(authority);

  std::size_t path_end = url.find_first_of("?#", authority_end);
  if (path_end == std::string_view::npos) path_end = url.size();
  auto path = url.substr(authority_end, path_end - authority_end);
  check_escapes(path, authority_end);
  if (!path.empty()) {
    out.rooted = true;
    auto segments = split(path.substr(1), '/');
    out.resource_name = std::string(segments.back());
    segments.pop_back();
    for (auto s : segments) out.path_segments.emplace_back(s);
  }

  std::size_t cursor = path_end;
  if (cursor < url.size() && url[cursor] == '?') {
    std::size_t query_end = url.find('#', cursor);
    if (query_end == std::string_view::npos) query_end = url.size();
    auto query = url.substr(cursor + 1, query_end - cursor - 1);
    check_escapes(query, cursor + 1);
    std::vector<UrlParam> params;
    for (auto token : split(query, '&')) params.push_back(parse_param(token));
    out.query = std::move(params);
    cursor = query_end;
  }
  if (cursor < url.size() && url[cursor] == '#') {
    auto text = url.substr(cursor + 1);
    check_escapes(text, cursor + 1);
    UrlFragment fragment;
    fragment.text = std::string(text);
    if (!text.empty()) {
      auto tokens = split(text, '&');
      bool keyed = std::all_of(tokens.begin(), tokens.end(), [](std::string_view t) {
        return t.find('=') != std::string_view::npos;
      });
      if (keyed) {
        for (auto token : tokens) fragment.params.push_back(parse_param(token));
      }
    }
    out.fragment = std::move(fragment);
  }
  return out;
}

std::vector<LinkDecoration> name_decorations(const DecoratedUrl& url, std::string_view site) {
  std::vector<LinkDecoration> out;
  auto make = [&](DecorationKind kind, std::string key, const std::string& raw,
                  std::size_t position) {
    LinkDecoration d;
    d.id = {std::string(site), url.fqdn, std::move(key)};
    d.kind = kind;
    d.value = percent_decode(raw);
    d.raw_value = raw;
    d.position = position;
    out.push_back(std::move(d));
  };

  for (std::size_t i = 0; i < url.path_segments.size(); ++i) {
    make(DecorationKind::kPath, path_key(i), url.path_segments[i], i);
  }
  if (url.query) {
    std::size_t position = 0;
    for (const auto& param : *url.query) {
      if (param.empty()) continue;
      make(DecorationKind::kQuery, param.decoded_key(), param.value, position++);
    }
  }
  if (url.fragment) {
    if (url.fragment->keyed()) {
      std::size_t position = 0;
      for (const auto& param : url.fragment->params) {
        make(DecorationKind::kFragment, param.decoded_key(), param.value, position++);
      }
    } else if (!url.fragment->text.empty()) {
      make(DecorationKind::kFragment, std::string(kFragmentKey), url.fragment->text, 0);
    }
  }
  return out;
}

std::string reassemble(const DecoratedUrl& url) {
  std::string out = url.scheme + "://" + url.authority;
  if (url.rooted) {
    out += '/';
    for (const auto& segment : url.path_segments) {
      out += segment;
      out += '/';
    }
    out += url.resource_name;
  }
  if (url.query) {
    out += '?';
    out += join_params(*url.query);
  }
  if (url.fragment) {
    out += '#';
    out += url.fragment->keyed() ? join_params(url.fragment->params) : url.fragment->text;
  }
  return out;
}

}  // namespace linkdeco
