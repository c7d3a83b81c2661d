#include "linkdeco/public_suffix.hpp"

#include <algorithm>
#include <vector>

#include "linkdeco/url.hpp"

namespace linkdeco {

namespace {

#include "linkdeco/bundled_psl.inc"

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool is_ip_literal(std::string_view host) {
  if (host.find(':') != std::string_view::npos) return true;
  return !host.empty() && std::all_of(host.begin(), host.end(), [](char c) {
    return (c >= '0' && c <= '9') || c == '.';
  });
}

// Suffixes of `host` ordered from the full host down to the last label.
std::vector<std::string_view> suffixes(std::string_view host) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    out.push_back(host.substr(start));
    auto dot = host.find('.', start);
    if (dot == std::string_view::npos) return out;
    start = dot + 1;
  }
}

std::string_view parent_of(std::string_view name) {
  auto dot = name.find('.');
  return dot == std::string_view::npos ? std::string_view() : name.substr(dot + 1);
}

}  // namespace

PublicSuffixList PublicSuffixList::parse(std::string_view text) {
  PublicSuffixList list;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.starts_with("// VERSION:")) {
      list.version_ = std::string(trim(line.substr(11)));
      continue;
    }
    if (line.empty() || line.starts_with("//")) continue;
    // Rules end at the first whitespace.
    line = line.substr(0, line.find_first_of(" \t"));
    std::string rule = lowercase_ascii(line);
    if (rule.starts_with("!")) {
      list.exceptions_.insert(rule.substr(1));
    } else if (rule.starts_with("*.")) {
      list.wildcards_.insert(rule.substr(2));
    } else {
      list.rules_.insert(std::move(rule));
    }
  }
  return list;
}

const PublicSuffixList& PublicSuffixList::bundled() {
  static const PublicSuffixList list = parse(kBundledPublicSuffixList);
  return list;
}

std::string PublicSuffixList::public_suffix(std::string_view raw_host) const {
  std::string host = lowercase_ascii(raw_host);
  while (!host.empty() && host.back() == '.') host.pop_back();
  if (host.empty() || is_ip_literal(host)) return host;

  auto candidates = suffixes(host);
  // Longest match wins; exceptions beat every other rule.
  for (auto candidate : candidates) {
    if (exceptions_.contains(std::string(candidate))) {
      return std::string(parent_of(candidate));
    }
  }
  for (auto candidate : candidates) {
    if (rules_.contains(std::string(candidate))) return std::string(candidate);
    auto parent = parent_of(candidate);
    if (!parent.empty() && wildcards_.contains(std::string(parent))) {
      return std::string(candidate);
    }
  }
  return std::string(candidates.back());
}

std::string PublicSuffixList::registrable_domain(std::string_view raw_host) const {
  std::string host = lowercase_ascii(raw_host);
  while (!host.empty() && host.back() == '.') host.pop_back();
  if (host.empty() || is_ip_literal(host)) return host;
  auto suffix = public_suffix(host);
  if (suffix.size() >= host.size()) return host;
  // One more label to the left of the suffix.
  std::string_view head(host.data(), host.size() - suffix.size() - 1);
  auto dot = head.rfind('.');
  return dot == std::string_view::npos ? host : host.substr(dot + 1);
}

std::string registrable_domain(std::string_view host) {
  return PublicSuffixList::bundled().registrable_domain(host);
}

}  // namespace linkdeco
