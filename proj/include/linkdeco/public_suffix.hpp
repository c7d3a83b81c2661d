#pragma once

#include <string>
#include <string_view>
#include <unordered_set>

namespace linkdeco {

/// Public suffix rules in the publicsuffix.org text format: one rule per
/// line, `//` comments, `*.` wildcards and `!` exceptions. Hosts not covered
/// by any rule fall back to the implicit `*` rule (the last label).
class PublicSuffixList {
 public:
  static PublicSuffixList parse(std::string_view text);
  /// The snapshot compiled in from assets/public_suffix_list.dat.
  static const PublicSuffixList& bundled();

  std::string public_suffix(std::string_view host) const;
  /// eTLD+1 of `host`. IP literals and hosts that are themselves a public
  /// suffix are returned unchanged (lowercased).
  std::string registrable_domain(std::string_view host) const;

  /// Text of the `// VERSION:` header line, empty if the snapshot has none.
  const std::string& version() const { return version_; }
  std::size_t rule_count() const { return rules_.size() + wildcards_.size() + exceptions_.size(); }

 private:
  std::unordered_set<std::string> rules_;
  std::unordered_set<std::string> wildcards_;   // stored without the "*."
  std::unordered_set<std::string> exceptions_;  // stored without the "!"
  std::string version_;
};

/// Shorthand for PublicSuffixList::bundled().registrable_domain(host).
std::string registrable_domain(std::string_view host);

}  // namespace linkdeco
