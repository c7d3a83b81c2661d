#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "linkdeco/url.hpp"

namespace linkdeco {

enum class RuleAction { kReplace, kStrip };

std::string_view to_string(RuleAction action);
RuleAction parse_rule_action(std::string_view text);

/// One sanitization rule. `scope` is a site or `*`; `fqdn` is an exact host,
/// `*`, or `*.suffix`. `key` follows the decoration naming scheme.
struct FilterRule {
  std::string scope = "*";
  std::string fqdn;
  DecorationKind kind = DecorationKind::kQuery;
  std::string key;
  RuleAction action = RuleAction::kReplace;
  double score = 1.0;
  std::string model;

  bool matches_host(std::string_view site, std::string_view host) const;
  bool matches(const LinkDecoration& decoration) const;

  auto operator<=>(const FilterRule&) const = default;
};

struct FilterList {
  std::vector<FilterRule> rules;

  /// First rule matching `decoration`, or nullptr.
  const FilterRule* find(const LinkDecoration& decoration) const;
  bool empty() const { return rules.empty(); }
};

/// Checks the invariants of a rule: non-empty fqdn and key, key shape agrees
/// with kind, score in [0,1]. Throws InputError naming the rule otherwise.
void validate_rule(const FilterRule& rule);

/// Native tab-separated list format:
///
///     # linkdeco-filterlist 1
///     <scope> <fqdn> <kind> <key> <action> <score> <model>
std::string serialize_filter_list(const FilterList& list);
FilterList parse_filter_list(std::string_view text);

/// A classifier verdict for one observed decoration.
struct DecorationPrediction {
  DecorationId id;
  DecorationKind kind = DecorationKind::kQuery;
  double score = 0.0;
};

/// One rule per distinct decoration whose mean score reaches `threshold`.
/// A (fqdn, kind, key) that is flagged on every site where it was observed,
/// and observed on at least two sites, collapses into a single `*` rule.
/// Rules are sorted by (scope, fqdn, key, kind).
FilterList emit_filter_list(const std::vector<DecorationPrediction>& predictions,
                            double threshold, std::string_view model_version);

struct AdblockExport {
  std::string text;
  std::size_t warnings = 0;  // rules that removeparam cannot express
};

/// Query-key rules become `$removeparam=<key>,domain=<fqdn>` lines. Path and
/// fragment rules go to a trailing comment section in the native format, one
/// warning each.
AdblockExport export_adblock(const FilterList& list);

/// Reads back the `$removeparam` lines of an export (comments ignored).
/// Every rule comes back with scope `*`, kind query and action strip.
FilterList parse_adblock(std::string_view text);

}  // namespace linkdeco
