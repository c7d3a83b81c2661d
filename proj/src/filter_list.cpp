#include "linkdeco/filter_list.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "linkdeco/text.hpp"

namespace linkdeco {

namespace {

constexpr std::string_view kListHeader = "# linkdeco-filterlist 1";
constexpr std::string_view kSidecarHeader =
    "! linkdeco native rules (not expressible as removeparam)";

bool removeparam_safe(std::string_view key) {
  return !key.empty() && key.find_first_of(",$| \t=") == std::string_view::npos;
}

std::string native_line(const FilterRule& rule) {
  std::string line;
  line += rule.scope;
  line += '\t';
  line += rule.fqdn;
  line += '\t';
  line += to_string(rule.kind);
  line += '\t';
  line += rule.key;
  line += '\t';
  line += to_string(rule.action);
  line += '\t';
  line += text::format_double(rule.score);
  line += '\t';
  line += rule.model.empty() ? "-" : rule.model;
  return line;
}

}  // namespace

std::string_view to_string(RuleAction action) {
  return action == RuleAction::kStrip ? "strip" : "replace";
}

RuleAction parse_rule_action(std::string_view text) {
  if (text == "replace") return RuleAction::kReplace;
  if (text == "strip") return RuleAction::kStrip;
  throw InputError("unknown rule action '" + std::string(text) + "'");
}

bool FilterRule::matches_host(std::string_view site, std::string_view host) const {
  if (scope != "*" && scope != site) return false;
  if (fqdn == "*") return true;
  if (fqdn.starts_with("*.")) {
    std::string_view suffix = std::string_view(fqdn).substr(2);
    return host == suffix ||
           (host.size() > suffix.size() && host.ends_with(suffix) &&
            host[host.size() - suffix.size() - 1] == '.');
  }
  return host == fqdn;
}

bool FilterRule::matches(const LinkDecoration& decoration) const {
  return kind == decoration.kind && key == decoration.id.key &&
         matches_host(decoration.id.site, decoration.id.fqdn);
}

const FilterRule* FilterList::find(const LinkDecoration& decoration) const {
  for (const auto& rule : rules) {
    if (rule.matches(decoration)) return &rule;
  }
  return nullptr;
}

void validate_rule(const FilterRule& rule) {
  auto fail = [&](std::string_view why) {
    throw InputError("invalid filter rule '" + native_line(rule) + "': " + std::string(why));
  };
  if (rule.scope.empty()) fail("empty scope");
  if (rule.fqdn.empty()) fail("empty fqdn");
  if (rule.key.empty()) fail("empty key");
  bool is_path_key = path_level(rule.key).has_value();
  if ((rule.kind == DecorationKind::kPath) != is_path_key) {
    fail("key shape does not match kind");
  }
  if (!(rule.score >= 0.0 && rule.score <= 1.0)) fail("score outside [0,1]");
}

std::string serialize_filter_list(const FilterList& list) {
  std::string out(kListHeader);
  out += '\n';
  for (const auto& rule : list.rules) {
    out += native_line(rule);
    out += '\n';
  }
  return out;
}

FilterList parse_filter_list(std::string_view content) {
  FilterList list;
  std::size_t line_no = 0;
  for (auto line : text::lines(content)) {
    ++line_no;
    if (text::trim(line).empty() || line.starts_with("#")) continue;
    auto fields = text::split(line, '\t');
    if (fields.size() != 7) {
      throw InputError("filter list line " + std::to_string(line_no) + ": expected 7 fields");
    }
    FilterRule rule;
    rule.scope = std::string(fields[0]);
    rule.fqdn = std::string(fields[1]);
    rule.kind = parse_decoration_kind(fields[2]);
    rule.key = std::string(fields[3]);
    rule.action = parse_rule_action(fields[4]);
    rule.score = text::parse_double(fields[5]);
    rule.model = fields[6] == "-" ? "" : std::string(fields[6]);
    validate_rule(rule);
    list.rules.push_back(std::move(rule));
  }
  return list;
}

FilterList emit_filter_list(const std::vector<DecorationPrediction>& predictions,
                            double threshold, std::string_view model_version) {
  using GroupKey = std::tuple<std::string, DecorationKind, std::string>;  // fqdn, kind, key
  std::map<GroupKey, std::map<std::string, std::pair<double, std::size_t>>> groups;
  for (const auto& p : predictions) {
    auto& slot = groups[{p.id.fqdn, p.kind, p.id.key}][p.id.site];
    slot.first += p.score;
    slot.second += 1;
  }

  FilterList list;
  for (const auto& [group, sites] : groups) {
    const auto& [fqdn, kind, key] = group;
    std::vector<std::pair<std::string, double>> flagged;
    double total = 0.0;
    for (const auto& [site, acc] : sites) {
      double mean = acc.first / static_cast<double>(acc.second);
      if (mean >= threshold) {
        flagged.emplace_back(site, mean);
        total += mean;
      }
    }
    auto make = [&](std::string scope, double score) {
      FilterRule rule;
      rule.scope = std::move(scope);
      rule.fqdn = fqdn;
      rule.kind = kind;
      rule.key = key;
      rule.score = score;
      rule.model = std::string(model_version);
      list.rules.push_back(std::move(rule));
    };
    if (flagged.size() >= 2 && flagged.size() == sites.size()) {
      make("*", total / static_cast<double>(flagged.size()));
    } else {
      for (const auto& [site, score] : flagged) make(site, score);
    }
  }
  std::sort(list.rules.begin(), list.rules.end(), [](const FilterRule& a, const FilterRule& b) {
    return std::tie(a.scope, a.fqdn, a.key, a.kind) < std::tie(b.scope, b.fqdn, b.key, b.kind);
  });
  return list;
}

AdblockExport export_adblock(const FilterList& list) {
  std::set<std::string> lines;
  std::vector<const FilterRule*> sidecar;
  for (const auto& rule : list.rules) {
    if (rule.kind != DecorationKind::kQuery || !removeparam_safe(rule.key)) {
      sidecar.push_back(&rule);
      continue;
    }
    std::string line = "$removeparam=" + rule.key;
    if (rule.fqdn != "*") {
      line += ",domain=";
      line += rule.fqdn.starts_with("*.") ? rule.fqdn.substr(2) : rule.fqdn;
    }
    lines.insert(std::move(line));
  }

  AdblockExport out;
  for (const auto& line : lines) {
    out.text += line;
    out.text += '\n';
  }
  if (!sidecar.empty()) {
    out.text += kSidecarHeader;
    out.text += '\n';
    for (const auto* rule : sidecar) {
      out.text += "! ";
      out.text += native_line(*rule);
      out.text += '\n';
    }
  }
  out.warnings = sidecar.size();
  return out;
}

FilterList parse_adblock(std::string_view content) {
  constexpr std::string_view kPrefix = "$removeparam=";
  FilterList list;
  std::size_t line_no = 0;
  for (auto raw : text::lines(content)) {
    ++line_no;
    auto line = text::trim(raw);
    if (line.empty() || line.starts_with("!")) continue;
    if (!line.starts_with(kPrefix)) {
      throw InputError("adblock line " + std::to_string(line_no) + ": unsupported rule '" +
                       std::string(line) + "'");
    }
    auto options = text::split(line.substr(kPrefix.size()), ',');
    FilterRule rule;
    rule.key = std::string(options[0]);
    rule.fqdn = "*";
    rule.action = RuleAction::kStrip;
    for (std::size_t i = 1; i < options.size(); ++i) {
      if (!options[i].starts_with("domain=")) {
        throw InputError("adblock line " + std::to_string(line_no) + ": unsupported option '" +
                         std::string(options[i]) + "'");
      }
      rule.fqdn = std::string(options[i].substr(7));
    }
    validate_rule(rule);
    list.rules.push_back(std::move(rule));
  }
  return list;
}

}  // namespace linkdeco
