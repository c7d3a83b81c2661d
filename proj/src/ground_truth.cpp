#include "linkdeco/ground_truth.hpp"

#include <algorithm>
#include <set>

#include "linkdeco/text.hpp"

namespace linkdeco {

namespace {

bool is_separator(char c) {
  bool word = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '_' || c == '-' || c == '.' || c == '%';
  return !word;
}

// Backtracking match of `pattern` (with `*` and `^`) against a prefix of
// `url`; with `end_anchor` the whole of `url` must be consumed.
bool match_here(std::string_view pattern, std::string_view url, bool end_anchor) {
  while (!pattern.empty()) {
    char p = pattern.front();
    if (p == '*') {
      auto rest = pattern.substr(1);
      for (std::size_t skip = 0; skip <= url.size(); ++skip) {
        if (match_here(rest, url.substr(skip), end_anchor)) return true;
      }
      return false;
    }
    if (p == '^') {
      if (url.empty()) {
        pattern.remove_prefix(1);
        continue;
      }
      if (!is_separator(url.front())) return false;
    } else if (url.empty() || url.front() != p) {
      return false;
    }
    pattern.remove_prefix(1);
    url.remove_prefix(1);
  }
  return !end_anchor || url.empty();
}

bool host_matches(std::string_view pattern, std::string_view host) {
  if (pattern == "*") return true;
  if (pattern.substr(0, 2) == "*.") {
    auto suffix = pattern.substr(1);
    return host.size() > suffix.size() && host.substr(host.size() - suffix.size()) == suffix;
  }
  return pattern == host;
}

std::string join(const std::set<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ',';
    out += s;
  }
  return out;
}

}  // namespace

std::string_view to_string(Label label) {
  switch (label) {
    case Label::kAts:
      return "ATS";
    case Label::kNonAts:
      return "NonATS";
    case Label::kUnknown:
      return "Unknown";
  }
  return "Unknown";
}

Label parse_label(std::string_view text) {
  if (text == "ATS") return Label::kAts;
  if (text == "NonATS") return Label::kNonAts;
  if (text == "Unknown") return Label::kUnknown;
  throw InputError("unknown label '" + std::string(text) + "'");
}

RequestFilter RequestFilter::parse(std::string_view content) {
  RequestFilter filter;
  for (auto line : text::lines(content)) {
    line = text::trim(line);
    if (line.empty() || line.front() == '!' || line.front() == '[') continue;
    std::string rule_text(line);
    auto reject = [&](const char* why) {
      throw InputError("unsupported request rule '" + rule_text + "': " + why);
    };
    if (line.substr(0, 2) == "@@") reject("exception rules are not supported");
    if (line.find("##") != std::string_view::npos || line.find("#@#") != std::string_view::npos) {
      reject("element hiding rules are not supported");
    }
    if (line.find('$') != std::string_view::npos) reject("rule options are not supported");

    Rule rule;
    rule.text = rule_text;
    if (line.substr(0, 2) == "||") {
      rule.host_anchor = true;
      line.remove_prefix(2);
    } else if (line.front() == '|') {
      rule.start_anchor = true;
      line.remove_prefix(1);
    }
    if (!line.empty() && line.back() == '|') {
      rule.end_anchor = true;
      line.remove_suffix(1);
    }
    if (line.empty() || line.find('|') != std::string_view::npos) reject("malformed anchors");
    rule.body = lowercase_ascii(line);
    filter.rules_.push_back(std::move(rule));
  }
  return filter;
}

bool RequestFilter::match_body(std::string_view pattern, std::string_view url, bool end_anchor) {
  for (std::size_t start = 0; start <= url.size(); ++start) {
    if (match_here(pattern, url.substr(start), end_anchor)) return true;
  }
  return false;
}

bool RequestFilter::matches(std::string_view url) const {
  if (rules_.empty()) return false;
  auto lowered = lowercase_ascii(url);
  std::string_view u = lowered;

  // Positions where a host label starts, for `||` rules.
  std::vector<std::size_t> label_starts;
  if (auto scheme_end = u.find("://"); scheme_end != std::string_view::npos) {
    auto host_begin = scheme_end + 3;
    auto host_end = u.find_first_of("/?#", host_begin);
    if (host_end == std::string_view::npos) host_end = u.size();
    if (auto at = u.substr(host_begin, host_end - host_begin).rfind('@');
        at != std::string_view::npos) {
      host_begin += at + 1;
    }
    label_starts.push_back(host_begin);
    for (auto i = host_begin; i < host_end; ++i) {
      if (u[i] == '.') label_starts.push_back(i + 1);
    }
  }

  for (const auto& rule : rules_) {
    if (rule.host_anchor) {
      for (auto start : label_starts) {
        if (match_here(rule.body, u.substr(start), rule.end_anchor)) return true;
      }
    } else if (rule.start_anchor) {
      if (match_here(rule.body, u, rule.end_anchor)) return true;
    } else if (match_body(rule.body, u, rule.end_anchor)) {
      return true;
    }
  }
  return false;
}

Label match_request_filter(std::string_view url, const RequestFilter& rules) {
  return rules.matches(url) ? Label::kAts : Label::kNonAts;
}

std::string_view to_string(CookiePurpose purpose) {
  switch (purpose) {
    case CookiePurpose::kStrictlyNecessary:
      return "strictly-necessary";
    case CookiePurpose::kFunctional:
      return "functional";
    case CookiePurpose::kAnalytics:
      return "analytics";
    case CookiePurpose::kAdvertising:
      return "advertising";
  }
  return "functional";
}

CookiePurpose parse_cookie_purpose(std::string_view text) {
  if (text == "strictly-necessary") return CookiePurpose::kStrictlyNecessary;
  if (text == "functional") return CookiePurpose::kFunctional;
  if (text == "analytics") return CookiePurpose::kAnalytics;
  if (text == "advertising") return CookiePurpose::kAdvertising;
  throw InputError("unknown cookie purpose '" + std::string(text) + "'");
}

CookiePurposeDb CookiePurposeDb::parse(std::string_view content) {
  CookiePurposeDb db;
  std::size_t line_no = 0;
  for (auto line : text::lines(content)) {
    ++line_no;
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto fields = text::split(line, ',');
    if (fields.size() != 3 || text::trim(fields[1]).empty()) {
      throw InputError("cookie purpose line " + std::to_string(line_no) +
                       ": expected domain,key,purpose");
    }
    db.entries_.push_back({lowercase_ascii(text::trim(fields[0])), std::string(text::trim(fields[1])),
                           parse_cookie_purpose(text::trim(fields[2]))});
  }
  return db;
}

std::optional<CookiePurpose> CookiePurposeDb::lookup(std::string_view site,
                                                     std::string_view key) const {
  std::optional<CookiePurpose> wildcard;
  for (const auto& e : entries_) {
    if (e.key != key) continue;
    if (e.domain == site) return e.purpose;
    if ((e.domain.empty() || e.domain == "*") && !wildcard) wildcard = e.purpose;
  }
  return wildcard;
}

CuratedList CuratedList::parse(std::string_view content) {
  CuratedList list;
  std::size_t line_no = 0;
  for (auto line : text::lines(content)) {
    ++line_no;
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto bar = line.find('|');
    if (bar == std::string_view::npos || bar == 0 || bar + 1 == line.size()) {
      throw InputError("curated line " + std::to_string(line_no) + ": expected fqdn|key");
    }
    Entry entry{lowercase_ascii(line.substr(0, bar)), std::string(line.substr(bar + 1))};
    if (entry.key.rfind("path|", 0) == 0 && !path_level(entry.key)) {
      throw InputError("curated line " + std::to_string(line_no) + ": bad path key '" +
                       entry.key + "'");
    }
    list.entries_.push_back(std::move(entry));
  }
  return list;
}

bool CuratedList::matches(const DecorationId& id) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) {
    return e.key == id.key && host_matches(e.fqdn, id.fqdn);
  });
}

LabelReport label_decorations(const std::vector<const PageGraph*>& graphs,
                              const LabelSources& sources) {
  struct Evidence {
    std::set<std::string> ats;
    bool clean_request = false;
  };
  std::map<DecorationId, Evidence> merged;
  LabelReport report;

  for (const auto* graph : graphs) {
    for (auto r : graph->nodes_of_kind(NodeKind::kNetwork)) {
      const auto& net = graph->node(r).network();
      if (net.direction != NetworkDirection::kRequest) continue;
      bool flagged = sources.request_rules.matches(net.url);
      for (auto d : graph->decorations_of(r)) {
        ++report.instances;
        const auto& deco = graph->node(d).decoration().decoration;
        auto& evidence = merged[deco.id];
        if (!flagged) evidence.clean_request = true;
        if (sources.curated.matches(deco.id)) {
          evidence.ats.insert(std::string(kProvenanceCurated));
        }
        for (auto e : graph->in_edges(d)) {
          const auto& edge = graph->edge(e);
          if (edge.kind != EdgeKind::kExfiltration) continue;
          const auto& storage = graph->node(edge.src).storage();
          if (storage.store != Store::kCookie) continue;
          auto purpose = sources.cookie_purposes.lookup(graph->site, storage.key);
          if (purpose == CookiePurpose::kAnalytics || purpose == CookiePurpose::kAdvertising) {
            evidence.ats.insert(std::string(kProvenanceCookiePurpose));
          }
        }
      }
    }
  }

  for (const auto& [id, evidence] : merged) {
    LabeledDecoration labeled;
    labeled.id = id;
    std::set<std::string> provenance = evidence.ats;
    if (evidence.clean_request) provenance.insert(std::string(kProvenanceRequestFilter));
    labeled.provenance.assign(provenance.begin(), provenance.end());
    if (!evidence.ats.empty()) {
      labeled.label = Label::kAts;
      if (evidence.clean_request) {
        labeled.conflict = true;
        report.conflicts.push_back(id.to_string() + ": " + join(evidence.ats) +
                                   " marks ATS but a request no rule flags carries it");
      }
    } else if (evidence.clean_request) {
      labeled.label = Label::kNonAts;
    }
    report.labels.push_back(std::move(labeled));
  }
  return report;
}

std::string serialize_labels(const std::vector<LabeledDecoration>& labels) {
  std::string out = "site\tfqdn\tkey\tlabel\tprovenance\n";
  for (const auto& l : labels) {
    std::string provenance;
    for (const auto& p : l.provenance) {
      if (!provenance.empty()) provenance += ',';
      provenance += p;
    }
    out += l.id.site + "\t" + l.id.fqdn + "\t" + l.id.key + "\t" + std::string(to_string(l.label)) +
           "\t" + (provenance.empty() ? "-" : provenance) + "\n";
  }
  return out;
}

std::vector<LabeledDecoration> parse_labels(std::string_view content) {
  auto all = text::lines(content);
  if (all.empty() || all[0] != "site\tfqdn\tkey\tlabel\tprovenance") {
    throw InputError("labels: missing header row");
  }
  std::vector<LabeledDecoration> out;
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (all[i].empty()) continue;
    auto cells = text::split(all[i], '\t');
    if (cells.size() != 5) {
      throw InputError("labels line " + std::to_string(i + 1) + ": expected 5 cells");
    }
    LabeledDecoration l;
    l.id = {std::string(cells[0]), std::string(cells[1]), std::string(cells[2])};
    l.label = parse_label(cells[3]);
    if (cells[4] != "-") {
      for (auto p : text::split(cells[4], ',')) l.provenance.emplace_back(p);
    }
    l.conflict = l.label == Label::kAts &&
                 std::find(l.provenance.begin(), l.provenance.end(), kProvenanceRequestFilter) !=
                     l.provenance.end();
    out.push_back(std::move(l));
  }
  return out;
}

std::map<DecorationId, Label> label_map(const std::vector<LabeledDecoration>& labels) {
  std::map<DecorationId, Label> out;
  for (const auto& l : labels) out[l.id] = l.label;
  return out;
}

}  // namespace linkdeco
