#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linkdeco/page_graph.hpp"
#include "linkdeco/url.hpp"

namespace linkdeco {

enum class Label { kAts, kNonAts, kUnknown };

std::string_view to_string(Label label);
/// Accepts `ATS`, `NonATS`, `Unknown`.
Label parse_label(std::string_view text);

/// Request filter in a small adblock-like dialect:
///
///   `||host^path`  matches `host` or any subdomain of it, then the rest
///   `|https://`    anchors at the start (a trailing `|` anchors at the end)
///   `*`            any run of characters
///   `^`            a separator: anything but a letter, digit, `_ - . %`,
///                  or the end of the URL
///   anything else  literal, case-insensitive substring
///
/// `!` and `[` start comment lines. Options (`$`), exceptions (`@@`) and
/// element hiding (`##`) are rejected at load time.
class RequestFilter {
 public:
  /// Throws InputError naming the offending rule.
  static RequestFilter parse(std::string_view text);

  bool matches(std::string_view url) const;
  std::size_t size() const { return rules_.size(); }

 private:
  struct Rule {
    std::string text;
    bool host_anchor = false;
    bool start_anchor = false;
    bool end_anchor = false;
    std::string body;  // pattern without anchors, lowercase
  };
  static bool match_body(std::string_view pattern, std::string_view url, bool end_anchor);

  std::vector<Rule> rules_;
};

/// ATS when any rule matches the URL, NonATS otherwise.
Label match_request_filter(std::string_view url, const RequestFilter& rules);

enum class CookiePurpose { kStrictlyNecessary, kFunctional, kAnalytics, kAdvertising };

std::string_view to_string(CookiePurpose purpose);
/// Accepts `strictly-necessary`, `functional`, `analytics`, `advertising`.
CookiePurpose parse_cookie_purpose(std::string_view text);

/// Cookie key -> purpose table. File format: one `domain,key,purpose` per
/// line, `#` comments. An empty or `*` domain applies on every site.
class CookiePurposeDb {
 public:
  struct Entry {
    std::string domain;
    std::string key;
    CookiePurpose purpose = CookiePurpose::kFunctional;
  };

  static CookiePurposeDb parse(std::string_view text);

  /// Purpose of cookie `key` as seen on `site`. A site-specific entry wins
  /// over a wildcard one.
  std::optional<CookiePurpose> lookup(std::string_view site, std::string_view key) const;
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

/// High-confidence ATS decorations: one `fqdn|key` per line, `#` comments.
/// `fqdn` may be `*` (any host) or `*.suffix`.
class CuratedList {
 public:
  struct Entry {
    std::string fqdn;
    std::string key;
  };

  static CuratedList parse(std::string_view text);
  bool matches(const DecorationId& id) const;
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

struct LabelSources {
  RequestFilter request_rules;
  CookiePurposeDb cookie_purposes;
  CuratedList curated;
};

inline constexpr std::string_view kProvenanceRequestFilter = "request-filter";
inline constexpr std::string_view kProvenanceCookiePurpose = "cookie-purpose";
inline constexpr std::string_view kProvenanceCurated = "curated";

struct LabeledDecoration {
  DecorationId id;
  Label label = Label::kUnknown;
  std::vector<std::string> provenance;  // sources that fired, sorted
  bool conflict = false;                // an ATS source and a clean request both fired

  bool operator==(const LabeledDecoration&) const = default;
};

struct LabelReport {
  std::vector<LabeledDecoration> labels;  // sorted by id
  std::vector<std::string> conflicts;     // one line per conflicting id
  std::size_t instances = 0;              // decoration nodes seen
};

/// Labels every decoration of the graphs. Observations of one
/// (site, fqdn, key) are merged: cookie-purpose or curated evidence makes it
/// ATS, otherwise appearing in a request no rule flags makes it NonATS,
/// otherwise Unknown. Graph order does not matter.
LabelReport label_decorations(const std::vector<const PageGraph*>& graphs,
                              const LabelSources& sources);

/// `site<TAB>fqdn<TAB>key<TAB>label<TAB>provenance` with a header row;
/// provenance is comma-separated or `-`.
std::string serialize_labels(const std::vector<LabeledDecoration>& labels);
std::vector<LabeledDecoration> parse_labels(std::string_view text);

/// Labels indexed by id.
std::map<DecorationId, Label> label_map(const std::vector<LabeledDecoration>& labels);

}  // namespace linkdeco
