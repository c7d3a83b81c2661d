#include <gtest/gtest.h>

#include "linkdeco/filter_list.hpp"
#include "linkdeco/sanitize.hpp"
#include "linkdeco/url.hpp"

using namespace linkdeco;

namespace {

constexpr const char* kExample = "https://a.site.example/YYY/ZZZ/pixel.jpg?ISBN=ABC&UID=DEF123#xyz";

FilterRule rule(std::string fqdn, DecorationKind kind, std::string key,
                RuleAction action = RuleAction::kReplace, std::string scope = "*") {
  FilterRule r;
  r.scope = std::move(scope);
  r.fqdn = std::move(fqdn);
  r.kind = kind;
  r.key = std::move(key);
  r.action = action;
  r.score = 0.9;
  r.model = "m1";
  return r;
}

DecorationPrediction pred(const std::string& site, const std::string& fqdn, const std::string& key,
                          double score, DecorationKind kind = DecorationKind::kQuery) {
  return {{site, fqdn, key}, kind, score};
}

}  // namespace

TEST(Sanitize, ReplacesOnlyTheFlaggedValue) {
  FilterList list{{rule("a.site.example", DecorationKind::kQuery, "UID")}};
  auto out = sanitize(kExample, "pub.example", list, std::nullopt, 1);
  EXPECT_EQ(out.replaced, 1u);
  auto before = name_decorations(decompose(kExample), "pub.example");
  auto after = name_decorations(decompose(out.url), "pub.example");
  ASSERT_EQ(before.size(), after.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_EQ(before[i].id, after[i].id);
    if (before[i].id.key == "UID") {
      EXPECT_NE(before[i].value, after[i].value);
      EXPECT_EQ(after[i].value.size(), 6u);
    } else {
      EXPECT_EQ(before[i].raw_value, after[i].raw_value);
    }
  }
  EXPECT_EQ(out.url.substr(0, out.url.find("UID=")), std::string(kExample).substr(0, 50));
  EXPECT_EQ(sanitize(kExample, "pub.example", list, std::nullopt, 1).url, out.url);
}

TEST(Sanitize, EmptyRulesLeaveUrlAlone) {
  auto out = sanitize("https://a.example/x?%41=1&&b", "s", FilterList{}, std::nullopt, 1);
  EXPECT_EQ(out.url, "https://a.example/x?%41=1&&b");
}

TEST(Sanitize, StripMode) {
  FilterList list{{rule("t.example", DecorationKind::kQuery, "gclid")}};
  auto out = sanitize("https://t.example/p?a=1&gclid=X&b=2", "s", list, RuleAction::kStrip, 1);
  EXPECT_EQ(out.url, "https://t.example/p?a=1&b=2");
  EXPECT_EQ(out.stripped, 1u);
}

TEST(Sanitize, PathAndFragmentRules) {
  FilterList list{{rule("a.site.example", DecorationKind::kPath, "path|1", RuleAction::kStrip),
                   rule("a.site.example", DecorationKind::kFragment, "fragment")}};
  auto out = sanitize(kExample, "pub.example", list, std::nullopt, 4);
  auto d = decompose(out.url);
  ASSERT_EQ(d.path_segments.size(), 2u);
  EXPECT_EQ(d.path_segments[0], "YYY");
  EXPECT_EQ(d.path_segments[1].size(), 3u);
  EXPECT_NE(d.path_segments[1], "ZZZ");
  EXPECT_EQ(d.fragment->text.size(), 3u);
}

TEST(Sanitize, OutOfRangePathRuleIsAudited) {
  FilterList list{{rule("a.example", DecorationKind::kPath, "path|5")}};
  auto out = sanitize("https://a.example/one/two/x", "s", list, std::nullopt, 1);
  EXPECT_EQ(out.url, "https://a.example/one/two/x");
  ASSERT_EQ(out.audit.size(), 1u);
  EXPECT_NE(out.audit[0].find("path|5"), std::string::npos);
}

TEST(Sanitize, ScopedRuleAppliesOnItsSiteOnly) {
  FilterList list{{rule("t.example", DecorationKind::kQuery, "id", RuleAction::kReplace, "a.example")}};
  EXPECT_EQ(sanitize("https://t.example/?id=123", "b.example", list, std::nullopt, 1).replaced, 0u);
  EXPECT_EQ(sanitize("https://t.example/?id=123", "a.example", list, std::nullopt, 1).replaced, 1u);
}

TEST(FilterRule, Validation) {
  EXPECT_NO_THROW(validate_rule(rule("t.example", DecorationKind::kPath, "path|2")));
  EXPECT_THROW(validate_rule(rule("t.example", DecorationKind::kPath, "uid")), InputError);
  EXPECT_THROW(validate_rule(rule("t.example", DecorationKind::kQuery, "path|2")), InputError);
  EXPECT_THROW(validate_rule(rule("", DecorationKind::kQuery, "uid")), InputError);
  auto bad = rule("t.example", DecorationKind::kQuery, "uid");
  bad.score = 1.5;
  EXPECT_THROW(validate_rule(bad), InputError);
}

TEST(EmitList, SharedDecorationCollapsesToWildcard) {
  auto list = emit_filter_list({pred("a.example", "tracker.example", "uid", 0.9),
                                pred("b.example", "tracker.example", "uid", 0.8)},
                               0.5, "m");
  ASSERT_EQ(list.rules.size(), 1u);
  EXPECT_EQ(list.rules[0].scope, "*");
  EXPECT_EQ(list.rules[0].model, "m");
}

TEST(EmitList, MixedVerdictsStayScoped) {
  auto list = emit_filter_list({pred("a.example", "tracker.example", "uid", 0.9),
                                pred("b.example", "tracker.example", "uid", 0.1),
                                pred("c.example", "tracker.example", "uid", 0.7)},
                               0.5, "m");
  ASSERT_EQ(list.rules.size(), 2u);
  EXPECT_EQ(list.rules[0].scope, "a.example");
  EXPECT_EQ(list.rules[1].scope, "c.example");
}

TEST(EmitList, ThresholdEdges) {
  std::vector<DecorationPrediction> ps = {pred("a", "t.example", "x", 0.2), pred("a", "t.example", "y", 0.4),
                                          pred("a", "t.example", "y", 0.4)};
  EXPECT_TRUE(emit_filter_list(ps, 0.5, "m").empty());
  EXPECT_EQ(emit_filter_list(ps, 0.0, "m").rules.size(), 2u);
}

TEST(FilterListFile, RoundTrip) {
  FilterList list{{rule("t.example", DecorationKind::kQuery, "uid"),
                   rule("*.t.example", DecorationKind::kPath, "path|0", RuleAction::kStrip, "s.example")}};
  auto text = serialize_filter_list(list);
  EXPECT_EQ(text.rfind("# linkdeco-filterlist 1\n", 0), 0u);
  EXPECT_EQ(parse_filter_list(text).rules, list.rules);
  EXPECT_THROW(parse_filter_list("# linkdeco-filterlist 1\n*\tt\tquery\n"), InputError);
}

TEST(Adblock, QueryRulesExportAndParseBack) {
  FilterList list{{rule("tracker.example", DecorationKind::kQuery, "gclid"),
                   rule("tracker.example", DecorationKind::kPath, "path|2")}};
  auto out = export_adblock(list);
  EXPECT_NE(out.text.find("$removeparam=gclid,domain=tracker.example\n"), std::string::npos);
  EXPECT_EQ(out.warnings, 1u);
  EXPECT_NE(out.text.find("path|2"), std::string::npos);
  auto back = parse_adblock(out.text);
  ASSERT_EQ(back.rules.size(), 1u);
  EXPECT_EQ(back.rules[0].key, "gclid");
  EXPECT_EQ(back.rules[0].fqdn, "tracker.example");
  EXPECT_EQ(back.rules[0].kind, DecorationKind::kQuery);
  EXPECT_EQ(export_adblock(FilterList{}).text, "");
}
