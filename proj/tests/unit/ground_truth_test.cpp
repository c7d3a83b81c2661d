#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "linkdeco/ground_truth.hpp"

using namespace linkdeco;
using fixtures::event;
using fixtures::header;

TEST(RequestFilter, HostAnchor) {
  auto f = RequestFilter::parse("||google-analytics.example^\n");
  EXPECT_EQ(match_request_filter("https://www.google-analytics.example/collect", f), Label::kAts);
  EXPECT_EQ(match_request_filter("https://google-analytics.example", f), Label::kAts);
  EXPECT_EQ(match_request_filter("https://notgoogle-analytics.example/", f), Label::kNonAts);
  EXPECT_EQ(match_request_filter("https://google-analytics.example.evil/", f), Label::kNonAts);
  EXPECT_EQ(match_request_filter("https://a.example/?u=google-analytics.example", f), Label::kNonAts);
}

TEST(RequestFilter, EmptySetAndSubstring) {
  EXPECT_EQ(match_request_filter("https://a.example/adserver/x", RequestFilter::parse("")), Label::kNonAts);
  auto f = RequestFilter::parse("! comment\n[Adblock Plus 2.0]\n/adserver/\n");
  EXPECT_EQ(f.size(), 1u);
  EXPECT_EQ(match_request_filter("https://a.example/ADSERVER/x.js", f), Label::kAts);
  EXPECT_EQ(match_request_filter("https://a.example/adserverx/", f), Label::kNonAts);
}

TEST(RequestFilter, AnchorsWildcardsSeparators) {
  auto f = RequestFilter::parse("|https://ads.\nbanner*.gif|\n^pixel^\n");
  EXPECT_TRUE(f.matches("https://ads.example/"));
  EXPECT_FALSE(f.matches("http://x.example/https://ads."));
  EXPECT_TRUE(f.matches("https://a.example/banner_300.gif"));
  EXPECT_FALSE(f.matches("https://a.example/banner_300.gif?x=1"));
  EXPECT_TRUE(f.matches("https://a.example/pixel?x"));
  EXPECT_TRUE(f.matches("https://a.example/pixel"));
  EXPECT_FALSE(f.matches("https://a.example/pixels/"));
}

TEST(RequestFilter, RejectsUnsupportedSyntax) {
  EXPECT_THROW(RequestFilter::parse("@@||good.example^\n"), InputError);
  EXPECT_THROW(RequestFilter::parse("example.com##.ad\n"), InputError);
  EXPECT_THROW(RequestFilter::parse("||ads.example^$third-party\n"), InputError);
  try {
    RequestFilter::parse("ok\n||x|y\n");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("||x|y"), std::string::npos);
  }
}

TEST(CookiePurposeDb, SiteEntryWins) {
  auto db = CookiePurposeDb::parse("# d,k,p\n*,_ga,analytics\nshop.example,_ga,functional\n,sid,strictly-necessary\n");
  EXPECT_EQ(db.lookup("other.example", "_ga"), CookiePurpose::kAnalytics);
  EXPECT_EQ(db.lookup("shop.example", "_ga"), CookiePurpose::kFunctional);
  EXPECT_EQ(db.lookup("x", "sid"), CookiePurpose::kStrictlyNecessary);
  EXPECT_FALSE(db.lookup("x", "nope"));
  EXPECT_THROW(CookiePurposeDb::parse("a,b\n"), InputError);
  EXPECT_THROW(CookiePurposeDb::parse("a,b,sometimes\n"), InputError);
}

TEST(CuratedList, Patterns) {
  auto c = CuratedList::parse("px.t.example|uid\n*.ads.example|cid\n*|gclid\n");
  EXPECT_TRUE(c.matches({"s", "px.t.example", "uid"}));
  EXPECT_FALSE(c.matches({"s", "t.example", "uid"}));
  EXPECT_TRUE(c.matches({"s", "a.b.ads.example", "cid"}));
  EXPECT_TRUE(c.matches({"s", "anything.example", "gclid"}));
  EXPECT_THROW(CuratedList::parse("nokey\n"), InputError);
}

namespace {

LabelSources sources(const std::string& rules, const std::string& cookies, const std::string& curated) {
  return {RequestFilter::parse(rules), CookiePurposeDb::parse(cookies), CuratedList::parse(curated)};
}

const LabeledDecoration* find(const LabelReport& r, const std::string& key) {
  for (const auto& l : r.labels) {
    if (l.id.key == key) return &l;
  }
  return nullptr;
}

}  // namespace

TEST(LabelDecorations, CookiePurposeCleanAndUnknown) {
  auto t = header() + event(1, "storage_set", "s", R"({"store":"cookie","key":"_ad","value":"abcdefgh1234"})") +
           event(2, "request", "s", R"({"request_id":"r1","url":"https://t.example/?id=abcdefgh1234"})") +
           event(3, "request", "s", R"({"request_id":"r2","url":"https://www.example.com/list?page=2"})") +
           event(4, "request", "s", R"({"request_id":"r3","url":"https://t.example/?v=2"})");
  auto g = build_page_graph(parse_trace(t));
  auto report = label_decorations({&g}, sources("||t.example^\n", "*,_ad,advertising\n", ""));
  EXPECT_EQ(report.instances, 3u);
  ASSERT_TRUE(find(report, "id"));
  EXPECT_EQ(find(report, "id")->label, Label::kAts);
  EXPECT_EQ(find(report, "id")->provenance, std::vector<std::string>{"cookie-purpose"});
  EXPECT_EQ(find(report, "page")->label, Label::kNonAts);
  EXPECT_EQ(find(report, "v")->label, Label::kUnknown);
  EXPECT_TRUE(report.conflicts.empty());
}

TEST(LabelDecorations, CuratedBeatsCleanRequestWithConflict) {
  auto t = header() + event(1, "request", "s", R"({"request_id":"r1","url":"https://a.example/?gclid=xyz"})");
  auto g = build_page_graph(parse_trace(t));
  auto report = label_decorations({&g}, sources("", "", "*|gclid\n"));
  ASSERT_EQ(report.labels.size(), 1u);
  EXPECT_EQ(report.labels[0].label, Label::kAts);
  EXPECT_TRUE(report.labels[0].conflict);
  EXPECT_EQ(report.conflicts.size(), 1u);
  EXPECT_EQ(report.labels[0].provenance, (std::vector<std::string>{"curated", "request-filter"}));
}

TEST(LabelDecorations, GraphOrderDoesNotMatter) {
  auto a = build_page_graph(parse_trace(fixtures::sync_chain_trace(true)));
  auto b = build_page_graph(parse_trace(fixtures::ten_node_trace()));
  auto src = sources("||tracker2.com^\n", "*,UID,advertising\n", "");
  EXPECT_EQ(label_decorations({&a, &b}, src).labels, label_decorations({&b, &a}, src).labels);
}

TEST(Labels, SerializeRoundTrip) {
  std::vector<LabeledDecoration> labels = {
      {{"s.example", "t.example", "uid"}, Label::kAts, {"curated"}, false},
      {{"s.example", "t.example", "path|0"}, Label::kNonAts, {}, false},
  };
  auto text = serialize_labels(labels);
  EXPECT_EQ(parse_labels(text), labels);
  EXPECT_EQ(label_map(labels).at({"s.example", "t.example", "uid"}), Label::kAts);
  EXPECT_THROW(parse_label("maybe"), InputError);
  EXPECT_THROW(parse_labels("site\tfqdn\tkey\tlabel\tprovenance\na\tb\n"), InputError);
}
