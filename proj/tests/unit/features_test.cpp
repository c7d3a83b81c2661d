#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "linkdeco/features.hpp"
#include "linkdeco/synthetic.hpp"
#include "oracles.hpp"

using namespace linkdeco;
using fixtures::event;
using fixtures::header;

namespace {

// Every feature of every decoration of `g` against the dump recount.
void expect_recount(const PageGraph& g, const std::string& label) {
  auto dump = oracle::DumpGraph::parse(dump_nodes(g), dump_edges(g));
  auto kw = default_keywords();
  for (auto n : g.nodes_of_kind(NodeKind::kDecoration)) {
    auto lib = extract_features(g, n);
    auto expected = oracle::recount_features(dump, g.node(n).id, kw.ad, kw.fingerprint);
    ASSERT_EQ(lib.size(), expected.size());
    for (std::size_t f = 0; f < lib.size(); ++f) {
      EXPECT_NEAR(lib[f], expected[f], 1e-12)
          << label << " " << g.node(n).id << " " << feature_names()[f];
    }
  }
}

double feature(const FeatureVector& v, std::string_view name) { return v[feature_index(name)]; }

}  // namespace

TEST(Entropy, ClosedForms) {
  EXPECT_NEAR(shannon_entropy("aaaa"), 0.0, 1e-9);
  EXPECT_NEAR(shannon_entropy("abab"), 1.0, 1e-9);
  EXPECT_NEAR(shannon_entropy("DEF123"), std::log2(6.0), 1e-9);
  EXPECT_EQ(shannon_entropy(""), 0.0);
  EXPECT_NEAR(shannon_entropy("0123456789abcdef"), 4.0, 1e-12);
}

TEST(FeatureNames, StableOrder) {
  EXPECT_EQ(feature_names().size(), 45u);
  EXPECT_EQ(feature_names().front(), "num_nodes");
  EXPECT_EQ(feature_index("shannon_entropy"), 18u);
  EXPECT_THROW(feature_index("nope"), std::out_of_range);
}

TEST(GraphMetrics, IsolatedAndPath) {
  // One request with one decoration: a two-node component.
  auto g = build_page_graph(parse_trace(
      header() + event(1, "request", "document", R"({"request_id":"r1","url":"https://a.example/?k=v"})")));
  auto d = *g.find("decoration:r1:query:0");
  auto m = graph_metrics(g, GraphView::kInteraction, d);
  EXPECT_EQ(m.num_nodes, 2);
  EXPECT_EQ(m.eccentricity, 1);
  auto flow = graph_metrics(g, GraphView::kFlow, d);
  EXPECT_EQ(flow.num_nodes, 0);
  EXPECT_EQ(flow.closeness, 0);
  EXPECT_EQ(flow.in_out_degree, 0);

  // script -> request -> decoration: a path graph of three nodes.
  auto p = build_page_graph(parse_trace(
      header() + event(1, "request", "s1", R"({"request_id":"r1","url":"https://a.example/?k=v"})")));
  auto a = graph_metrics(p, GraphView::kInteraction, *p.find("decoration:r1:query:0"));
  EXPECT_EQ(a.eccentricity, 2);
  EXPECT_NEAR(a.closeness, (1.0 + 0.5) / 2.0, 1e-12);
  EXPECT_EQ(a.in_degree, 1);
  EXPECT_EQ(a.avg_neighbor_degree, 2);
  EXPECT_THROW(graph_metrics(p, GraphView::kInteraction, 99), std::out_of_range);
}

TEST(ExtractFeatures, TenNodeGraphMatchesRecount) {
  auto g = build_page_graph(parse_trace(fixtures::ten_node_trace()));
  ASSERT_EQ(g.nodes().size(), 10u);
  expect_recount(g, "ten-node");
  auto v = extract_features(g, *g.find("decoration:r1:query:0"));
  EXPECT_EQ(feature(v, "cookie_exfiltration"), 1);
  EXPECT_EQ(feature(v, "descendant_of_script"), 1);
  EXPECT_EQ(feature(v, "parent_is_eval"), 1);
  EXPECT_EQ(feature(v, "ancestor_ad_keyword"), 1);
  EXPECT_EQ(feature(v, "url_section"), 2);
  EXPECT_EQ(feature(v, "max_depth"), 2);
  EXPECT_EQ(feature(v, "parent_redirects_sent"), 1);
  EXPECT_EQ(feature(v, "parent_cookie_infiltrations"), 1);
}

TEST(ExtractFeatures, ScenarioTracker2) {
  auto g = build_page_graph(parse_trace(fixtures::sync_chain_trace(true)));
  auto v = extract_features(g, *g.find("decoration:r2:query:0"));
  EXPECT_GE(feature(v, "cookie_exfiltration"), 1);
  EXPECT_EQ(feature(v, "descendant_of_script"), 1);
  expect_recount(g, "scenario");
}

TEST(ExtractFeatures, StaticImageHasNoFlowFeatures) {
  auto g = build_page_graph(parse_trace(
      header() + event(1, "element_request", "img0",
                       R"({"request_id":"r1","url":"https://cdn.example/a/b.png?w=100"})")));
  for (auto n : g.nodes_of_kind(NodeKind::kDecoration)) {
    auto v = extract_features(g, n);
    for (auto f = feature_index("parent_ls_sets"); f < v.size(); ++f) {
      EXPECT_EQ(v[f], 0) << feature_names()[f];
    }
  }
  EXPECT_THROW(extract_features(g, 0), std::invalid_argument);
}

TEST(ExtractFeatures, SyntheticTracesMatchRecount) {
  SyntheticConfig cfg;
  cfg.sites = 3;
  for (const auto& t : generate_synthetic(cfg).traces) expect_recount(build_page_graph(t.trace), t.id);
}

TEST(Keywords, ParseAndReject) {
  auto kw = parse_keywords("# comment\nad\tPixel\nfp\tcanvas\n");
  EXPECT_EQ(kw.ad, std::vector<std::string>{"pixel"});
  EXPECT_EQ(kw.fingerprint, std::vector<std::string>{"canvas"});
  EXPECT_THROW(parse_keywords("xx\tword\n"), InputError);
  EXPECT_THROW(parse_keywords("ad\n"), InputError);
}

TEST(Matrix, RoundTripAndVersionCheck) {
  auto g = build_page_graph(parse_trace(fixtures::ten_node_trace()));
  auto rows = extract_rows(g, "t1", 0);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(extract_rows(g, "t1", 13).size(), 1u);
  auto text = serialize_matrix(rows);
  EXPECT_EQ(parse_matrix(text), rows);
  auto bumped = text;
  bumped.replace(bumped.find("#features/1"), 11, "#features/2");
  EXPECT_THROW(parse_matrix(bumped), InvariantError);
  auto renamed = text;
  renamed.replace(renamed.find("num_edges"), 9, "num_edgez");
  EXPECT_THROW(parse_matrix(renamed), InvariantError);
  EXPECT_THROW(parse_matrix(text + "t1\tbroken\n"), InputError);
}
