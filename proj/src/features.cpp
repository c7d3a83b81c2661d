#include "linkdeco/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

#include "linkdeco/text.hpp"

namespace linkdeco {

namespace {

const std::vector<std::string> kNames = {
    // structure, interaction view
    "num_nodes",
    "num_edges",
    "node_edge_ratio",
    "edge_node_ratio",
    "in_degree",
    "out_degree",
    "in_out_degree",
    "avg_neighbor_degree",
    "closeness",
    "eccentricity",
    "num_ancestors",
    "ancestor_ad_keyword",
    "ancestor_fp_keyword",
    "ancestor_script_length",
    "descendant_of_script",
    "parent_is_eval",
    "num_script_predecessors",
    "max_depth",
    // content
    "shannon_entropy",
    "url_section",
    // flow
    "parent_ls_sets",
    "parent_ls_gets",
    "parent_cookie_sets",
    "parent_cookie_gets",
    "parent_requests_sent",
    "parent_requests_received",
    "parent_redirects_sent",
    "parent_redirects_received",
    "redirect_chain_depth",
    "common_storage_access",
    "cookie_exfiltration",
    "parent_cookie_infiltrations",
    "cookie_setter_exfiltrations",
    "cookie_setter_redirects",
    "flow_num_nodes",
    "flow_num_edges",
    "flow_node_edge_ratio",
    "flow_edge_node_ratio",
    "flow_in_degree",
    "flow_out_degree",
    "flow_in_out_degree",
    "flow_avg_neighbor_degree",
    "flow_closeness",
    "flow_eccentricity",
    "flow_num_ancestors",
};

bool is_interaction(const Edge& e, Interaction which) {
  return e.kind == EdgeKind::kInteraction && e.interaction == which;
}

std::string host_of(const std::string& url) {
  try {
    return decompose(url).fqdn;
  } catch (const InputError&) {
    return {};
  }
}

bool contains_keyword(const std::string& url, const std::vector<std::string>& words) {
  auto lowered = lowercase_ascii(url);
  for (const auto& w : words) {
    if (!w.empty() && lowered.find(w) != std::string::npos) return true;
  }
  return false;
}

// Nodes reaching `start` over edges accepted by `use`, in BFS order
// (nearest first). `start` itself is excluded.
template <typename EdgeFilter>
std::vector<NodeIndex> ancestors(const PageGraph& g, NodeIndex start, EdgeFilter use) {
  std::vector<bool> seen(g.nodes().size(), false);
  std::vector<NodeIndex> order;
  std::deque<NodeIndex> queue{start};
  seen[start] = true;
  while (!queue.empty()) {
    auto n = queue.front();
    queue.pop_front();
    for (auto e : g.in_edges(n)) {
      if (!use(e)) continue;
      auto src = g.edge(e).src;
      if (seen[src]) continue;
      seen[src] = true;
      order.push_back(src);
      queue.push_back(src);
    }
  }
  return order;
}

// Per-graph lookups shared by every decoration of the graph.
class GraphContext {
 public:
  explicit GraphContext(const PageGraph& g) : g_(g) {
    for (auto n : g.nodes_of_kind(NodeKind::kNetwork)) {
      if (g.node(n).network().direction != NetworkDirection::kRequest) continue;
      auto parent = parent_script(g, n);
      parent_of_.emplace(n, parent);
      if (parent) chain_requests_[*parent].push_back(n);
      if (parent && is_origin(n)) ++origin_requests_[*parent];
    }
  }

  std::optional<NodeIndex> parent_of(NodeIndex request) const { return parent_of_.at(request); }

  const std::vector<NodeIndex>& requests_of(NodeIndex script) const {
    static const std::vector<NodeIndex> kNone;
    auto it = chain_requests_.find(script);
    return it == chain_requests_.end() ? kNone : it->second;
  }

  std::size_t origin_requests_of(NodeIndex script) const {
    auto it = origin_requests_.find(script);
    return it == origin_requests_.end() ? 0 : it->second;
  }

  bool is_origin(NodeIndex request) const {
    for (auto e : g_.in_edges(request)) {
      if (is_interaction(g_.edge(e), Interaction::kRedirects)) return false;
    }
    return true;
  }

  std::size_t chain_depth(NodeIndex request) const {
    std::size_t depth = 0;
    for (bool moved = true; moved;) {
      moved = false;
      for (auto e : g_.in_edges(request)) {
        if (is_interaction(g_.edge(e), Interaction::kRedirects)) {
          request = g_.edge(e).src;
          ++depth;
          moved = true;
          break;
        }
      }
    }
    return depth;
  }

  const std::string& request_host(NodeIndex request) const {
    auto it = hosts_.find(request);
    if (it == hosts_.end()) {
      it = hosts_.emplace(request, host_of(g_.node(request).network().url)).first;
    }
    return it->second;
  }

  // Storage nodes the script sets or gets.
  std::set<NodeIndex> storage_accessed_by(NodeIndex script) const {
    std::set<NodeIndex> out;
    for (auto e : g_.out_edges(script)) {
      const auto& edge = g_.edge(e);
      if (is_interaction(edge, Interaction::kSet) || is_interaction(edge, Interaction::kGet)) {
        if (g_.node(edge.dst).kind == NodeKind::kStorage) out.insert(edge.dst);
      }
    }
    return out;
  }

  const std::map<NodeIndex, std::optional<NodeIndex>>& parents() const { return parent_of_; }

 private:
  const PageGraph& g_;
  std::map<NodeIndex, std::optional<NodeIndex>> parent_of_;
  std::map<NodeIndex, std::vector<NodeIndex>> chain_requests_;
  std::map<NodeIndex, std::size_t> origin_requests_;
  mutable std::map<NodeIndex, std::string> hosts_;
};

void put_metrics(FeatureVector& v, std::size_t at, const GraphMetrics& m) {
  v[at + 0] = m.num_nodes;
  v[at + 1] = m.num_edges;
  v[at + 2] = m.node_edge_ratio;
  v[at + 3] = m.edge_node_ratio;
  v[at + 4] = m.in_degree;
  v[at + 5] = m.out_degree;
  v[at + 6] = m.in_out_degree;
  v[at + 7] = m.avg_neighbor_degree;
  v[at + 8] = m.closeness;
  v[at + 9] = m.eccentricity;
}

FeatureVector extract_with(const PageGraph& g, const GraphContext& ctx, NodeIndex n,
                           const FeatureOptions& options) {
  const auto& node = g.nodes().at(n);
  if (node.kind != NodeKind::kDecoration) {
    throw std::invalid_argument("not a decoration node: " + node.id);
  }
  const auto& deco = node.decoration().decoration;
  FeatureVector v(kNames.size(), 0.0);
  auto at = [](std::string_view name) { return feature_index(name); };

  put_metrics(v, at("num_nodes"), graph_metrics(g, GraphView::kInteraction, n));

  auto interaction_only = [&](EdgeIndex e) { return !g.edge(e).is_flow(); };
  auto ancestry = ancestors(g, n, interaction_only);
  v[at("num_ancestors")] = static_cast<double>(ancestry.size());
  std::size_t script_ancestors = 0;
  bool length_set = false;
  for (auto a : ancestry) {
    const auto& an = g.node(a);
    if (an.kind != NodeKind::kScript) continue;
    ++script_ancestors;
    if (!length_set) {
      v[at("ancestor_script_length")] = static_cast<double>(an.script().length);
      length_set = true;
    }
    if (contains_keyword(an.script().url, options.keywords.ad)) v[at("ancestor_ad_keyword")] = 1;
    if (contains_keyword(an.script().url, options.keywords.fingerprint)) {
      v[at("ancestor_fp_keyword")] = 1;
    }
  }
  v[at("descendant_of_script")] = script_ancestors > 0 ? 1 : 0;
  v[at("num_script_predecessors")] = static_cast<double>(script_ancestors);

  auto request = g.parent_request(n);
  std::size_t path_count = 0;
  for (auto d : g.decorations_of(request)) {
    if (g.node(d).decoration().decoration.kind == DecorationKind::kPath) ++path_count;
  }
  switch (deco.kind) {
    case DecorationKind::kPath:
      v[at("max_depth")] = static_cast<double>(deco.position + 1);
      v[at("url_section")] = 1;
      break;
    case DecorationKind::kQuery:
      v[at("max_depth")] = static_cast<double>(path_count + 1);
      v[at("url_section")] = 2;
      break;
    case DecorationKind::kFragment:
      v[at("max_depth")] = static_cast<double>(path_count + 2);
      v[at("url_section")] = 3;
      break;
  }
  v[at("shannon_entropy")] = shannon_entropy(deco.value);

  v[at("redirect_chain_depth")] = static_cast<double>(ctx.chain_depth(request));

  for (auto e : g.in_edges(n)) {
    const auto& edge = g.edge(e);
    if (edge.kind == EdgeKind::kExfiltration && g.node(edge.src).storage().store == Store::kCookie) {
      v[at("cookie_exfiltration")] += 1;
    }
  }

  if (auto parent = ctx.parent_of(request)) {
    auto p = *parent;
    v[at("parent_is_eval")] = g.node(p).script().is_eval ? 1 : 0;

    std::set<NodeIndex> cookies_set;
    for (auto e : g.out_edges(p)) {
      const auto& edge = g.edge(e);
      if (edge.kind != EdgeKind::kInteraction || g.node(edge.dst).kind != NodeKind::kStorage) {
        continue;
      }
      bool cookie = g.node(edge.dst).storage().store == Store::kCookie;
      if (edge.interaction == Interaction::kSet) {
        v[at(cookie ? "parent_cookie_sets" : "parent_ls_sets")] += 1;
        if (cookie) cookies_set.insert(edge.dst);
      } else if (edge.interaction == Interaction::kGet) {
        v[at(cookie ? "parent_cookie_gets" : "parent_ls_gets")] += 1;
      }
    }

    const auto& chain = ctx.requests_of(p);
    v[at("parent_requests_sent")] = static_cast<double>(ctx.origin_requests_of(p));
    for (auto r : chain) {
      auto response = g.response_of(r);
      if (response) {
        v[at("parent_requests_received")] += 1;
        for (auto e : g.out_edges(*response)) {
          const auto& edge = g.edge(e);
          if (edge.kind == EdgeKind::kInfiltration &&
              g.node(edge.dst).storage().store == Store::kCookie) {
            v[at("parent_cookie_infiltrations")] += 1;
          }
        }
      }
      for (auto e : g.out_edges(r)) {
        if (is_interaction(g.edge(e), Interaction::kRedirects)) {
          v[at("parent_redirects_sent")] += 1;
        }
      }
    }

    auto script_host = host_of(g.node(p).script().url);
    if (!script_host.empty()) {
      for (const auto& edge : g.edges()) {
        if (is_interaction(edge, Interaction::kRedirects) &&
            ctx.request_host(edge.dst) == script_host) {
          v[at("parent_redirects_received")] += 1;
        }
      }
    }

    auto accessed = ctx.storage_accessed_by(p);
    if (!accessed.empty()) {
      std::map<NodeIndex, bool> shares;
      for (const auto& [r, other] : ctx.parents()) {
        if (r == request || !other) continue;
        auto it = shares.find(*other);
        if (it == shares.end()) {
          auto theirs = ctx.storage_accessed_by(*other);
          bool common = std::any_of(theirs.begin(), theirs.end(),
                                    [&](NodeIndex s) { return accessed.contains(s); });
          it = shares.emplace(*other, common).first;
        }
        if (it->second) v[at("common_storage_access")] += 1;
      }
    }

    std::set<NodeIndex> exfil_requests;
    for (auto c : cookies_set) {
      for (auto e : g.out_edges(c)) {
        const auto& edge = g.edge(e);
        if (edge.kind != EdgeKind::kExfiltration) continue;
        v[at("cookie_setter_exfiltrations")] += 1;
        exfil_requests.insert(g.parent_request(edge.dst));
      }
    }
    for (auto r : exfil_requests) {
      for (auto e : g.out_edges(r)) {
        if (is_interaction(g.edge(e), Interaction::kRedirects)) {
          v[at("cookie_setter_redirects")] += 1;
        }
      }
    }
  }

  put_metrics(v, at("flow_num_nodes"), graph_metrics(g, GraphView::kFlow, n));
  auto flow = g.view(GraphView::kFlow);
  if (flow.nodes[n]) {
    auto in_flow = [&](EdgeIndex e) { return static_cast<bool>(flow.edges[e]); };
    v[at("flow_num_ancestors")] = static_cast<double>(ancestors(g, n, in_flow).size());
  }
  return v;
}

}  // namespace

const std::vector<std::string>& feature_names() { return kNames; }

std::size_t feature_index(std::string_view name) {
  static const auto index = [] {
    std::map<std::string, std::size_t, std::less<>> m;
    for (std::size_t i = 0; i < kNames.size(); ++i) m.emplace(kNames[i], i);
    return m;
  }();
  auto it = index.find(name);
  if (it == index.end()) throw std::out_of_range("unknown feature '" + std::string(name) + "'");
  return it->second;
}

double shannon_entropy(std::string_view s) {
  if (s.empty()) return 0.0;
  std::array<std::size_t, 256> counts{};
  for (unsigned char c : s) ++counts[c];
  double h = 0.0;
  const double n = static_cast<double>(s.size());
  for (auto c : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

GraphMetrics graph_metrics(const PageGraph& g, GraphView which, NodeIndex node) {
  if (node >= g.nodes().size()) {
    throw std::out_of_range("node index " + std::to_string(node) + " not in graph");
  }
  GraphMetrics m;
  auto mask = g.view(which);
  if (!mask.nodes[node]) return m;

  auto degree = [&](NodeIndex n, bool in) {
    std::size_t d = 0;
    for (auto e : in ? g.in_edges(n) : g.out_edges(n)) d += mask.edges[e] ? 1 : 0;
    return d;
  };
  auto neighbours = [&](NodeIndex n) {
    std::set<NodeIndex> out;
    for (auto e : g.out_edges(n)) {
      if (mask.edges[e] && g.edge(e).dst != n) out.insert(g.edge(e).dst);
    }
    for (auto e : g.in_edges(n)) {
      if (mask.edges[e] && g.edge(e).src != n) out.insert(g.edge(e).src);
    }
    return out;
  };

  std::map<NodeIndex, std::size_t> dist{{node, 0}};
  std::deque<NodeIndex> queue{node};
  while (!queue.empty()) {
    auto n = queue.front();
    queue.pop_front();
    for (auto next : neighbours(n)) {
      if (dist.emplace(next, dist[n] + 1).second) queue.push_back(next);
    }
  }

  std::size_t edges = 0;
  for (EdgeIndex e = 0; e < g.edges().size(); ++e) {
    if (mask.edges[e] && dist.contains(g.edge(e).src)) ++edges;
  }
  m.num_nodes = static_cast<double>(dist.size());
  m.num_edges = static_cast<double>(edges);
  if (edges > 0) {
    m.node_edge_ratio = m.num_nodes / m.num_edges;
    m.edge_node_ratio = m.num_edges / m.num_nodes;
  }
  m.in_degree = static_cast<double>(degree(node, true));
  m.out_degree = static_cast<double>(degree(node, false));
  m.in_out_degree = m.in_degree + m.out_degree;

  auto adjacent = neighbours(node);
  if (!adjacent.empty()) {
    double total = 0;
    for (auto a : adjacent) total += static_cast<double>(degree(a, true) + degree(a, false));
    m.avg_neighbor_degree = total / static_cast<double>(adjacent.size());
  }

  if (dist.size() > 1) {
    double harmonic = 0;
    std::size_t far = 0;
    for (const auto& [n, d] : dist) {
      if (n == node) continue;
      harmonic += 1.0 / static_cast<double>(d);
      far = std::max(far, d);
    }
    m.closeness = harmonic / static_cast<double>(dist.size() - 1);
    m.eccentricity = static_cast<double>(far);
  }
  return m;
}

KeywordLists default_keywords() {
  return {{"ad", "ads", "advert", "track", "pixel", "banner", "sync"},
          {"fingerprint", "canvas", "webgl", "audiocontext", "font"}};
}

KeywordLists parse_keywords(std::string_view content) {
  KeywordLists out;
  std::size_t line_no = 0;
  for (auto line : text::lines(content)) {
    ++line_no;
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto fields = text::split(line, '\t');
    if (fields.size() != 2 || text::trim(fields[1]).empty()) {
      throw InputError("keyword line " + std::to_string(line_no) + ": expected <list>\\t<word>");
    }
    auto word = lowercase_ascii(text::trim(fields[1]));
    if (fields[0] == "ad") {
      out.ad.push_back(word);
    } else if (fields[0] == "fp") {
      out.fingerprint.push_back(word);
    } else {
      throw InputError("keyword line " + std::to_string(line_no) + ": unknown list '" +
                       std::string(fields[0]) + "'");
    }
  }
  return out;
}

std::optional<NodeIndex> parent_script(const PageGraph& g, NodeIndex request) {
  // Walk redirects back to the first request of the chain.
  for (bool moved = true; moved;) {
    moved = false;
    for (auto e : g.in_edges(request)) {
      if (is_interaction(g.edge(e), Interaction::kRedirects)) {
        request = g.edge(e).src;
        moved = true;
        break;
      }
    }
  }
  std::optional<NodeIndex> initiator;
  for (auto e : g.in_edges(request)) {
    if (is_interaction(g.edge(e), Interaction::kInitiates)) initiator = g.edge(e).src;
  }
  std::set<NodeIndex> visited;
  while (initiator && g.node(*initiator).kind == NodeKind::kHtml) {
    if (!visited.insert(*initiator).second) return std::nullopt;
    std::optional<NodeIndex> creator;
    for (auto e : g.in_edges(*initiator)) {
      if (is_interaction(g.edge(e), Interaction::kCreates)) creator = g.edge(e).src;
    }
    initiator = creator;
  }
  if (initiator && g.node(*initiator).kind == NodeKind::kScript) return initiator;
  return std::nullopt;
}

FeatureVector extract_features(const PageGraph& graph, NodeIndex decoration,
                               const FeatureOptions& options) {
  if (decoration >= graph.nodes().size()) {
    throw std::out_of_range("node index " + std::to_string(decoration) + " not in graph");
  }
  return extract_with(graph, GraphContext(graph), decoration, options);
}

std::vector<FeatureRow> extract_rows(const PageGraph& graph, std::string_view trace_id,
                                     std::size_t min_value_length,
                                     const FeatureOptions& options) {
  GraphContext ctx(graph);
  std::vector<FeatureRow> rows;
  for (auto n : graph.nodes_of_kind(NodeKind::kDecoration)) {
    const auto& deco = graph.node(n).decoration().decoration;
    if (deco.value.size() < min_value_length) continue;
    FeatureRow row;
    row.trace_id = trace_id;
    row.id = deco.id;
    row.node_id = graph.node(n).id;
    row.kind = deco.kind;
    row.values = extract_with(graph, ctx, n, options);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string serialize_matrix(const std::vector<FeatureRow>& rows) {
  std::string out = "#features/" + std::string(kFeatureVersion) + "\tdecoration_id\tnode_id\tkind";
  for (const auto& name : kNames) out += "\t" + name;
  out += '\n';
  for (const auto& row : rows) {
    out += row.trace_id + "\t" + row.id.to_string() + "\t" + row.node_id + "\t" +
           std::string(to_string(row.kind));
    for (double x : row.values) out += "\t" + text::format_double(x);
    out += '\n';
  }
  return out;
}

std::vector<FeatureRow> parse_matrix(std::string_view content) {
  auto all = text::lines(content);
  if (all.empty()) throw InputError("feature matrix: missing header");
  auto header = text::split(all[0], '\t');
  auto expected_tag = "#features/" + std::string(kFeatureVersion);
  if (header.empty() || header[0].rfind("#features/", 0) != 0) {
    throw InputError("feature matrix: header must start with #features/<version>");
  }
  if (header[0] != expected_tag) {
    throw InvariantError("feature matrix version '" + std::string(header[0].substr(10)) +
                         "' does not match '" + std::string(kFeatureVersion) + "'");
  }
  if (header.size() != kNames.size() + 4 ||
      !std::equal(kNames.begin(), kNames.end(), header.begin() + 4)) {
    throw InvariantError("feature matrix: feature names differ from version " +
                         std::string(kFeatureVersion));
  }
  std::vector<FeatureRow> rows;
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (all[i].empty()) continue;
    auto cells = text::split(all[i], '\t');
    auto where = "feature matrix line " + std::to_string(i + 1);
    if (cells.size() != header.size()) throw InputError(where + ": wrong number of cells");
    FeatureRow row;
    row.trace_id = cells[0];
    row.id = DecorationId::parse(cells[1]);
    row.node_id = cells[2];
    row.kind = parse_decoration_kind(cells[3]);
    row.values.reserve(kNames.size());
    for (std::size_t c = 4; c < cells.size(); ++c) {
      double x = text::parse_double(cells[c]);
      if (!std::isfinite(x)) {
        throw InputError(where + ": non-finite value for " + kNames[c - 4]);
      }
      row.values.push_back(x);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace linkdeco
