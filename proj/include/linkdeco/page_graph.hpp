#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "linkdeco/encoding.hpp"
#include "linkdeco/trace.hpp"
#include "linkdeco/url.hpp"

namespace linkdeco {

using NodeIndex = std::size_t;
using EdgeIndex = std::size_t;

enum class NodeKind { kStorage, kHtml, kScript, kNetwork, kDecoration };
enum class NetworkDirection { kRequest, kResponse };

std::string_view to_string(NodeKind kind);

/// One value seen on a storage node, with the event that produced it.
struct StorageObservation {
  std::uint64_t seq = 0;
  std::string value;
  enum class Source { kScriptWrite, kScriptRead, kHeaderWrite } source = Source::kScriptRead;
};

struct StorageAttrs {
  Store store = Store::kCookie;
  std::string key;
  std::vector<StorageObservation> observations;  // in seq order
};

struct HtmlAttrs {
  std::string element;
  std::string tag;
};

struct ScriptAttrs {
  std::string script;
  std::string url;  // empty for eval scripts and scripts never seen loading
  std::uint64_t length = 0;
  bool is_eval = false;
};

struct NetworkAttrs {
  NetworkDirection direction = NetworkDirection::kRequest;
  std::string request_id;
  std::string url;  // request URL (also set on responses)
  std::uint64_t seq = 0;
  int status = 0;
  std::string body;
  bool infiltrating = false;  // request whose response led to a storage write
};

struct DecorationAttrs {
  LinkDecoration decoration;
};

using NodeAttrs = std::variant<StorageAttrs, HtmlAttrs, ScriptAttrs, NetworkAttrs, DecorationAttrs>;

struct Node {
  std::string id;  // derived from content, stable across runs
  NodeKind kind = NodeKind::kScript;
  NodeAttrs attrs;

  const StorageAttrs& storage() const { return std::get<StorageAttrs>(attrs); }
  const HtmlAttrs& html() const { return std::get<HtmlAttrs>(attrs); }
  const ScriptAttrs& script() const { return std::get<ScriptAttrs>(attrs); }
  const NetworkAttrs& network() const { return std::get<NetworkAttrs>(attrs); }
  const DecorationAttrs& decoration() const { return std::get<DecorationAttrs>(attrs); }
};

enum class EdgeKind { kInteraction, kExfiltration, kInfiltration };
enum class Interaction { kSet, kGet, kInitiates, kCreates, kResponds, kRedirects, kContains };

std::string_view to_string(Interaction interaction);

/// Where a flow value was found. For exfiltration the haystack is the
/// decoration value as written (`kRaw`) or percent-decoded (`kDecoded`);
/// for infiltration it is the response body, or the response header that
/// set the storage entry directly.
enum class MatchForm { kRaw, kDecoded, kBody, kHeader };

std::string_view to_string(MatchForm form);

struct FlowEvidence {
  Encoding encoding = Encoding::kPlain;
  MatchForm form = MatchForm::kRaw;
  std::size_t offset = 0;
  std::size_t length = 0;
  std::string value;  // the storage value that matched

  /// `plain:raw@3+16`, `header`, ...
  std::string to_string() const;
};

struct Edge {
  NodeIndex src = 0;
  NodeIndex dst = 0;
  EdgeKind kind = EdgeKind::kInteraction;
  Interaction interaction = Interaction::kInitiates;  // meaningful for kInteraction
  std::optional<FlowEvidence> evidence;               // set for flow edges

  bool is_flow() const { return kind != EdgeKind::kInteraction; }
  /// `interaction:set`, `exfiltration`, `infiltration`
  std::string kind_name() const;
};

enum class GraphView { kInteraction, kFlow };

/// Membership masks for one projection of a graph.
struct ViewMask {
  std::vector<bool> nodes;
  std::vector<bool> edges;
};

/// Cross-layer graph of one page load.
class PageGraph {
 public:
  std::string site;
  std::string page_url;
  std::vector<std::string> warnings;

  NodeIndex add_node(Node node);
  EdgeIndex add_edge(Edge edge);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Node& node(NodeIndex i) const { return nodes_[i]; }
  Node& mutable_node(NodeIndex i) { return nodes_[i]; }
  const Edge& edge(EdgeIndex i) const { return edges_[i]; }

  std::optional<NodeIndex> find(std::string_view id) const;
  const std::vector<EdgeIndex>& out_edges(NodeIndex n) const { return out_[n]; }
  const std::vector<EdgeIndex>& in_edges(NodeIndex n) const { return in_[n]; }

  /// Interaction view: every node and edge. Flow view: flow edges plus the
  /// interaction edges incident to a flow-edge endpoint, and their endpoints.
  ViewMask view(GraphView which) const;

  std::vector<NodeIndex> nodes_of_kind(NodeKind kind) const;
  /// Decoration children of a request node, in URL order.
  std::vector<NodeIndex> decorations_of(NodeIndex request) const;
  /// Request node a decoration belongs to.
  NodeIndex parent_request(NodeIndex decoration) const;
  /// Response node for a request node, if one was received.
  std::optional<NodeIndex> response_of(NodeIndex request) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeIndex>> out_;
  std::vector<std::vector<EdgeIndex>> in_;
  std::unordered_map<std::string, NodeIndex> by_id_;
};

/// Storage, HTML, script and network nodes plus interaction edges, one per
/// event. Scripts and elements referenced as actors without a load or create
/// event get implicit nodes. The trace must be valid.
PageGraph build_graph(const Trace& trace);

/// Adds one decoration child per name_decorations() entry to every request
/// node. Requests whose URL does not parse keep zero children and add a
/// warning to the graph.
PageGraph attach_decoration_nodes(PageGraph graph);

inline constexpr std::size_t kDefaultMinValueLength = 8;

/// Adds storage -> decoration edges when a storage value of at least
/// `min_value_length` characters, observed before the request was sent,
/// appears under any encoding inside the decoration value (raw or decoded).
/// At most one edge per (storage node, decoration); the first match in
/// (value, encoding, form) order is kept as evidence.
PageGraph detect_exfiltration(PageGraph graph,
                              std::size_t min_value_length = kDefaultMinValueLength);

/// Adds response -> storage edges for storage set by response headers, and
/// for later script writes whose value (any encoding, at least
/// `min_value_length` characters) appears in the response body. Requests of
/// such responses are marked infiltrating.
PageGraph detect_infiltration(PageGraph graph,
                              std::size_t min_value_length = kDefaultMinValueLength);

struct GraphOptions {
  std::size_t min_value_length = kDefaultMinValueLength;
};

/// build_graph, attach_decoration_nodes, detect_exfiltration and
/// detect_infiltration in sequence.
PageGraph build_page_graph(const Trace& trace, const GraphOptions& options = {});

/// One line per edge: `src-id<TAB>dst-id<TAB>kind<TAB>evidence` (`-` when
/// there is no evidence), in edge insertion order.
std::string dump_edges(const PageGraph& graph);
/// One line per node: `id<TAB>kind<TAB>attributes`, for debugging.
std::string dump_nodes(const PageGraph& graph);

}  // namespace linkdeco
