#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "linkdeco/page_graph.hpp"

namespace linkdeco {

/// Bumped whenever a feature is added, removed, reordered or redefined.
inline constexpr std::string_view kFeatureVersion = "1";

/// Feature names in vector order.
const std::vector<std::string>& feature_names();
/// Index of `name` in feature_names(); throws std::out_of_range when absent.
std::size_t feature_index(std::string_view name);

double shannon_entropy(std::string_view s);

/// Metrics of one node within the connected component that contains it.
/// Components and distances ignore edge direction; degrees do not.
struct GraphMetrics {
  double num_nodes = 0;
  double num_edges = 0;
  double node_edge_ratio = 0;  // 0 when the component has no edges
  double edge_node_ratio = 0;
  double in_degree = 0;
  double out_degree = 0;
  double in_out_degree = 0;
  double avg_neighbor_degree = 0;  // mean in+out degree of distinct neighbours
  double closeness = 0;            // harmonic, divided by (component size - 1)
  double eccentricity = 0;
};

/// Metrics of `node` in the given view. A node outside the view (possible
/// for the flow view) yields all zeros. Throws std::out_of_range when the
/// node index is not in the graph.
GraphMetrics graph_metrics(const PageGraph& graph, GraphView view, NodeIndex node);

struct KeywordLists {
  std::vector<std::string> ad;
  std::vector<std::string> fingerprint;
};

KeywordLists default_keywords();
/// Lines `ad<TAB>word` or `fp<TAB>word`; `#` starts a comment line.
KeywordLists parse_keywords(std::string_view text);

struct FeatureOptions {
  KeywordLists keywords = default_keywords();
};

using FeatureVector = std::vector<double>;

/// Script that started the request chain containing `request`: redirects are
/// followed back to the first request, whose initiator is taken; an element
/// initiator resolves to the script that created it. nullopt for requests
/// issued by the document or by elements with no creating script.
std::optional<NodeIndex> parent_script(const PageGraph& graph, NodeIndex request);

/// Full feature vector of a decoration node. The graph must have flow edges
/// detected. Throws std::out_of_range for an index outside the graph and
/// std::invalid_argument for a node that is not a decoration.
FeatureVector extract_features(const PageGraph& graph, NodeIndex decoration,
                               const FeatureOptions& options = {});

/// One feature-matrix row.
struct FeatureRow {
  std::string trace_id;
  DecorationId id;
  std::string node_id;
  DecorationKind kind = DecorationKind::kQuery;
  FeatureVector values;

  bool operator==(const FeatureRow&) const = default;
};

/// Rows for every decoration of the graph whose decoded value has at least
/// `min_value_length` characters, in node order.
std::vector<FeatureRow> extract_rows(const PageGraph& graph, std::string_view trace_id,
                                     std::size_t min_value_length,
                                     const FeatureOptions& options = {});

/// Tab-separated matrix. The header row is
/// `#features/<version> decoration_id node_id kind <feature names...>`, its
/// first cell doubling as the label of the trace id column.
std::string serialize_matrix(const std::vector<FeatureRow>& rows);
/// Throws InvariantError when the header names a different feature version
/// or feature list, InputError on malformed rows.
std::vector<FeatureRow> parse_matrix(std::string_view text);

}  // namespace linkdeco
