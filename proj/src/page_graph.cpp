#include "linkdeco/page_graph.hpp"

#include <map>
#include <set>
#include <stdexcept>

namespace linkdeco {

namespace {

std::string storage_id(Store store, std::string_view key) {
  return "storage:" + std::string(to_string(store)) + ":" + std::string(key);
}

class GraphBuilder {
 public:
  explicit GraphBuilder(const Trace& trace) {
    graph_.site = trace.site;
    graph_.page_url = trace.page_url;
  }

  PageGraph build(const Trace& trace) {
    for (const auto& e : trace.events) handle(e);
    return std::move(graph_);
  }

 private:
  void handle(const TraceEvent& e) {
    switch (e.kind) {
      case EventKind::kScriptLoad: {
        const auto& p = std::get<ScriptLoad>(e.payload);
        auto actor = actor_node(e.actor);
        auto n = script_node(p.script);
        auto& attrs = std::get<ScriptAttrs>(graph_.mutable_node(n).attrs);
        attrs.url = p.url;
        attrs.length = p.length;
        if (actor) interaction(*actor, n, Interaction::kCreates);
        break;
      }
      case EventKind::kEvalScript: {
        const auto& p = std::get<EvalScript>(e.payload);
        auto actor = actor_node(e.actor);
        auto n = script_node(p.script);
        auto& attrs = std::get<ScriptAttrs>(graph_.mutable_node(n).attrs);
        attrs.length = p.length;
        attrs.is_eval = true;
        if (actor) interaction(*actor, n, Interaction::kCreates);
        break;
      }
      case EventKind::kStorageSet:
      case EventKind::kStorageGet: {
        const auto& p = std::get<StorageAccess>(e.payload);
        bool write = e.kind == EventKind::kStorageSet;
        auto s = storage_node(p.store, p.key);
        observe(s, e.seq, p.value,
                write ? StorageObservation::Source::kScriptWrite
                      : StorageObservation::Source::kScriptRead);
        if (auto actor = actor_node(e.actor)) {
          interaction(*actor, s, write ? Interaction::kSet : Interaction::kGet);
        }
        break;
      }
      case EventKind::kRequest:
      case EventKind::kElementRequest: {
        const auto& p = std::get<RequestSent>(e.payload);
        auto actor = actor_node(e.actor, e.kind == EventKind::kElementRequest);
        auto r = request_node(p.request_id, p.url, e.seq);
        if (actor) interaction(*actor, r, Interaction::kInitiates);
        break;
      }
      case EventKind::kResponse: {
        const auto& p = std::get<ResponseReceived>(e.payload);
        auto request = requests_.at(p.request_id);
        NetworkAttrs attrs;
        attrs.direction = NetworkDirection::kResponse;
        attrs.request_id = p.request_id;
        attrs.url = graph_.node(request).network().url;
        attrs.seq = e.seq;
        attrs.status = p.status;
        attrs.body = p.body;
        auto r = graph_.add_node({"response:" + p.request_id, NodeKind::kNetwork, attrs});
        interaction(request, r, Interaction::kResponds);
        for (const auto& s : p.set_storage) {
          auto storage = storage_node(s.store, s.key);
          observe(storage, e.seq, s.value, StorageObservation::Source::kHeaderWrite);
          interaction(r, storage, Interaction::kSet);
        }
        break;
      }
      case EventKind::kRedirect: {
        const auto& p = std::get<Redirect>(e.payload);
        auto from = requests_.at(p.from_request_id);
        auto to = request_node(p.request_id, p.url, e.seq);
        interaction(from, to, Interaction::kRedirects);
        break;
      }
      case EventKind::kElementCreate: {
        const auto& p = std::get<ElementCreate>(e.payload);
        auto actor = actor_node(e.actor);
        auto n = element_node(p.element);
        std::get<HtmlAttrs>(graph_.mutable_node(n).attrs).tag = p.tag;
        if (actor) interaction(*actor, n, Interaction::kCreates);
        break;
      }
    }
  }

  std::optional<NodeIndex> actor_node(const std::string& actor, bool prefer_element = false) {
    if (actor == kDocumentActor) return std::nullopt;
    if (auto it = elements_.find(actor); it != elements_.end()) return it->second;
    if (auto it = scripts_.find(actor); it != scripts_.end()) return it->second;
    return prefer_element ? element_node(actor) : script_node(actor);
  }

  NodeIndex script_node(const std::string& script) {
    if (auto it = scripts_.find(script); it != scripts_.end()) return it->second;
    ScriptAttrs attrs;
    attrs.script = script;
    auto n = graph_.add_node({"script:" + script, NodeKind::kScript, attrs});
    scripts_.emplace(script, n);
    return n;
  }

  NodeIndex element_node(const std::string& element) {
    if (auto it = elements_.find(element); it != elements_.end()) return it->second;
    auto n = graph_.add_node({"html:" + element, NodeKind::kHtml, HtmlAttrs{element, ""}});
    elements_.emplace(element, n);
    return n;
  }

  NodeIndex storage_node(Store store, const std::string& key) {
    auto id = storage_id(store, key);
    if (auto existing = graph_.find(id)) return *existing;
    StorageAttrs attrs;
    attrs.store = store;
    attrs.key = key;
    return graph_.add_node({id, NodeKind::kStorage, attrs});
  }

  NodeIndex request_node(const std::string& request_id, const std::string& url,
                         std::uint64_t seq) {
    NetworkAttrs attrs;
    attrs.direction = NetworkDirection::kRequest;
    attrs.request_id = request_id;
    attrs.url = url;
    attrs.seq = seq;
    auto n = graph_.add_node({"request:" + request_id, NodeKind::kNetwork, attrs});
    requests_.emplace(request_id, n);
    return n;
  }

  void observe(NodeIndex storage, std::uint64_t seq, const std::string& value,
               StorageObservation::Source source) {
    std::get<StorageAttrs>(graph_.mutable_node(storage).attrs)
        .observations.push_back({seq, value, source});
  }

  void interaction(NodeIndex src, NodeIndex dst, Interaction kind) {
    Edge edge;
    edge.src = src;
    edge.dst = dst;
    edge.kind = EdgeKind::kInteraction;
    edge.interaction = kind;
    graph_.add_edge(std::move(edge));
  }

  PageGraph graph_;
  std::map<std::string, NodeIndex> scripts_;
  std::map<std::string, NodeIndex> elements_;
  std::map<std::string, NodeIndex> requests_;
};

// Distinct non-empty values observed on a storage node before `seq`, in
// observation order.
std::vector<std::string> values_before(const StorageAttrs& storage, std::uint64_t seq,
                                       std::size_t min_length) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& o : storage.observations) {
    if (o.seq >= seq) break;
    if (o.value.empty() || o.value.size() < min_length) continue;
    if (seen.insert(o.value).second) out.push_back(o.value);
  }
  return out;
}

class CandidateCache {
 public:
  const std::array<EncodedCandidate, 5>& get(const std::string& value) {
    auto it = cache_.find(value);
    if (it == cache_.end()) it = cache_.emplace(value, encode_candidates(value)).first;
    return it->second;
  }

 private:
  std::map<std::string, std::array<EncodedCandidate, 5>> cache_;
};

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kStorage:
      return "storage";
    case NodeKind::kHtml:
      return "html";
    case NodeKind::kScript:
      return "script";
    case NodeKind::kNetwork:
      return "network";
    case NodeKind::kDecoration:
      return "decoration";
  }
  return "script";
}

std::string_view to_string(Interaction interaction) {
  switch (interaction) {
    case Interaction::kSet:
      return "set";
    case Interaction::kGet:
      return "get";
    case Interaction::kInitiates:
      return "initiates";
    case Interaction::kCreates:
      return "creates";
    case Interaction::kResponds:
      return "responds";
    case Interaction::kRedirects:
      return "redirects";
    case Interaction::kContains:
      return "contains";
  }
  return "initiates";
}

std::string_view to_string(MatchForm form) {
  switch (form) {
    case MatchForm::kRaw:
      return "raw";
    case MatchForm::kDecoded:
      return "decoded";
    case MatchForm::kBody:
      return "body";
    case MatchForm::kHeader:
      return "header";
  }
  return "raw";
}

std::string FlowEvidence::to_string() const {
  if (form == MatchForm::kHeader) return "header";
  return std::string(linkdeco::to_string(encoding)) + ":" +
         std::string(linkdeco::to_string(form)) + "@" + std::to_string(offset) + "+" +
         std::to_string(length);
}

std::string Edge::kind_name() const {
  switch (kind) {
    case EdgeKind::kInteraction:
      return "interaction:" + std::string(to_string(interaction));
    case EdgeKind::kExfiltration:
      return "exfiltration";
    case EdgeKind::kInfiltration:
      return "infiltration";
  }
  return "interaction";
}

NodeIndex PageGraph::add_node(Node node) {
  auto index = nodes_.size();
  if (!by_id_.emplace(node.id, index).second) {
    throw std::logic_error("duplicate node id '" + node.id + "'");
  }
  nodes_.push_back(std::move(node));
  out_.emplace_back();
  in_.emplace_back();
  return index;
}

EdgeIndex PageGraph::add_edge(Edge edge) {
  auto index = edges_.size();
  out_[edge.src].push_back(index);
  in_[edge.dst].push_back(index);
  edges_.push_back(std::move(edge));
  return index;
}

std::optional<NodeIndex> PageGraph::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

ViewMask PageGraph::view(GraphView which) const {
  ViewMask mask;
  if (which == GraphView::kInteraction) {
    mask.nodes.assign(nodes_.size(), true);
    mask.edges.assign(edges_.size(), true);
    return mask;
  }
  mask.nodes.assign(nodes_.size(), false);
  mask.edges.assign(edges_.size(), false);
  std::vector<bool> endpoint(nodes_.size(), false);
  for (EdgeIndex i = 0; i < edges_.size(); ++i) {
    if (!edges_[i].is_flow()) continue;
    mask.edges[i] = true;
    endpoint[edges_[i].src] = endpoint[edges_[i].dst] = true;
  }
  for (EdgeIndex i = 0; i < edges_.size(); ++i) {
    if (endpoint[edges_[i].src] || endpoint[edges_[i].dst]) mask.edges[i] = true;
  }
  for (EdgeIndex i = 0; i < edges_.size(); ++i) {
    if (mask.edges[i]) mask.nodes[edges_[i].src] = mask.nodes[edges_[i].dst] = true;
  }
  return mask;
}

std::vector<NodeIndex> PageGraph::nodes_of_kind(NodeKind kind) const {
  std::vector<NodeIndex> out;
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == kind) out.push_back(i);
  }
  return out;
}

std::vector<NodeIndex> PageGraph::decorations_of(NodeIndex request) const {
  std::vector<NodeIndex> out;
  for (auto e : out_[request]) {
    const auto& edge = edges_[e];
    if (edge.kind == EdgeKind::kInteraction && edge.interaction == Interaction::kContains) {
      out.push_back(edge.dst);
    }
  }
  return out;
}

NodeIndex PageGraph::parent_request(NodeIndex decoration) const {
  for (auto e : in_[decoration]) {
    const auto& edge = edges_[e];
    if (edge.kind == EdgeKind::kInteraction && edge.interaction == Interaction::kContains) {
      return edge.src;
    }
  }
  throw std::logic_error("decoration node without parent request: " + nodes_[decoration].id);
}

std::optional<NodeIndex> PageGraph::response_of(NodeIndex request) const {
  for (auto e : out_[request]) {
    const auto& edge = edges_[e];
    if (edge.kind == EdgeKind::kInteraction && edge.interaction == Interaction::kResponds) {
      return edge.dst;
    }
  }
  return std::nullopt;
}

PageGraph build_graph(const Trace& trace) { return GraphBuilder(trace).build(trace); }

PageGraph attach_decoration_nodes(PageGraph graph) {
  auto requests = graph.nodes_of_kind(NodeKind::kNetwork);
  for (auto r : requests) {
    const auto& net = graph.node(r).network();
    if (net.direction != NetworkDirection::kRequest) continue;
    std::vector<LinkDecoration> decorations;
    try {
      decorations = name_decorations(decompose(net.url), graph.site);
    } catch (const InputError& e) {
      graph.warnings.push_back("request " + net.request_id + ": " + e.what());
      continue;
    }
    auto request_id = net.request_id;
    for (auto& d : decorations) {
      std::string id = "decoration:" + request_id + ":" + std::string(to_string(d.kind)) + ":" +
                       std::to_string(d.position);
      auto n = graph.add_node({std::move(id), NodeKind::kDecoration, DecorationAttrs{std::move(d)}});
      Edge edge;
      edge.src = r;
      edge.dst = n;
      edge.interaction = Interaction::kContains;
      graph.add_edge(std::move(edge));
    }
  }
  return graph;
}

PageGraph detect_exfiltration(PageGraph graph, std::size_t min_value_length) {
  CandidateCache cache;
  auto storages = graph.nodes_of_kind(NodeKind::kStorage);
  auto networks = graph.nodes_of_kind(NodeKind::kNetwork);
  std::vector<Edge> added;
  for (auto r : networks) {
    const auto& net = graph.node(r).network();
    if (net.direction != NetworkDirection::kRequest) continue;
    auto decorations = graph.decorations_of(r);
    if (decorations.empty()) continue;

    std::vector<std::pair<NodeIndex, std::vector<std::string>>> live;
    for (auto s : storages) {
      auto values = values_before(graph.node(s).storage(), net.seq, min_value_length);
      if (!values.empty()) live.emplace_back(s, std::move(values));
    }

    for (auto d : decorations) {
      const auto& deco = graph.node(d).decoration().decoration;
      std::vector<std::pair<MatchForm, const std::string*>> forms = {
          {MatchForm::kRaw, &deco.raw_value}};
      if (deco.value != deco.raw_value) forms.emplace_back(MatchForm::kDecoded, &deco.value);

      for (const auto& [s, values] : live) {
        std::optional<FlowEvidence> match;
        for (const auto& value : values) {
          for (const auto& candidate : cache.get(value)) {
            for (const auto& [form, text] : forms) {
              auto pos = find_encoded(*text, candidate.text, is_hex_digest(candidate.encoding));
              if (pos != std::string::npos) {
                match = FlowEvidence{candidate.encoding, form, pos, candidate.text.size(), value};
                break;
              }
            }
            if (match) break;
          }
          if (match) break;
        }
        if (match) {
          Edge edge;
          edge.src = s;
          edge.dst = d;
          edge.kind = EdgeKind::kExfiltration;
          edge.evidence = std::move(match);
          added.push_back(std::move(edge));
        }
      }
    }
  }
  for (auto& edge : added) graph.add_edge(std::move(edge));
  return graph;
}

PageGraph detect_infiltration(PageGraph graph, std::size_t min_value_length) {
  CandidateCache cache;
  auto storages = graph.nodes_of_kind(NodeKind::kStorage);
  auto networks = graph.nodes_of_kind(NodeKind::kNetwork);
  std::vector<Edge> added;
  std::set<NodeIndex> infiltrating_requests;

  for (auto r : networks) {
    const auto& net = graph.node(r).network();
    if (net.direction != NetworkDirection::kResponse) continue;
    std::set<NodeIndex> linked;

    for (auto e : graph.out_edges(r)) {
      const auto& edge = graph.edge(e);
      if (edge.kind != EdgeKind::kInteraction || edge.interaction != Interaction::kSet) continue;
      if (!linked.insert(edge.dst).second) continue;
      std::string value;
      for (const auto& o : graph.node(edge.dst).storage().observations) {
        if (o.seq == net.seq && o.source == StorageObservation::Source::kHeaderWrite) {
          value = o.value;
        }
      }
      Edge flow;
      flow.src = r;
      flow.dst = edge.dst;
      flow.kind = EdgeKind::kInfiltration;
      flow.evidence = FlowEvidence{Encoding::kPlain, MatchForm::kHeader, 0, value.size(), value};
      added.push_back(std::move(flow));
    }

    if (!net.body.empty()) {
      for (auto s : storages) {
        if (linked.contains(s)) continue;
        std::optional<FlowEvidence> match;
        for (const auto& o : graph.node(s).storage().observations) {
          if (o.source != StorageObservation::Source::kScriptWrite || o.seq <= net.seq) continue;
          if (o.value.empty() || o.value.size() < min_value_length) continue;
          for (const auto& candidate : cache.get(o.value)) {
            auto pos = find_encoded(net.body, candidate.text, is_hex_digest(candidate.encoding));
            if (pos != std::string::npos) {
              match = FlowEvidence{candidate.encoding, MatchForm::kBody, pos,
                                   candidate.text.size(), o.value};
              break;
            }
          }
          if (match) break;
        }
        if (match) {
          linked.insert(s);
          Edge flow;
          flow.src = r;
          flow.dst = s;
          flow.kind = EdgeKind::kInfiltration;
          flow.evidence = std::move(match);
          added.push_back(std::move(flow));
        }
      }
    }

    if (!linked.empty()) {
      for (auto e : graph.in_edges(r)) {
        const auto& edge = graph.edge(e);
        if (edge.kind == EdgeKind::kInteraction && edge.interaction == Interaction::kResponds) {
          infiltrating_requests.insert(edge.src);
        }
      }
    }
  }
  for (auto& edge : added) graph.add_edge(std::move(edge));
  for (auto r : infiltrating_requests) {
    std::get<NetworkAttrs>(graph.mutable_node(r).attrs).infiltrating = true;
  }
  return graph;
}

PageGraph build_page_graph(const Trace& trace, const GraphOptions& options) {
  auto graph = attach_decoration_nodes(build_graph(trace));
  graph = detect_exfiltration(std::move(graph), options.min_value_length);
  return detect_infiltration(std::move(graph), options.min_value_length);
}

std::string dump_edges(const PageGraph& graph) {
  std::string out;
  for (const auto& edge : graph.edges()) {
    out += graph.node(edge.src).id;
    out += '\t';
    out += graph.node(edge.dst).id;
    out += '\t';
    out += edge.kind_name();
    out += '\t';
    out += edge.evidence ? edge.evidence->to_string() : "-";
    out += '\n';
  }
  return out;
}

std::string dump_nodes(const PageGraph& graph) {
  std::string out;
  for (const auto& node : graph.nodes()) {
    out += node.id;
    out += '\t';
    out += to_string(node.kind);
    out += '\t';
    switch (node.kind) {
      case NodeKind::kStorage:
        out += std::string(to_string(node.storage().store)) + " key=" + node.storage().key +
               " observations=" + std::to_string(node.storage().observations.size());
        break;
      case NodeKind::kHtml:
        out += "tag=" + node.html().tag;
        break;
      case NodeKind::kScript:
        out += "url=" + node.script().url + " length=" + std::to_string(node.script().length) +
               " eval=" + (node.script().is_eval ? "1" : "0");
        break;
      case NodeKind::kNetwork: {
        const auto& net = node.network();
        out += net.direction == NetworkDirection::kRequest ? "request" : "response";
        out += " url=" + net.url + " seq=" + std::to_string(net.seq);
        if (net.direction == NetworkDirection::kResponse) {
          out += " status=" + std::to_string(net.status);
        } else if (net.infiltrating) {
          out += " infiltrating=1";
        }
        break;
      }
      case NodeKind::kDecoration:
        out += std::string(to_string(node.decoration().decoration.kind)) + " " +
               node.decoration().decoration.to_string();
        break;
    }
    out += '\n';
  }
  return out;
}

}  // namespace linkdeco
