#include "linkdeco/stats.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace linkdeco {

namespace {

std::size_t slot(Label label) { return static_cast<std::size_t>(label); }

double ratio(double a, double b) { return b == 0 ? 0.0 : a / b; }

}  // namespace

std::array<double, 3> KindRow::percentages() const {
  std::array<double, 3> out{};
  auto t = static_cast<double>(total());
  if (t == 0) return out;
  for (std::size_t i = 0; i < 3; ++i) out[i] = 100.0 * static_cast<double>(counts[i]) / t;
  return out;
}

StatsReport compute_stats(const std::vector<const PageGraph*>& graphs,
                          const std::map<DecorationId, Label>& labels, std::size_t top_n) {
  StatsReport r;
  for (auto kind : {DecorationKind::kPath, DecorationKind::kQuery, DecorationKind::kFragment}) {
    r.by_kind[kind];
  }
  std::set<std::string> sites;
  std::map<std::string, std::set<std::string>> coverage;
  std::map<std::string, Label> strongest;
  std::size_t ats = 0, in_ats_requests = 0, in_other_requests = 0;

  for (const auto* g : graphs) {
    sites.insert(g->site);
    for (auto n : g->nodes_of_kind(NodeKind::kNetwork)) {
      if (g->node(n).network().direction != NetworkDirection::kRequest) continue;
      ++r.requests;
      bool ats_request = false;
      auto children = g->decorations_of(n);
      for (auto d : children) {
        const auto& deco = g->node(d).decoration().decoration;
        auto it = labels.find(deco.id);
        auto label = it == labels.end() ? Label::kUnknown : it->second;
        ++r.by_kind[deco.kind].counts[slot(label)];
        ++r.decorations;
        if (label == Label::kAts) {
          ++ats;
          ats_request = true;
        }
        auto name = deco.id.name();
        coverage[name].insert(deco.id.site);
        auto& s = strongest.try_emplace(name, label).first->second;
        if (label == Label::kAts || (label == Label::kNonAts && s == Label::kUnknown)) s = label;
      }
      if (ats_request) {
        ++r.ats_requests;
        in_ats_requests += children.size();
      } else {
        ++r.non_ats_requests;
        in_other_requests += children.size();
      }
    }
  }

  r.sites = sites.size();
  r.decorations_per_site = ratio(static_cast<double>(r.decorations), static_cast<double>(r.sites));
  r.ats_per_site = ratio(static_cast<double>(ats), static_cast<double>(r.sites));
  r.decorations_per_ats_request =
      ratio(static_cast<double>(in_ats_requests), static_cast<double>(r.ats_requests));
  r.decorations_per_non_ats_request =
      ratio(static_cast<double>(in_other_requests), static_cast<double>(r.non_ats_requests));

  for (const auto& [name, covered] : coverage) {
    r.top.push_back({name, covered.size(), strongest[name]});
  }
  std::stable_sort(r.top.begin(), r.top.end(), [](const CoverageEntry& a, const CoverageEntry& b) {
    return a.sites > b.sites;
  });
  if (r.top.size() > top_n) r.top.resize(top_n);
  return r;
}

std::string format_stats(const StatsReport& r) {
  nlohmann::ordered_json j;
  j["sites"] = r.sites;
  j["requests"] = r.requests;
  j["decorations"] = r.decorations;
  auto kinds = nlohmann::ordered_json::object();
  for (const auto& [kind, row] : r.by_kind) {
    auto pct = row.percentages();
    nlohmann::ordered_json k;
    k["total"] = row.total();
    for (auto label : {Label::kAts, Label::kNonAts, Label::kUnknown}) {
      k[std::string(to_string(label))] = {{"count", row.counts[slot(label)]},
                                          {"percent", pct[slot(label)]}};
    }
    kinds[std::string(to_string(kind))] = k;
  }
  j["by_kind"] = kinds;
  j["decorations_per_site"] = r.decorations_per_site;
  j["ats_per_site"] = r.ats_per_site;
  j["ats_requests"] = r.ats_requests;
  j["non_ats_requests"] = r.non_ats_requests;
  j["decorations_per_ats_request"] = r.decorations_per_ats_request;
  j["decorations_per_non_ats_request"] = r.decorations_per_non_ats_request;
  j["top"] = nlohmann::ordered_json::array();
  for (const auto& e : r.top) {
    j["top"].push_back({{"decoration", e.name}, {"sites", e.sites},
                        {"label", std::string(to_string(e.label))}});
  }
  return j.dump(2) + "\n";
}

}  // namespace linkdeco
