#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "linkdeco/ground_truth.hpp"
#include "linkdeco/page_graph.hpp"

namespace linkdeco {

struct KindRow {
  std::array<std::size_t, 3> counts{};  // indexed by Label
  std::size_t total() const { return counts[0] + counts[1] + counts[2]; }
  /// Share of each label in percent; all zero for an empty row.
  std::array<double, 3> percentages() const;
};

struct CoverageEntry {
  std::string name;  // fqdn|key
  std::size_t sites = 0;
  Label label = Label::kUnknown;  // most severe label seen: ATS, then NonATS
};

struct StatsReport {
  std::size_t sites = 0;
  std::size_t requests = 0;
  std::size_t decorations = 0;
  std::map<DecorationKind, KindRow> by_kind;  // always holds all three kinds
  double decorations_per_site = 0;
  double ats_per_site = 0;
  /// Requests carrying at least one ATS decoration count as ATS endpoints.
  std::size_t ats_requests = 0;
  std::size_t non_ats_requests = 0;
  double decorations_per_ats_request = 0;
  double decorations_per_non_ats_request = 0;
  std::vector<CoverageEntry> top;  // by site coverage, then name
};

/// Prevalence over decoration instances. Decorations absent from `labels`
/// count as Unknown.
StatsReport compute_stats(const std::vector<const PageGraph*>& graphs,
                          const std::map<DecorationId, Label>& labels, std::size_t top_n = 10);

/// Structured JSON.
std::string format_stats(const StatsReport& report);

}  // namespace linkdeco
