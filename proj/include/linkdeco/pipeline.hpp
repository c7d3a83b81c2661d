#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "linkdeco/features.hpp"
#include "linkdeco/filter_list.hpp"
#include "linkdeco/forest.hpp"
#include "linkdeco/page_graph.hpp"
#include "linkdeco/synthetic.hpp"

namespace linkdeco {

inline constexpr std::string_view kTraceSuffix = ".trace.jsonl";

/// Every `*.trace.jsonl` file of a directory, sorted by name, or a single
/// trace file. The trace id is the file name without the suffix.
std::vector<NamedTrace> load_traces(const std::string& path);
/// Writes `<dir>/<id>.trace.jsonl` per trace, creating the directory.
void write_traces(const std::string& dir, const std::vector<NamedTrace>& traces);

/// One graph per trace, built on up to `threads` threads. The result does
/// not depend on the thread count.
std::vector<PageGraph> build_graphs(const std::vector<NamedTrace>& traces,
                                    const GraphOptions& options = {}, std::size_t threads = 1);
std::vector<const PageGraph*> pointers(const std::vector<PageGraph>& graphs);

/// Matrix rows of all graphs, trace by trace. `graphs[i]` belongs to
/// `traces[i]`.
std::vector<FeatureRow> extract_all_rows(const std::vector<NamedTrace>& traces,
                                         const std::vector<PageGraph>& graphs,
                                         std::size_t min_value_length,
                                         const FeatureOptions& options = {},
                                         std::size_t threads = 1);

struct PredictionRow {
  std::string trace_id;
  DecorationId id;
  std::string node_id;
  DecorationKind kind = DecorationKind::kQuery;
  double score = 0;
  bool ats = false;

  bool operator==(const PredictionRow&) const = default;
};

std::vector<PredictionRow> predict_rows(const Forest& forest, const std::vector<FeatureRow>& rows,
                                        double threshold);

/// `trace_id decoration_id node_id kind score label` with a header row.
std::string serialize_predictions(const std::vector<PredictionRow>& rows);
std::vector<PredictionRow> parse_predictions(std::string_view text);

std::vector<DecorationPrediction> to_decoration_predictions(const std::vector<PredictionRow>& rows);

}  // namespace linkdeco
