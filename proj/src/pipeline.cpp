#include "linkdeco/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <stdexcept>
#include <thread>

#include "linkdeco/text.hpp"

namespace linkdeco {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kPredictionHeader = "trace_id\tdecoration_id\tnode_id\tkind\tscore\tlabel";

std::string trace_id_of(const fs::path& file) {
  auto name = file.filename().string();
  if (name.size() > kTraceSuffix.size() &&
      name.compare(name.size() - kTraceSuffix.size(), kTraceSuffix.size(), kTraceSuffix) == 0) {
    return name.substr(0, name.size() - kTraceSuffix.size());
  }
  return file.stem().string();
}

// Runs fn(i) for i in [0, n) on up to `threads` threads. Each call writes
// only its own slot, so results do not depend on scheduling. The exception
// of the lowest failing index is rethrown.
template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F&& fn) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (auto i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<NamedTrace> load_traces(const std::string& path) {
  std::error_code ec;
  std::vector<fs::path> files;
  if (fs::is_directory(path, ec)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      auto name = entry.path().filename().string();
      if (entry.is_regular_file() && name.size() > kTraceSuffix.size() &&
          name.ends_with(kTraceSuffix)) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path, ec)) {
    files.emplace_back(path);
  } else {
    throw InputError("no such trace file or directory: '" + path + "'");
  }
  std::vector<NamedTrace> out;
  for (const auto& f : files) {
    try {
      out.push_back({trace_id_of(f), parse_trace(text::read_file(f.string()))});
    } catch (const InputError& e) {
      throw InputError(f.string() + ": " + e.what());
    } catch (const InvariantError& e) {
      throw InvariantError(f.string() + ": " + e.what());
    }
  }
  return out;
}

void write_traces(const std::string& dir, const std::vector<NamedTrace>& traces) {
  fs::create_directories(dir);
  for (const auto& t : traces) {
    text::write_file((fs::path(dir) / (t.id + std::string(kTraceSuffix))).string(),
               serialize_trace(t.trace));
  }
}

std::vector<PageGraph> build_graphs(const std::vector<NamedTrace>& traces,
                                    const GraphOptions& options, std::size_t threads) {
  std::vector<PageGraph> out(traces.size());
  parallel_for(traces.size(), threads,
               [&](std::size_t i) { out[i] = build_page_graph(traces[i].trace, options); });
  return out;
}

std::vector<const PageGraph*> pointers(const std::vector<PageGraph>& graphs) {
  std::vector<const PageGraph*> out;
  for (const auto& g : graphs) out.push_back(&g);
  return out;
}

std::vector<FeatureRow> extract_all_rows(const std::vector<NamedTrace>& traces,
                                         const std::vector<PageGraph>& graphs,
                                         std::size_t min_value_length,
                                         const FeatureOptions& options, std::size_t threads) {
  if (traces.size() != graphs.size()) throw std::invalid_argument("one graph per trace expected");
  std::vector<std::vector<FeatureRow>> per_trace(graphs.size());
  parallel_for(graphs.size(), threads, [&](std::size_t i) {
    per_trace[i] = extract_rows(graphs[i], traces[i].id, min_value_length, options);
  });
  std::vector<FeatureRow> out;
  for (auto& rows : per_trace) std::move(rows.begin(), rows.end(), std::back_inserter(out));
  return out;
}

std::vector<PredictionRow> predict_rows(const Forest& forest, const std::vector<FeatureRow>& rows,
                                        double threshold) {
  std::vector<PredictionRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    auto p = predict(forest, r.values, threshold);
    out.push_back({r.trace_id, r.id, r.node_id, r.kind, p.score, p.ats});
  }
  return out;
}

std::string serialize_predictions(const std::vector<PredictionRow>& rows) {
  std::string out(kPredictionHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += r.trace_id + '\t' + r.id.to_string() + '\t' + r.node_id + '\t' +
           std::string(to_string(r.kind)) + '\t' + text::format_double(r.score) + '\t' +
           std::string(to_string(r.ats ? Label::kAts : Label::kNonAts)) + '\n';
  }
  return out;
}

std::vector<PredictionRow> parse_predictions(std::string_view text) {
  auto all = text::lines(text);
  if (all.empty() || all.front() != kPredictionHeader) {
    throw InputError("predictions: missing header row");
  }
  std::vector<PredictionRow> out;
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (all[i].empty()) continue;
    auto cells = text::split(all[i], '\t');
    if (cells.size() != 6) {
      throw InputError("predictions line " + std::to_string(i + 1) + ": expected 6 columns");
    }
    PredictionRow r;
    r.trace_id = std::string(cells[0]);
    r.id = DecorationId::parse(cells[1]);
    r.node_id = std::string(cells[2]);
    r.kind = parse_decoration_kind(cells[3]);
    r.score = text::parse_double(cells[4]);
    auto label = parse_label(cells[5]);
    if (label == Label::kUnknown || !(r.score >= 0 && r.score <= 1)) {
      throw InputError("predictions line " + std::to_string(i + 1) + ": bad score or label");
    }
    r.ats = label == Label::kAts;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<DecorationPrediction> to_decoration_predictions(const std::vector<PredictionRow>& rows) {
  std::vector<DecorationPrediction> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({r.id, r.kind, r.score});
  return out;
}

}  // namespace linkdeco
