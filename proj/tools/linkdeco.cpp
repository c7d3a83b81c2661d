#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "linkdeco/error.hpp"
#include "linkdeco/evasion.hpp"
#include "linkdeco/features.hpp"
#include "linkdeco/filter_list.hpp"
#include "linkdeco/forest.hpp"
#include "linkdeco/ground_truth.hpp"
#include "linkdeco/page_graph.hpp"
#include "linkdeco/pipeline.hpp"
#include "linkdeco/sanitize.hpp"
#include "linkdeco/stats.hpp"
#include "linkdeco/synthetic.hpp"
#include "linkdeco/text.hpp"

using namespace linkdeco;
using text::format_double;
using text::read_file;
using text::write_file;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::size_t min_value_len = kDefaultMinValueLength;
  double threshold = kDefaultThreshold;
  int format_version = kTraceFormatVersion;
  std::size_t jobs = 1;  // threads for per-trace stages
};

// Writes to `path`, or stdout when it is empty or `-`.
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

FeatureOptions feature_options(const std::string& keywords) {
  FeatureOptions opts;
  if (!keywords.empty()) opts.keywords = parse_keywords(read_file(keywords));
  return opts;
}

Dataset load_dataset(const std::string& matrix, const std::string& labels) {
  auto rows = parse_matrix(read_file(matrix));
  return make_dataset(rows, label_map(parse_labels(read_file(labels))));
}

struct ForestFlags {
  std::size_t trees = 100;
  std::size_t max_depth = 0;
  std::size_t min_split = 2;
  std::size_t mtry = 0;
  std::size_t threads = 1;
  bool no_balance = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--trees", trees, "Number of trees")->check(CLI::PositiveNumber);
    cmd->add_option("--max-depth", max_depth, "Maximum tree depth, 0 for unlimited");
    cmd->add_option("--min-split", min_split, "Minimum rows to split a node");
    cmd->add_option("--mtry", mtry, "Features tried per split, 0 for ceil(sqrt(d))");
    cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_flag("--no-balance", no_balance, "Train on the unbalanced data");
  }

  ForestConfig config(std::uint64_t seed) const {
    ForestConfig cfg;
    cfg.tree_count = trees;
    if (max_depth > 0) cfg.max_depth = max_depth;
    cfg.min_split_size = min_split;
    cfg.features_per_split = mtry;
    cfg.threads = threads;
    cfg.seed = seed;
    cfg.balance = no_balance ? BalanceStrategy::kNone : BalanceStrategy::kDownsample;
    return cfg;
  }
};

// Rewrites every request and redirect URL of the traces through `fn`.
template <typename Fn>
void for_each_url(std::vector<NamedTrace>& traces, Fn fn) {
  for (auto& t : traces) {
    for (auto& e : t.trace.events) {
      if (auto* r = std::get_if<RequestSent>(&e.payload)) fn(t, r->url);
      if (auto* r = std::get_if<Redirect>(&e.payload)) fn(t, r->url);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detect and sanitize tracking link decorations"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_option("--min-value-len", g.min_value_len,
                 "Ignore decoration and storage values shorter than this");
  app.add_option("--threshold", g.threshold, "ATS score threshold")->check(CLI::Range(0.0, 1.0));
  app.add_option("--format-version", g.format_version, "Expected trace format version");
  app.add_option("--jobs", g.jobs, "Threads for per-trace stages (output does not depend on it)")
      ->check(CLI::PositiveNumber);

  // parse
  std::string parse_in, parse_out;
  auto* parse_cmd = app.add_subcommand("parse", "Validate a trace and print it in canonical form");
  parse_cmd->add_option("trace", parse_in, "Trace file")->required();
  parse_cmd->add_option("-o,--out", parse_out, "Output file");

  // graph
  std::string graph_in, graph_edges, graph_nodes;
  auto* graph_cmd = app.add_subcommand("graph", "Build the page graph of a trace and dump it");
  graph_cmd->add_option("trace", graph_in, "Trace file")->required();
  graph_cmd->add_option("--edges", graph_edges, "Edge dump output (default stdout)");
  graph_cmd->add_option("--nodes", graph_nodes, "Node dump output");

  // features
  std::string feat_in, feat_out, feat_keywords;
  auto* feat_cmd = app.add_subcommand("features", "Extract the feature matrix of a trace set");
  feat_cmd->add_option("traces", feat_in, "Trace directory or file")->required();
  feat_cmd->add_option("-o,--out", feat_out, "Matrix output");
  feat_cmd->add_option("--keywords", feat_keywords, "Keyword list file");

  // label
  std::string label_in, label_rules, label_cookies, label_curated, label_out, label_conflicts;
  auto* label_cmd = app.add_subcommand("label", "Label decorations from the ground-truth sources");
  label_cmd->add_option("traces", label_in, "Trace directory or file")->required();
  label_cmd->add_option("--rules", label_rules, "Request filter list")->required();
  label_cmd->add_option("--cookies", label_cookies, "Cookie purpose table")->required();
  label_cmd->add_option("--curated", label_curated, "Curated ATS decorations");
  label_cmd->add_option("-o,--out", label_out, "Label output");
  label_cmd->add_option("--conflicts", label_conflicts, "Conflict log output");

  // train
  std::string train_matrix, train_labels, train_out, train_importance;
  ForestFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train a forest on labeled features");
  train_cmd->add_option("--matrix", train_matrix, "Feature matrix")->required();
  train_cmd->add_option("--labels", train_labels, "Label file")->required();
  train_cmd->add_option("-o,--out", train_out, "Forest output")->required();
  train_cmd->add_option("--importance", train_importance, "Feature importance output");
  train_flags.add(train_cmd);

  // cv
  std::string cv_matrix, cv_labels, cv_out;
  std::size_t cv_folds = 10;
  bool cv_shuffle = false;
  ForestFlags cv_flags;
  auto* cv_cmd = app.add_subcommand("cv", "Stratified k-fold cross-validation");
  cv_cmd->add_option("--matrix", cv_matrix, "Feature matrix")->required();
  cv_cmd->add_option("--labels", cv_labels, "Label file")->required();
  cv_cmd->add_option("--folds", cv_folds, "Fold count")->check(CLI::Range(2, 1000));
  cv_cmd->add_flag("--shuffle-labels", cv_shuffle, "Permute labels first (control run)");
  cv_cmd->add_option("-o,--out", cv_out, "Report output");
  cv_flags.add(cv_cmd);

  // predict
  std::string pred_forest, pred_matrix, pred_out;
  auto* pred_cmd = app.add_subcommand("predict", "Score every row of a feature matrix");
  pred_cmd->add_option("--forest", pred_forest, "Forest file")->required();
  pred_cmd->add_option("--matrix", pred_matrix, "Feature matrix")->required();
  pred_cmd->add_option("-o,--out", pred_out, "Predictions output");

  // emit-list
  std::string emit_predictions, emit_forest, emit_out;
  auto* emit_cmd = app.add_subcommand("emit-list", "Turn predictions into a filter list");
  emit_cmd->add_option("--predictions", emit_predictions, "Predictions file")->required();
  emit_cmd->add_option("--forest", emit_forest, "Forest the predictions came from")->required();
  emit_cmd->add_option("-o,--out", emit_out, "Filter list output");

  // export-adblock
  std::string export_list, export_out;
  auto* export_cmd = app.add_subcommand("export-adblock", "Render a filter list as removeparam rules");
  export_cmd->add_option("--list", export_list, "Filter list")->required();
  export_cmd->add_option("-o,--out", export_out, "Output");

  // sanitize
  std::string san_list, san_mode, san_site, san_traces, san_out;
  std::vector<std::string> san_urls;
  auto* san_cmd = app.add_subcommand("sanitize", "Rewrite URLs with a filter list");
  san_cmd->add_option("--list", san_list, "Filter list")->required();
  san_cmd->add_option("--mode", san_mode, "Override rule actions")
      ->check(CLI::IsMember({"replace", "strip"}));
  san_cmd->add_option("--site", san_site, "Site the URLs were seen on");
  san_cmd->add_option("urls", san_urls, "URLs to sanitize");
  san_cmd->add_option("--traces", san_traces, "Trace directory to sanitize");
  san_cmd->add_option("-o,--out", san_out, "Output directory for sanitized traces");

  // generate
  SyntheticConfig gen_cfg;
  std::string gen_out;
  std::vector<std::string> gen_encodings;
  auto* gen_cmd = app.add_subcommand("generate", "Generate a synthetic corpus with planted labels");
  gen_cmd->add_option("-o,--out", gen_out, "Output directory")->required();
  gen_cmd->add_option("--sites", gen_cfg.sites, "Site count");
  gen_cmd->add_option("--trackers", gen_cfg.trackers_per_site, "Trackers per site");
  gen_cmd->add_option("--functional", gen_cfg.functional_params, "Functional parameters per request");
  gen_cmd->add_option("--id-length", gen_cfg.id_length, "Identifier length");
  gen_cmd->add_option("--id-alphabet", gen_cfg.id_alphabet, "Identifier alphabet");
  gen_cmd->add_option("--encodings", gen_encodings, "Encodings used for exfiltration");

  // evade
  std::string evade_in, evade_out, evade_labels, evade_labels_out;
  auto* evade_cmd = app.add_subcommand("evade", "Apply an evasion to a trace set");
  evade_cmd->require_subcommand(1);
  evade_cmd->add_option("--in", evade_in, "Trace directory")->required();
  evade_cmd->add_option("-o,--out", evade_out, "Output directory")->required();
  evade_cmd->add_option("--labels", evade_labels, "Labels of the input (split only)");
  evade_cmd->add_option("--labels-out", evade_labels_out, "Inherited labels output (split only)");
  auto* rename_cmd = evade_cmd->add_subcommand("rename", "Randomize keys and path order");
  auto* split_cmd = evade_cmd->add_subcommand("split", "Split long values into chunks");
  auto* combine_cmd = evade_cmd->add_subcommand("combine", "Hash all decorations into one");
  for (auto* sub : {rename_cmd, split_cmd, combine_cmd}) sub->fallthrough();

  // stats
  std::string stats_in, stats_labels, stats_out;
  std::size_t stats_top = 10;
  auto* stats_cmd = app.add_subcommand("stats", "Prevalence report");
  stats_cmd->add_option("traces", stats_in, "Trace directory or file")->required();
  stats_cmd->add_option("--labels", stats_labels, "Label file")->required();
  stats_cmd->add_option("--top", stats_top, "Entries in the coverage ranking");
  stats_cmd->add_option("-o,--out", stats_out, "Report output");

  // Global flags may also follow the subcommand.
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (g.format_version != kTraceFormatVersion) {
      throw InvariantError("unsupported format version " + std::to_string(g.format_version) +
                           " (this build reads " + std::to_string(kTraceFormatVersion) + ")");
    }
    GraphOptions graph_opts{g.min_value_len};

    if (*parse_cmd) {
      auto trace = parse_trace(read_file(parse_in));
      if (parse_out.empty()) {
        std::cerr << trace.events.size() << " events\n";
      }
      emit(parse_out, serialize_trace(trace));
    } else if (*graph_cmd) {
      auto graph = build_page_graph(parse_trace(read_file(graph_in)), graph_opts);
      for (const auto& w : graph.warnings) std::cerr << "warning: " << w << "\n";
      emit(graph_edges, dump_edges(graph));
      if (!graph_nodes.empty()) write_file(graph_nodes, dump_nodes(graph));
    } else if (*feat_cmd) {
      auto traces = load_traces(feat_in);
      auto graphs = build_graphs(traces, graph_opts, g.jobs);
      emit(feat_out, serialize_matrix(extract_all_rows(traces, graphs, g.min_value_len,
                                                       feature_options(feat_keywords), g.jobs)));
    } else if (*label_cmd) {
      auto traces = load_traces(label_in);
      auto graphs = build_graphs(traces, graph_opts, g.jobs);
      LabelSources sources{RequestFilter::parse(read_file(label_rules)),
                           CookiePurposeDb::parse(read_file(label_cookies)),
                           label_curated.empty() ? CuratedList{}
                                                 : CuratedList::parse(read_file(label_curated))};
      auto report = label_decorations(pointers(graphs), sources);
      emit(label_out, serialize_labels(report.labels));
      std::string conflicts;
      for (const auto& c : report.conflicts) conflicts += c + "\n";
      if (!label_conflicts.empty()) write_file(label_conflicts, conflicts);
      std::cerr << report.labels.size() << " decorations labeled, " << report.conflicts.size()
                << " conflicts\n";
    } else if (*train_cmd) {
      auto data = load_dataset(train_matrix, train_labels);
      auto cfg = train_flags.config(g.seed);
      auto train_data = cfg.balance == BalanceStrategy::kDownsample ? balance(data, g.seed) : data;
      auto forest = train(train_data, cfg);
      write_file(train_out, serialize_forest(forest));
      if (!train_importance.empty()) {
        std::string text = "feature\tpercent\n";
        for (const auto& e : feature_importance(forest, train_data)) {
          text += e.feature + "\t" + format_double(e.percent) + "\n";
        }
        write_file(train_importance, text);
      }
    } else if (*cv_cmd) {
      auto data = load_dataset(cv_matrix, cv_labels);
      if (cv_shuffle) {
        std::vector<bool> labels;
        for (const auto& r : data.rows) labels.push_back(r.ats);
        std::mt19937_64 rng(splitmix64(g.seed ^ 0x5eed));
        shuffle(labels, rng);
        for (std::size_t i = 0; i < labels.size(); ++i) data.rows[i].ats = labels[i];
      }
      auto report = cross_validate(data, cv_folds, cv_flags.config(g.seed), g.threshold);
      emit(cv_out, format_report(report));
    } else if (*pred_cmd) {
      auto forest = parse_forest(read_file(pred_forest));
      auto rows = parse_matrix(read_file(pred_matrix));
      emit(pred_out, serialize_predictions(predict_rows(forest, rows, g.threshold)));
    } else if (*emit_cmd) {
      auto forest = parse_forest(read_file(emit_forest));
      auto predictions = parse_predictions(read_file(emit_predictions));
      auto list = emit_filter_list(to_decoration_predictions(predictions), g.threshold,
                                   model_version(forest));
      emit(emit_out, serialize_filter_list(list));
    } else if (*export_cmd) {
      auto result = export_adblock(parse_filter_list(read_file(export_list)));
      if (result.warnings > 0) {
        std::cerr << "warning: " << result.warnings
                  << " path or fragment rules cannot be expressed as removeparam\n";
      }
      emit(export_out, result.text);
    } else if (*san_cmd) {
      auto list = parse_filter_list(read_file(san_list));
      std::optional<RuleAction> mode;
      if (!san_mode.empty()) mode = parse_rule_action(san_mode);
      if (san_traces.empty() == san_urls.empty()) {
        throw InputError("sanitize: give either URLs or --traces");
      }
      std::uint64_t counter = 0;
      auto run = [&](const std::string& url, const std::string& site) {
        auto result = sanitize(url, site, list, mode, splitmix64(g.seed ^ counter++));
        for (const auto& a : result.audit) std::cerr << "audit: " << a << "\n";
        return result.url;
      };
      if (!san_urls.empty()) {
        std::string text;
        for (const auto& u : san_urls) text += run(u, san_site) + "\n";
        emit(san_out, text);
      } else {
        if (san_out.empty()) throw InputError("sanitize --traces needs --out");
        auto traces = load_traces(san_traces);
        for_each_url(traces, [&](const NamedTrace& t, std::string& url) {
          url = run(url, t.trace.site);
        });
        write_traces(san_out, traces);
      }
    } else if (*gen_cmd) {
      gen_cfg.seed = g.seed;
      if (!gen_encodings.empty()) {
        gen_cfg.encodings.clear();
        for (const auto& e : gen_encodings) gen_cfg.encodings.push_back(parse_encoding(e));
      }
      auto corpus = generate_synthetic(gen_cfg);
      write_traces(gen_out + "/traces", corpus.traces);
      write_file(gen_out + "/labels.tsv", serialize_labels(corpus.labels));
      write_file(gen_out + "/request_rules.txt", corpus.request_rules);
      write_file(gen_out + "/cookie_purposes.csv", corpus.cookie_purposes);
      write_file(gen_out + "/curated.txt", corpus.curated);
    } else if (*evade_cmd) {
      auto traces = load_traces(evade_in);
      if (*rename_cmd) {
        write_traces(evade_out, evade_rename(traces, g.seed));
      } else if (*split_cmd) {
        DerivedIds derived;
        write_traces(evade_out, evade_split(traces, &derived));
        if (!evade_labels_out.empty()) {
          if (evade_labels.empty()) throw InputError("--labels-out needs --labels");
          auto inherited = inherit_labels(label_map(parse_labels(read_file(evade_labels))), derived);
          std::vector<LabeledDecoration> out;
          for (const auto& [id, label] : inherited) out.push_back({id, label, {"inherited"}, false});
          write_file(evade_labels_out, serialize_labels(out));
        }
      } else if (*combine_cmd) {
        write_traces(evade_out, evade_combine(traces));
      }
    } else if (*stats_cmd) {
      auto traces = load_traces(stats_in);
      auto graphs = build_graphs(traces, graph_opts, g.jobs);
      auto labels = label_map(parse_labels(read_file(stats_labels)));
      emit(stats_out, format_stats(compute_stats(pointers(graphs), labels, stats_top)));
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
