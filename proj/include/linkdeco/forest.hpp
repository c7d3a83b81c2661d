#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "linkdeco/features.hpp"
#include "linkdeco/ground_truth.hpp"
#include "linkdeco/url.hpp"

namespace linkdeco {

/// One labeled feature vector. `ats` is the positive class.
struct Instance {
  FeatureVector x;
  bool ats = false;
  DecorationKind kind = DecorationKind::kQuery;
  std::string id;  // trace id and node id, for reports
};

struct Dataset {
  std::string feature_version = std::string(kFeatureVersion);
  std::vector<std::string> feature_names = linkdeco::feature_names();
  std::vector<Instance> rows;

  std::size_t count(bool ats) const;
};

/// Joins matrix rows with labels; rows whose decoration is unlabeled or
/// Unknown are left out.
Dataset make_dataset(const std::vector<FeatureRow>& rows,
                     const std::map<DecorationId, Label>& labels);

/// Uniform index in [0, n) from one 64-bit draw (multiply-shift), so results
/// do not depend on the standard library's distributions.
std::size_t draw_index(std::mt19937_64& rng, std::size_t n);
/// Fisher-Yates using draw_index().
template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[draw_index(rng, i)]);
  }
}
std::uint64_t splitmix64(std::uint64_t x);

/// Downsamples the majority class without replacement to the minority size.
/// Kept rows stay in their original order. Throws InputError when a class
/// is missing.
Dataset balance(const Dataset& data, std::uint64_t seed);

enum class BalanceStrategy { kDownsample, kNone };

struct ForestConfig {
  std::size_t tree_count = 100;
  std::optional<std::size_t> max_depth;  // unlimited when empty
  std::size_t min_split_size = 2;
  std::size_t features_per_split = 0;  // 0: ceil(sqrt(feature count))
  bool bootstrap = true;
  std::uint64_t seed = 1;
  BalanceStrategy balance = BalanceStrategy::kDownsample;  // used by cross_validate
  std::size_t threads = 1;  // results do not depend on this
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0;  // left when x[feature] <= threshold
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint32_t ats = 0;    // training rows reaching the node, by class
  std::uint32_t total = 0;

  double p() const { return total == 0 ? 0.0 : static_cast<double>(ats) / total; }
  bool leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // root first

  double predict(const FeatureVector& x) const;
  bool operator==(const Tree&) const = default;
};

struct Forest {
  std::string feature_version;
  std::vector<std::string> feature_names;
  std::vector<Tree> trees;

  bool operator==(const Forest&) const = default;
};

/// Grows cfg.tree_count trees with Gini splits. Throws InputError naming the
/// row and column of a non-finite feature, or when the data is empty.
Forest train(const Dataset& data, const ForestConfig& cfg);

struct Prediction {
  double score = 0;  // mean ATS leaf proportion
  bool ats = false;
};

inline constexpr double kDefaultThreshold = 0.5;

/// Throws InvariantError when `feature_version` or the vector length does
/// not match the forest.
Prediction predict(const Forest& forest, const FeatureVector& x,
                   double threshold = kDefaultThreshold,
                   std::string_view feature_version = kFeatureVersion);

/// Path decomposition of a forest score: score = prior + sum(contributions).
struct Contributions {
  double prior = 0;
  std::vector<double> by_feature;
  std::vector<bool> on_path;  // feature split on along some tree's path
};

Contributions contributions(const Forest& forest, const FeatureVector& x);

/// Feature with the largest absolute contribution among on-path features,
/// lowest index on ties; nullopt when no tree splits for this instance.
std::optional<std::size_t> top_contributor(const Contributions& c);

struct ImportanceEntry {
  std::string feature;
  double percent = 0;  // of instances where the feature was the top contributor
};

/// Sorted by percent descending, then name. Every forest feature is listed.
std::vector<ImportanceEntry> feature_importance(const Forest& forest, const Dataset& data);

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  double accuracy() const;
  double precision() const;  // 0 when nothing was predicted ATS
  double recall() const;     // 0 when there are no ATS rows
  void add(bool truth, bool predicted);
};

struct EvalReport {
  Confusion overall;
  std::map<DecorationKind, Confusion> by_kind;
  std::vector<Confusion> folds;
  std::vector<double> scores;  // out-of-fold score per dataset row
};

/// Stratified k-fold folds: each class is shuffled and dealt round-robin.
/// Returns the fold of every row. Throws InputError when a class has fewer
/// than k rows.
std::vector<std::size_t> stratified_folds(const Dataset& data, std::size_t k, std::uint64_t seed);

/// Per fold: balance (per cfg) and train on the other folds, score the fold.
EvalReport cross_validate(const Dataset& data, std::size_t k, const ForestConfig& cfg,
                          double threshold = kDefaultThreshold);

/// Structured JSON report.
std::string format_report(const EvalReport& report);

/// Text layout, one record per line:
///
///     linkdeco-forest 1
///     features <version> <count>
///     <feature name>                          (count lines)
///     trees <count>
///     tree <node count>
///     <feature> <threshold> <left> <right> <ats> <total>   (per node)
std::string serialize_forest(const Forest& forest);
Forest parse_forest(std::string_view text);

/// FNV-1a of the serialized forest, as 16 hex digits.
std::string model_version(const Forest& forest);

}  // namespace linkdeco
