#include "linkdeco/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "json.hpp"
#include "linkdeco/text.hpp"

namespace linkdeco {

namespace {

constexpr double kMinGain = 1e-12;

// n * gini for a node with `a` positives out of `n`.
double weighted_gini(double a, double n) {
  if (n <= 0) return 0;
  double b = n - a;
  return n - (a * a + b * b) / n;
}

struct Split {
  int feature = -1;
  double threshold = 0;
  double impurity = 0;  // weighted child impurity
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const ForestConfig& cfg, std::size_t mtry, std::uint64_t seed)
      : data_(data), cfg_(cfg), mtry_(mtry), rng_(seed) {
    features_.resize(data.feature_names.size());
    std::iota(features_.begin(), features_.end(), 0);
  }

  Tree build() {
    std::size_t n = data_.rows.size();
    std::vector<std::size_t> sample(n);
    if (cfg_.bootstrap) {
      for (auto& s : sample) s = draw_index(rng_, n);
    } else {
      std::iota(sample.begin(), sample.end(), 0);
    }
    grow(sample, 0, n, 0);
    return std::move(tree_);
  }

 private:
  std::uint32_t grow(std::vector<std::size_t>& idx, std::size_t begin, std::size_t end,
                     std::size_t depth) {
    TreeNode node;
    for (auto i = begin; i < end; ++i) node.ats += data_.rows[idx[i]].ats ? 1 : 0;
    node.total = static_cast<std::uint32_t>(end - begin);
    auto at = static_cast<std::uint32_t>(tree_.nodes.size());
    tree_.nodes.push_back(node);

    bool pure = node.ats == 0 || node.ats == node.total;
    bool deep = cfg_.max_depth && depth >= *cfg_.max_depth;
    if (pure || deep || node.total < cfg_.min_split_size) return at;

    auto split = best_split(idx, begin, end, node.ats);
    double parent = weighted_gini(node.ats, node.total);
    if (split.feature < 0 || (parent - split.impurity) / node.total <= kMinGain) return at;

    auto f = static_cast<std::size_t>(split.feature);
    auto mid = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                              idx.begin() + static_cast<std::ptrdiff_t>(end),
                              [&](std::size_t i) { return data_.rows[i].x[f] <= split.threshold; });
    auto cut = static_cast<std::size_t>(mid - idx.begin());
    auto left = grow(idx, begin, cut, depth + 1);
    auto right = grow(idx, cut, end, depth + 1);
    auto& stored = tree_.nodes[at];
    stored.feature = split.feature;
    stored.threshold = split.threshold;
    stored.left = left;
    stored.right = right;
    return at;
  }

  Split best_split(const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end,
                   std::uint32_t positives) {
    Split best;
    double best_impurity = std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(end - begin);
    std::size_t evaluated = 0;
    const std::size_t d = features_.size();
    for (std::size_t k = 0; k < d && evaluated < mtry_; ++k) {
      std::swap(features_[k], features_[k + draw_index(rng_, d - k)]);
      auto f = features_[k];

      buffer_.clear();
      for (auto i = begin; i < end; ++i) {
        const auto& row = data_.rows[idx[i]];
        buffer_.emplace_back(row.x[f], row.ats ? 1 : 0);
      }
      std::sort(buffer_.begin(), buffer_.end());
      if (buffer_.front().first == buffer_.back().first) continue;  // constant here
      ++evaluated;

      double left_pos = 0;
      for (std::size_t j = 0; j + 1 < buffer_.size(); ++j) {
        left_pos += buffer_[j].second;
        if (buffer_[j].first == buffer_[j + 1].first) continue;
        double nl = static_cast<double>(j + 1);
        double impurity =
            weighted_gini(left_pos, nl) + weighted_gini(positives - left_pos, n - nl);
        if (impurity < best_impurity) {
          best_impurity = impurity;
          double lo = buffer_[j].first;
          double hi = buffer_[j + 1].first;
          double threshold = lo + (hi - lo) / 2;
          if (!(threshold < hi)) threshold = lo;
          best = {static_cast<int>(f), threshold, impurity};
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  const ForestConfig& cfg_;
  std::size_t mtry_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> features_;
  std::vector<std::pair<double, int>> buffer_;
  Tree tree_;
};

void require_compatible(const Forest& forest, std::size_t length, std::string_view version) {
  if (version != forest.feature_version) {
    throw InvariantError("feature version '" + std::string(version) +
                         "' does not match forest version '" + forest.feature_version + "'");
  }
  if (length != forest.feature_names.size()) {
    throw InvariantError("feature vector has " + std::to_string(length) + " entries, forest expects " +
                         std::to_string(forest.feature_names.size()));
  }
}

nlohmann::ordered_json confusion_json(const Confusion& c) {
  nlohmann::ordered_json j;
  j["instances"] = c.total();
  j["accuracy"] = c.accuracy();
  j["precision"] = c.precision();
  j["recall"] = c.recall();
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["tn"] = c.tn;
  j["fn"] = c.fn;
  return j;
}

}  // namespace

std::size_t Dataset::count(bool ats) const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [&](const Instance& r) { return r.ats == ats; }));
}

Dataset make_dataset(const std::vector<FeatureRow>& rows,
                     const std::map<DecorationId, Label>& labels) {
  Dataset data;
  for (const auto& row : rows) {
    auto it = labels.find(row.id);
    if (it == labels.end() || it->second == Label::kUnknown) continue;
    data.rows.push_back({row.values, it->second == Label::kAts, row.kind,
                         row.trace_id + "/" + row.node_id});
  }
  return data;
}

std::size_t draw_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Dataset balance(const Dataset& data, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < data.rows.size(); ++i) (data.rows[i].ats ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) {
    throw InputError("cannot balance: dataset has only " +
                     std::string(pos.empty() ? "NonATS" : "ATS") + " rows");
  }
  auto& majority = pos.size() > neg.size() ? pos : neg;
  auto minority_size = std::min(pos.size(), neg.size());
  std::mt19937_64 rng(seed);
  shuffle(majority, rng);
  majority.resize(minority_size);

  std::vector<std::size_t> keep(pos);
  keep.insert(keep.end(), neg.begin(), neg.end());
  std::sort(keep.begin(), keep.end());
  Dataset out;
  out.feature_version = data.feature_version;
  out.feature_names = data.feature_names;
  out.rows.reserve(keep.size());
  for (auto i : keep) out.rows.push_back(data.rows[i]);
  return out;
}

double Tree::predict(const FeatureVector& x) const {
  std::size_t at = 0;
  while (!nodes[at].leaf()) {
    const auto& n = nodes[at];
    at = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[at].p();
}

Forest train(const Dataset& data, const ForestConfig& cfg) {
  if (data.rows.empty()) throw InputError("cannot train on an empty dataset");
  if (cfg.tree_count == 0) throw InputError("tree count must be at least 1");
  const auto d = data.feature_names.size();
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    const auto& x = data.rows[r].x;
    if (x.size() != d) {
      throw InputError("row " + std::to_string(r) + " has " + std::to_string(x.size()) +
                       " features, expected " + std::to_string(d));
    }
    for (std::size_t c = 0; c < d; ++c) {
      if (!std::isfinite(x[c])) {
        throw InputError("non-finite value at row " + std::to_string(r) + ", column " +
                         data.feature_names[c]);
      }
    }
  }
  auto mtry = cfg.features_per_split;
  if (mtry == 0) mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  mtry = std::clamp<std::size_t>(mtry, 1, d);

  Forest forest;
  forest.feature_version = data.feature_version;
  forest.feature_names = data.feature_names;
  forest.trees.resize(cfg.tree_count);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (auto i = next++; i < cfg.tree_count; i = next++) {
      TreeBuilder builder(data, cfg, mtry, splitmix64(cfg.seed ^ (i * 0x9e3779b97f4a7c15ULL)));
      forest.trees[i] = builder.build();
    }
  };
  auto threads = std::clamp<std::size_t>(cfg.threads, 1, cfg.tree_count);
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return forest;
}

Prediction predict(const Forest& forest, const FeatureVector& x, double threshold,
                   std::string_view feature_version) {
  require_compatible(forest, x.size(), feature_version);
  double sum = 0;
  for (const auto& t : forest.trees) sum += t.predict(x);
  Prediction p;
  p.score = forest.trees.empty() ? 0.0 : sum / static_cast<double>(forest.trees.size());
  p.ats = p.score >= threshold;
  return p;
}

Contributions contributions(const Forest& forest, const FeatureVector& x) {
  require_compatible(forest, x.size(), forest.feature_version);
  Contributions c;
  c.by_feature.assign(x.size(), 0.0);
  c.on_path.assign(x.size(), false);
  for (const auto& t : forest.trees) {
    std::size_t at = 0;
    c.prior += t.nodes[0].p();
    while (!t.nodes[at].leaf()) {
      const auto& n = t.nodes[at];
      auto f = static_cast<std::size_t>(n.feature);
      auto next = x[f] <= n.threshold ? n.left : n.right;
      c.by_feature[f] += t.nodes[next].p() - n.p();
      c.on_path[f] = true;
      at = next;
    }
  }
  double trees = static_cast<double>(forest.trees.size());
  c.prior /= trees;
  for (auto& v : c.by_feature) v /= trees;
  return c;
}

std::optional<std::size_t> top_contributor(const Contributions& c) {
  std::optional<std::size_t> best;
  for (std::size_t f = 0; f < c.by_feature.size(); ++f) {
    if (!c.on_path[f]) continue;
    if (!best || std::abs(c.by_feature[f]) > std::abs(c.by_feature[*best])) best = f;
  }
  return best;
}

std::vector<ImportanceEntry> feature_importance(const Forest& forest, const Dataset& data) {
  std::vector<std::size_t> wins(forest.feature_names.size(), 0);
  for (const auto& row : data.rows) {
    if (auto top = top_contributor(contributions(forest, row.x))) ++wins[*top];
  }
  std::vector<ImportanceEntry> out;
  for (std::size_t f = 0; f < wins.size(); ++f) {
    double pct = data.rows.empty() ? 0.0 : 100.0 * static_cast<double>(wins[f]) /
                                               static_cast<double>(data.rows.size());
    out.push_back({forest.feature_names[f], pct});
  }
  std::stable_sort(out.begin(), out.end(), [](const ImportanceEntry& a, const ImportanceEntry& b) {
    if (a.percent != b.percent) return a.percent > b.percent;
    return a.feature < b.feature;
  });
  return out;
}

double Confusion::accuracy() const {
  return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total());
}

double Confusion::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double Confusion::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

void Confusion::add(bool truth, bool predicted) {
  if (truth) {
    ++(predicted ? tp : fn);
  } else {
    ++(predicted ? fp : tn);
  }
}

std::vector<std::size_t> stratified_folds(const Dataset& data, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InputError("cross-validation needs at least 2 folds");
  std::vector<std::size_t> fold(data.rows.size(), 0);
  std::mt19937_64 rng(seed);
  for (bool cls : {true, false}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
      if (data.rows[i].ats == cls) members.push_back(i);
    }
    if (members.size() < k) {
      throw InputError(std::string(cls ? "ATS" : "NonATS") + " class has " +
                       std::to_string(members.size()) + " rows, fewer than " + std::to_string(k) +
                       " folds");
    }
    shuffle(members, rng);
    for (std::size_t j = 0; j < members.size(); ++j) fold[members[j]] = j % k;
  }
  return fold;
}

EvalReport cross_validate(const Dataset& data, std::size_t k, const ForestConfig& cfg,
                          double threshold) {
  auto fold = stratified_folds(data, k, cfg.seed);
  EvalReport report;
  report.scores.assign(data.rows.size(), 0.0);
  report.folds.resize(k);
  for (std::size_t f = 0; f < k; ++f) {
    Dataset train_set;
    train_set.feature_version = data.feature_version;
    train_set.feature_names = data.feature_names;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
      if (fold[i] != f) train_set.rows.push_back(data.rows[i]);
    }
    auto fold_seed = splitmix64(cfg.seed + 0x51ed270b27e5f3a1ULL * (f + 1));
    if (cfg.balance == BalanceStrategy::kDownsample) train_set = balance(train_set, fold_seed);
    ForestConfig fold_cfg = cfg;
    fold_cfg.seed = fold_seed;
    auto forest = train(train_set, fold_cfg);
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
      if (fold[i] != f) continue;
      auto p = predict(forest, data.rows[i].x, threshold, data.feature_version);
      report.scores[i] = p.score;
      report.overall.add(data.rows[i].ats, p.ats);
      report.by_kind[data.rows[i].kind].add(data.rows[i].ats, p.ats);
      report.folds[f].add(data.rows[i].ats, p.ats);
    }
  }
  return report;
}

std::string format_report(const EvalReport& report) {
  nlohmann::ordered_json j = confusion_json(report.overall);
  nlohmann::ordered_json kinds = nlohmann::ordered_json::object();
  for (const auto& [kind, c] : report.by_kind) kinds[std::string(to_string(kind))] = confusion_json(c);
  j["by_kind"] = kinds;
  j["folds"] = nlohmann::ordered_json::array();
  for (const auto& c : report.folds) j["folds"].push_back(confusion_json(c));
  return j.dump(2) + "\n";
}

std::string serialize_forest(const Forest& forest) {
  std::string out = "linkdeco-forest 1\n";
  out += "features " + forest.feature_version + " " + std::to_string(forest.feature_names.size()) +
         "\n";
  for (const auto& name : forest.feature_names) out += name + "\n";
  out += "trees " + std::to_string(forest.trees.size()) + "\n";
  for (const auto& t : forest.trees) {
    out += "tree " + std::to_string(t.nodes.size()) + "\n";
    for (const auto& n : t.nodes) {
      out += std::to_string(n.feature) + " " + text::format_double(n.threshold) + " " +
             std::to_string(n.left) + " " + std::to_string(n.right) + " " + std::to_string(n.ats) +
             " " + std::to_string(n.total) + "\n";
    }
  }
  return out;
}

Forest parse_forest(std::string_view content) {
  auto all = text::lines(content);
  std::size_t at = 0;
  auto next = [&](const char* what) -> std::vector<std::string_view> {
    if (at >= all.size()) throw InputError(std::string("forest file truncated before ") + what);
    return text::split(all[at++], ' ');
  };
  auto number = [&](std::string_view s) {
    try {
      return text::parse_uint(s);
    } catch (const InputError&) {
      throw InputError("forest line " + std::to_string(at) + ": bad number '" + std::string(s) + "'");
    }
  };

  auto magic = next("header");
  if (magic.size() != 2 || magic[0] != "linkdeco-forest") throw InputError("not a forest file");
  if (magic[1] != "1") throw InvariantError("unsupported forest format " + std::string(magic[1]));

  Forest forest;
  auto features = next("features");
  if (features.size() != 3 || features[0] != "features") throw InputError("forest: bad features line");
  forest.feature_version = features[1];
  auto d = number(features[2]);
  for (std::size_t i = 0; i < d; ++i) forest.feature_names.emplace_back(next("feature names")[0]);

  auto trees = next("trees");
  if (trees.size() != 2 || trees[0] != "trees") throw InputError("forest: bad trees line");
  forest.trees.resize(number(trees[1]));
  for (auto& t : forest.trees) {
    auto head = next("tree");
    if (head.size() != 2 || head[0] != "tree") throw InputError("forest: bad tree line");
    t.nodes.resize(number(head[1]));
    if (t.nodes.empty()) throw InputError("forest: empty tree");
    for (auto& n : t.nodes) {
      auto cells = next("tree nodes");
      if (cells.size() != 6) throw InputError("forest line " + std::to_string(at) + ": expected 6 fields");
      n.feature = cells[0] == "-1" ? -1 : static_cast<int>(number(cells[0]));
      n.threshold = text::parse_double(cells[1]);
      n.left = static_cast<std::uint32_t>(number(cells[2]));
      n.right = static_cast<std::uint32_t>(number(cells[3]));
      n.ats = static_cast<std::uint32_t>(number(cells[4]));
      n.total = static_cast<std::uint32_t>(number(cells[5]));
      if (n.total == 0) throw InvariantError("forest line " + std::to_string(at) + ": empty node");
      if (n.feature >= static_cast<int>(d)) {
        throw InvariantError("forest line " + std::to_string(at) + ": feature index out of range");
      }
      if (!n.leaf() && (n.left >= t.nodes.size() || n.right >= t.nodes.size())) {
        throw InvariantError("forest line " + std::to_string(at) + ": child index out of range");
      }
    }
  }
  return forest;
}

std::string model_version(const Forest& forest) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_forest(forest)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* kHex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
  return out;
}

}  // namespace linkdeco
