#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "linkdeco/features.hpp"
#include "linkdeco/ground_truth.hpp"
#include "linkdeco/synthetic.hpp"

namespace linkdeco {

/// Path permutations applied by evade_rename(): for every trace id and
/// request id, `perm[j]` is the original level now at level `j`.
using PathPermutations = std::map<std::string, std::map<std::string, std::vector<std::size_t>>>;

/// Replaces every non-empty query key and keyed-fragment key with a random
/// token (one token per distinct (fqdn, key) within a trace) and shuffles the
/// directory levels of every request URL. Values keep their exact bytes.
std::vector<NamedTrace> evade_rename(const std::vector<NamedTrace>& traces, std::uint64_t seed,
                                     PathPermutations* permutations = nullptr);

/// Chunk length used by evade_split().
inline constexpr std::size_t kSplitChunk = 8;

/// Origin of every decoration id created by an evasion, per site.
using DerivedIds = std::map<DecorationId, std::vector<DecorationId>>;

/// Replaces every decoration whose decoded value is longer than kSplitChunk
/// by ceil(len / kSplitChunk) siblings carrying consecutive chunks: query and
/// fragment keys get `_<i>` suffixes, path levels become consecutive levels
/// and an opaque fragment becomes `fragment_<i>=` entries.
std::vector<NamedTrace> evade_split(const std::vector<NamedTrace>& traces,
                                    DerivedIds* derived = nullptr);

/// Replaces all decorations of every decorated request URL by a single path
/// level holding the SHA-256 hex of the decorations joined as
/// `key=value&...` (decoded, URL order). Query and fragment are dropped.
std::vector<NamedTrace> evade_combine(const std::vector<NamedTrace>& traces);

/// Labels for derived ids: the common label of their origins, or Unknown
/// when the origins disagree or are unlabeled.
std::map<DecorationId, Label> inherit_labels(const std::map<DecorationId, Label>& labels,
                                             const DerivedIds& derived);

/// Request node id (`request:<id>`) a decoration node id belongs to.
std::string request_of_decoration(const std::string& node_id);

/// Indices of features whose value is identical for all decorations of each
/// request in `rows`.
std::vector<std::size_t> request_constant_features(const std::vector<FeatureRow>& rows);

}  // namespace linkdeco
