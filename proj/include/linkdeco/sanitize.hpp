#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linkdeco/filter_list.hpp"

namespace linkdeco {

struct SanitizeResult {
  std::string url;
  std::size_t replaced = 0;
  std::size_t stripped = 0;
  /// Rules that matched the host but could not apply, e.g. `path|5` on a
  /// two-level path.
  std::vector<std::string> audit;
};

/// Rewrites the decorations of `url` matched by `rules`.
///
/// Replace swaps the value for a random alphanumeric token of the same
/// (decoded) length; strip removes the query or fragment entry. Path levels
/// are always replaced so the URL keeps its shape. `mode` overrides the
/// per-rule action when set. Unmatched decorations keep their exact bytes and
/// an empty rule set returns `url` unchanged. Tokens are drawn from a stream
/// seeded with `seed`, in URL order.
SanitizeResult sanitize(std::string_view url, std::string_view site, const FilterList& rules,
                        std::optional<RuleAction> mode, std::uint64_t seed);

}  // namespace linkdeco
