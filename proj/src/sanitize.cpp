#include "linkdeco/sanitize.hpp"

#include <algorithm>
#include <random>

namespace linkdeco {

namespace {

constexpr std::string_view kTokenAlphabet =
    "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

std::string random_token(std::mt19937_64& rng, std::size_t length) {
  std::string token(length, '0');
  for (auto& c : token) {
    auto index = static_cast<std::size_t>(
        (static_cast<unsigned __int128>(rng()) * kTokenAlphabet.size()) >> 64);
    c = kTokenAlphabet[index];
  }
  return token;
}

std::string join(const std::vector<UrlParam>& params) {
  std::string out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out += '&';
    out += params[i].key;
    if (params[i].has_separator) out += '=' + params[i].value;
  }
  return out;
}

}  // namespace

SanitizeResult sanitize(std::string_view url, std::string_view site, const FilterList& rules,
                        std::optional<RuleAction> mode, std::uint64_t seed) {
  SanitizeResult result;
  result.url = std::string(url);
  if (rules.empty()) return result;

  DecoratedUrl parsed = decompose(url);
  auto decorations = name_decorations(parsed, site);
  std::mt19937_64 rng(seed);

  for (const auto& rule : rules.rules) {
    if (rule.kind != DecorationKind::kPath || !rule.matches_host(site, parsed.fqdn)) continue;
    auto level = path_level(rule.key);
    if (level && *level >= parsed.path_segments.size()) {
      result.audit.push_back("rule " + rule.fqdn + "|" + rule.key + " inapplicable: path has " +
                             std::to_string(parsed.path_segments.size()) + " levels");
    }
  }

  auto action_for = [&](const LinkDecoration& d) -> std::optional<RuleAction> {
    const FilterRule* rule = rules.find(d);
    if (!rule) return std::nullopt;
    if (d.kind == DecorationKind::kPath) return RuleAction::kReplace;
    return mode.value_or(rule->action);
  };

  // Decorations come out of name_decorations() in component order, so walk
  // the components in the same order and consume them one by one.
  std::size_t next = 0;
  bool changed = false;
  for (auto& segment : parsed.path_segments) {
    const auto& d = decorations[next++];
    if (action_for(d)) {
      segment = random_token(rng, d.value.size());
      ++result.replaced;
      changed = true;
    }
  }

  auto rewrite_params = [&](std::vector<UrlParam>& params) {
    std::vector<UrlParam> kept;
    for (auto& param : params) {
      if (param.empty()) {
        kept.push_back(param);
        continue;
      }
      const auto& d = decorations[next++];
      auto action = action_for(d);
      if (!action) {
        kept.push_back(param);
      } else if (*action == RuleAction::kStrip) {
        ++result.stripped;
        changed = true;
      } else {
        param.value = random_token(rng, d.value.size());
        kept.push_back(param);
        ++result.replaced;
        changed = true;
      }
    }
    params = std::move(kept);
  };

  if (parsed.query) {
    rewrite_params(*parsed.query);
    bool only_empty = std::all_of(parsed.query->begin(), parsed.query->end(),
                                  [](const UrlParam& p) { return p.empty(); });
    if (result.stripped > 0 && only_empty) parsed.query.reset();
  }
  if (parsed.fragment) {
    if (parsed.fragment->keyed()) {
      rewrite_params(parsed.fragment->params);
      if (parsed.fragment->params.empty()) {
        parsed.fragment.reset();
      } else {
        parsed.fragment->text = join(parsed.fragment->params);
      }
    } else if (!parsed.fragment->text.empty()) {
      const auto& d = decorations[next++];
      if (auto action = action_for(d)) {
        changed = true;
        if (*action == RuleAction::kStrip) {
          parsed.fragment.reset();
          ++result.stripped;
        } else {
          parsed.fragment->text = random_token(rng, d.value.size());
          ++result.replaced;
        }
      }
    }
  }

  if (changed) result.url = reassemble(parsed);
  return result;
}

}  // namespace linkdeco
