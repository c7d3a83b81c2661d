#include "linkdeco/evasion.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <set>

#include "linkdeco/encoding.hpp"
#include "linkdeco/forest.hpp"
#include "linkdeco/url.hpp"

namespace linkdeco {

namespace {

// Applies `rewrite(trace index, trace, request id, url)` to every request and
// redirect URL that decomposes; the URL is reassembled when it returns true.
template <typename Rewrite>
std::vector<NamedTrace> rewrite_urls(const std::vector<NamedTrace>& traces, Rewrite rewrite) {
  std::vector<NamedTrace> out = traces;
  for (std::size_t t = 0; t < out.size(); ++t) {
    for (auto& e : out[t].trace.events) {
      std::string* url = nullptr;
      std::string request_id;
      if (auto* r = std::get_if<RequestSent>(&e.payload)) {
        url = &r->url;
        request_id = r->request_id;
      } else if (auto* r = std::get_if<Redirect>(&e.payload)) {
        url = &r->url;
        request_id = r->request_id;
      }
      if (!url) continue;
      DecoratedUrl parsed;
      try {
        parsed = decompose(*url);
      } catch (const InputError&) {
        continue;
      }
      if (rewrite(t, out[t], request_id, parsed)) *url = reassemble(parsed);
    }
  }
  return out;
}

std::vector<std::string> chunks(const std::string& value) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < value.size(); i += kSplitChunk) out.push_back(value.substr(i, kSplitChunk));
  return out;
}

}  // namespace

std::vector<NamedTrace> evade_rename(const std::vector<NamedTrace>& traces, std::uint64_t seed,
                                     PathPermutations* permutations) {
  static constexpr std::string_view kAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::vector<std::mt19937_64> rngs;
  for (std::size_t t = 0; t < traces.size(); ++t) rngs.emplace_back(splitmix64(seed + t));
  std::vector<std::map<std::pair<std::string, std::string>, std::string>> tokens(traces.size());

  return rewrite_urls(traces, [&](std::size_t t, const NamedTrace& named,
                                  const std::string& request_id, DecoratedUrl& url) {
    auto& rng = rngs[t];
    auto& names = tokens[t];
    auto rename = [&](UrlParam& param) {
      if (param.key.empty()) return;
      auto& token = names[{url.fqdn, param.decoded_key()}];
      if (token.empty()) {
        token = "k";
        for (int i = 0; i < 10; ++i) token += kAlphabet[draw_index(rng, kAlphabet.size())];
      }
      param.key = token;
    };
    if (url.query) {
      for (auto& p : *url.query) rename(p);
    }
    if (url.fragment && url.fragment->keyed()) {
      for (auto& p : url.fragment->params) rename(p);
    }
    std::vector<std::size_t> perm(url.path_segments.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    shuffle(perm, rng);
    std::vector<std::string> moved;
    for (auto i : perm) moved.push_back(url.path_segments[i]);
    url.path_segments = std::move(moved);
    if (permutations) (*permutations)[named.id][request_id] = perm;
    return true;
  });
}

std::vector<NamedTrace> evade_split(const std::vector<NamedTrace>& traces, DerivedIds* derived) {
  return rewrite_urls(traces, [&](std::size_t, const NamedTrace& named, const std::string&,
                                  DecoratedUrl& url) {
    const auto& site = named.trace.site;
    auto note = [&](const std::string& new_key, const std::string& old_key) {
      if (!derived) return;
      auto& origins = (*derived)[{site, url.fqdn, new_key}];
      DecorationId origin{site, url.fqdn, old_key};
      if (std::find(origins.begin(), origins.end(), origin) == origins.end()) {
        origins.push_back(origin);
      }
    };

    std::vector<std::string> segments;
    for (std::size_t i = 0; i < url.path_segments.size(); ++i) {
      auto value = percent_decode(url.path_segments[i]);
      if (value.size() <= kSplitChunk) {
        note(path_key(segments.size()), path_key(i));
        segments.push_back(url.path_segments[i]);
        continue;
      }
      for (const auto& c : chunks(value)) {
        note(path_key(segments.size()), path_key(i));
        segments.push_back(percent_encode(c));
      }
    }
    url.path_segments = std::move(segments);

    auto split_params = [&](std::vector<UrlParam>& params) {
      std::vector<UrlParam> out;
      for (const auto& p : params) {
        auto value = percent_decode(p.value);
        if (p.empty() || value.size() <= kSplitChunk) {
          if (!p.empty()) note(p.decoded_key(), p.decoded_key());
          out.push_back(p);
          continue;
        }
        auto parts = chunks(value);
        for (std::size_t i = 0; i < parts.size(); ++i) {
          auto suffix = "_" + std::to_string(i);
          note(p.decoded_key() + suffix, p.decoded_key());
          out.push_back({p.key + suffix, percent_encode(parts[i]), true});
        }
      }
      params = std::move(out);
    };
    if (url.query) split_params(*url.query);
    if (url.fragment) {
      if (url.fragment->keyed()) {
        split_params(url.fragment->params);
      } else if (!url.fragment->text.empty()) {
        auto value = percent_decode(url.fragment->text);
        if (value.size() > kSplitChunk) {
          auto parts = chunks(value);
          for (std::size_t i = 0; i < parts.size(); ++i) {
            auto key = std::string(kFragmentKey) + "_" + std::to_string(i);
            note(key, std::string(kFragmentKey));
            url.fragment->params.push_back({key, percent_encode(parts[i]), true});
          }
        } else {
          note(std::string(kFragmentKey), std::string(kFragmentKey));
        }
      }
    }
    return true;
  });
}

std::vector<NamedTrace> evade_combine(const std::vector<NamedTrace>& traces) {
  return rewrite_urls(traces, [&](std::size_t, const NamedTrace& named, const std::string&,
                                  DecoratedUrl& url) {
    auto decorations = name_decorations(url, named.trace.site);
    if (decorations.empty()) return false;
    std::string joined;
    for (const auto& d : decorations) {
      if (!joined.empty()) joined += '&';
      joined += d.id.key + "=" + d.value;
    }
    url.path_segments = {sha256_hex(joined)};
    url.rooted = true;
    url.query.reset();
    url.fragment.reset();
    return true;
  });
}

std::map<DecorationId, Label> inherit_labels(const std::map<DecorationId, Label>& labels,
                                             const DerivedIds& derived) {
  std::map<DecorationId, Label> out;
  for (const auto& [id, origins] : derived) {
    std::optional<Label> common;
    for (const auto& o : origins) {
      auto it = labels.find(o);
      auto label = it == labels.end() ? Label::kUnknown : it->second;
      if (!common) {
        common = label;
      } else if (*common != label) {
        common = Label::kUnknown;
      }
    }
    out[id] = common.value_or(Label::kUnknown);
  }
  return out;
}

std::string request_of_decoration(const std::string& node_id) {
  // decoration:<request id>:<kind>:<position>
  constexpr std::string_view kPrefix = "decoration:";
  auto last = node_id.rfind(':');
  auto kind = last == std::string::npos || last == 0 ? std::string::npos : node_id.rfind(':', last - 1);
  if (node_id.rfind(kPrefix, 0) != 0 || kind == std::string::npos || kind < kPrefix.size()) {
    throw InputError("not a decoration node id: '" + node_id + "'");
  }
  return "request:" + node_id.substr(kPrefix.size(), kind - kPrefix.size());
}

std::vector<std::size_t> request_constant_features(const std::vector<FeatureRow>& rows) {
  const auto d = feature_names().size();
  std::vector<bool> constant(d, true);
  std::map<std::pair<std::string, std::string>, const FeatureRow*> first;
  for (const auto& row : rows) {
    auto [it, inserted] = first.emplace(std::pair{row.trace_id, request_of_decoration(row.node_id)}, &row);
    if (inserted) continue;
    for (std::size_t f = 0; f < d; ++f) {
      if (row.values[f] != it->second->values[f]) constant[f] = false;
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < d; ++f) {
    if (constant[f]) out.push_back(f);
  }
  return out;
}

}  // namespace linkdeco
