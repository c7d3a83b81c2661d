#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "linkdeco/encoding.hpp"
#include "linkdeco/ground_truth.hpp"
#include "linkdeco/trace.hpp"

namespace linkdeco {

/// A trace together with the id used for it in files and reports.
struct NamedTrace {
  std::string id;
  Trace trace;

  bool operator==(const NamedTrace&) const = default;
};

struct SyntheticConfig {
  std::size_t sites = 300;
  std::size_t trackers_per_site = 4;
  std::size_t functional_params = 2;  // extra functional parameters per first-party request
  std::size_t id_length = 16;
  std::string id_alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  std::vector<Encoding> encodings = {kAllEncodings.begin(), kAllEncodings.end()};
  std::uint64_t seed = 1;

  /// Throws InputError when a field is out of range (id_length < 8, empty
  /// alphabet or encodings, more trackers than the built-in pool).
  void validate() const;
};

/// Number of tracker companies the generator can draw from.
std::size_t tracker_pool_size();

/// Generated corpus. `labels` are the planted classes: ATS for every
/// decoration that carries an encoded tracker identifier, NonATS for
/// first-party parameters and short functional parameters on tracker
/// requests. The three label-source texts reproduce the corpus in the
/// formats read by the ground-truth module.
struct SyntheticCorpus {
  std::vector<NamedTrace> traces;
  std::vector<LabeledDecoration> labels;
  std::string request_rules;
  std::string cookie_purposes;
  std::string curated;
};

/// Deterministic per config: one trace per site, independent of the others.
SyntheticCorpus generate_synthetic(const SyntheticConfig& cfg);

}  // namespace linkdeco
