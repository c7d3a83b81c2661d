#pragma once

#include <string>
#include <vector>

namespace fixtures {

/// One trace line. `payload` is the JSON object text.
std::string event(int seq, const std::string& kind, const std::string& actor,
                  const std::string& payload, const std::string& site = "example.com");
std::string header(const std::string& site = "example.com");

/// A script on example.com reads the info cookie, sends it to tracker1,
/// stores the UID tracker1 returns and forwards it to tracker2 and
/// tracker3. Seven events; `with_responses` adds responses for the last
/// two requests.
std::string sync_chain_trace(bool with_responses);

/// Ten-node graph with a redirect, an element request and both flow kinds.
std::string ten_node_trace();

}  // namespace fixtures
