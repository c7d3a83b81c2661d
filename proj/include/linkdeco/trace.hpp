#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "linkdeco/error.hpp"

namespace linkdeco {

/// Event log of one page load, as written by a crawler adapter.
///
/// File format: UTF-8, one JSON object per line. The first line is a header
/// `{"format":1,"site":...,"page_url":...}`; every following line is an
/// event with exactly the fields `seq`, `kind`, `page_url`, `site`, `actor`
/// and `payload`. Payload fields per kind:
///
///   script_load     {"script","url","length"}      actor: loader
///   eval_script     {"script","length"}            actor: parent script
///   storage_set     {"store","key","value"}        store: cookie | localStorage
///   storage_get     {"store","key","value"}
///   request         {"request_id","url"}           actor: script or document
///   element_request {"request_id","url"}           actor: element
///   response        {"request_id","status","body","set_storage":[{"store","key","value"}]}
///   redirect        {"from_request_id","request_id","url"}
///   element_create  {"element","tag"}              actor: creating script

inline constexpr int kTraceFormatVersion = 1;

enum class EventKind {
  kScriptLoad,
  kEvalScript,
  kStorageSet,
  kStorageGet,
  kRequest,
  kResponse,
  kRedirect,
  kElementCreate,
  kElementRequest,
};

enum class Store { kCookie, kLocalStorage };

std::string_view to_string(EventKind kind);
std::string_view to_string(Store store);
EventKind parse_event_kind(std::string_view text);
Store parse_store(std::string_view text);

struct ScriptLoad {
  std::string script;
  std::string url;
  std::uint64_t length = 0;
  bool operator==(const ScriptLoad&) const = default;
};

struct EvalScript {
  std::string script;
  std::uint64_t length = 0;
  bool operator==(const EvalScript&) const = default;
};

struct StorageAccess {
  Store store = Store::kCookie;
  std::string key;
  std::string value;
  bool operator==(const StorageAccess&) const = default;
};

struct RequestSent {
  std::string request_id;
  std::string url;
  bool operator==(const RequestSent&) const = default;
};

struct ResponseReceived {
  std::string request_id;
  int status = 200;
  std::string body;
  std::vector<StorageAccess> set_storage;
  bool operator==(const ResponseReceived&) const = default;
};

struct Redirect {
  std::string from_request_id;
  std::string request_id;
  std::string url;
  bool operator==(const Redirect&) const = default;
};

struct ElementCreate {
  std::string element;
  std::string tag;
  bool operator==(const ElementCreate&) const = default;
};

using EventPayload = std::variant<ScriptLoad, EvalScript, StorageAccess, RequestSent,
                                  ResponseReceived, Redirect, ElementCreate>;

inline constexpr std::string_view kDocumentActor = "document";

struct TraceEvent {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kRequest;
  std::string page_url;
  std::string site;
  std::string actor;
  EventPayload payload;
  std::size_t line = 0;  // 1-based source line, 0 when built in memory

  /// Compares everything except `line`.
  bool operator==(const TraceEvent& other) const;
};

struct Trace {
  std::string site;
  std::string page_url;
  std::vector<TraceEvent> events;

  bool operator==(const Trace&) const = default;
};

struct ValidationFinding {
  std::string message;
  std::vector<std::uint64_t> seqs;  // events involved
  std::size_t line = 0;             // line of the offending event, if known
};

struct ValidationReport {
  std::vector<ValidationFinding> findings;
  bool ok() const { return findings.empty(); }
};

/// Input that does not follow the line format (bad JSON, missing field,
/// unknown kind). `line()` is 1-based.
class TraceFormatError : public InputError {
 public:
  TraceFormatError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input whose events break a trace invariant.
class TraceInvariantError : public InvariantError {
 public:
  TraceInvariantError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Checks sequence monotonicity, request references, storage keys, site
/// consistency and id uniqueness. Never throws.
ValidationReport validate_trace(const Trace& trace);

/// Parses and validates. An empty stream yields an empty Trace; otherwise the
/// header line is required.
Trace parse_trace(std::istream& in);
Trace parse_trace(std::string_view text);

/// Inverse of parse_trace(); output ends with a newline.
std::string serialize_trace(const Trace& trace);

}  // namespace linkdeco
