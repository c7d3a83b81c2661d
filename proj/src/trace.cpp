#include "linkdeco/trace.hpp"

#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace linkdeco {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::pair<EventKind, std::string_view> kKindNames[] = {
    {EventKind::kScriptLoad, "script_load"},
    {EventKind::kEvalScript, "eval_script"},
    {EventKind::kStorageSet, "storage_set"},
    {EventKind::kStorageGet, "storage_get"},
    {EventKind::kRequest, "request"},
    {EventKind::kResponse, "response"},
    {EventKind::kRedirect, "redirect"},
    {EventKind::kElementCreate, "element_create"},
    {EventKind::kElementRequest, "element_request"},
};

const Json& field(const Json& object, std::string_view name, std::size_t line) {
  auto it = object.find(name);
  if (it == object.end()) {
    throw TraceFormatError(line, "missing field '" + std::string(name) + "'");
  }
  return *it;
}

std::string string_field(const Json& object, std::string_view name, std::size_t line) {
  const auto& value = field(object, name, line);
  if (!value.is_string()) {
    throw TraceFormatError(line, "field '" + std::string(name) + "' must be a string");
  }
  return value.get<std::string>();
}

std::uint64_t uint_field(const Json& object, std::string_view name, std::size_t line) {
  const auto& value = field(object, name, line);
  if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<long long>() >= 0)) {
    throw TraceFormatError(line, "field '" + std::string(name) +
                                     "' must be a non-negative integer");
  }
  return value.get<std::uint64_t>();
}

Store store_field(const Json& object, std::size_t line) {
  auto text = string_field(object, "store", line);
  try {
    return parse_store(text);
  } catch (const InputError& e) {
    throw TraceFormatError(line, e.what());
  }
}

StorageAccess parse_storage(const Json& object, std::size_t line) {
  if (!object.is_object()) throw TraceFormatError(line, "storage entry must be an object");
  return {store_field(object, line), string_field(object, "key", line),
          string_field(object, "value", line)};
}

EventPayload parse_payload(EventKind kind, const Json& p, std::size_t line) {
  if (!p.is_object()) throw TraceFormatError(line, "payload must be an object");
  switch (kind) {
    case EventKind::kScriptLoad:
      return ScriptLoad{string_field(p, "script", line), string_field(p, "url", line),
                        uint_field(p, "length", line)};
    case EventKind::kEvalScript:
      return EvalScript{string_field(p, "script", line), uint_field(p, "length", line)};
    case EventKind::kStorageSet:
    case EventKind::kStorageGet:
      return parse_storage(p, line);
    case EventKind::kRequest:
    case EventKind::kElementRequest:
      return RequestSent{string_field(p, "request_id", line), string_field(p, "url", line)};
    case EventKind::kResponse: {
      ResponseReceived r;
      r.request_id = string_field(p, "request_id", line);
      const auto& status = field(p, "status", line);
      if (!status.is_number_integer()) throw TraceFormatError(line, "status must be an integer");
      r.status = status.get<int>();
      if (p.contains("body")) r.body = string_field(p, "body", line);
      if (p.contains("set_storage")) {
        const auto& list = p.at("set_storage");
        if (!list.is_array()) throw TraceFormatError(line, "set_storage must be an array");
        for (const auto& entry : list) r.set_storage.push_back(parse_storage(entry, line));
      }
      return r;
    }
    case EventKind::kRedirect:
      return Redirect{string_field(p, "from_request_id", line),
                      string_field(p, "request_id", line), string_field(p, "url", line)};
    case EventKind::kElementCreate:
      return ElementCreate{string_field(p, "element", line), string_field(p, "tag", line)};
  }
  throw TraceFormatError(line, "unhandled kind");
}

Json storage_json(const StorageAccess& s) {
  return Json{{"store", to_string(s.store)}, {"key", s.key}, {"value", s.value}};
}

Json payload_json(const EventPayload& payload) {
  return std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ScriptLoad>) {
          return Json{{"script", p.script}, {"url", p.url}, {"length", p.length}};
        } else if constexpr (std::is_same_v<T, EvalScript>) {
          return Json{{"script", p.script}, {"length", p.length}};
        } else if constexpr (std::is_same_v<T, StorageAccess>) {
          return storage_json(p);
        } else if constexpr (std::is_same_v<T, RequestSent>) {
          return Json{{"request_id", p.request_id}, {"url", p.url}};
        } else if constexpr (std::is_same_v<T, ResponseReceived>) {
          Json list = Json::array();
          for (const auto& s : p.set_storage) list.push_back(storage_json(s));
          return Json{{"request_id", p.request_id},
                      {"status", p.status},
                      {"body", p.body},
                      {"set_storage", list}};
        } else if constexpr (std::is_same_v<T, Redirect>) {
          return Json{{"from_request_id", p.from_request_id},
                      {"request_id", p.request_id},
                      {"url", p.url}};
        } else {
          return Json{{"element", p.element}, {"tag", p.tag}};
        }
      },
      payload);
}

bool payload_matches_kind(EventKind kind, const EventPayload& payload) {
  switch (kind) {
    case EventKind::kScriptLoad:
      return std::holds_alternative<ScriptLoad>(payload);
    case EventKind::kEvalScript:
      return std::holds_alternative<EvalScript>(payload);
    case EventKind::kStorageSet:
    case EventKind::kStorageGet:
      return std::holds_alternative<StorageAccess>(payload);
    case EventKind::kRequest:
    case EventKind::kElementRequest:
      return std::holds_alternative<RequestSent>(payload);
    case EventKind::kResponse:
      return std::holds_alternative<ResponseReceived>(payload);
    case EventKind::kRedirect:
      return std::holds_alternative<Redirect>(payload);
    case EventKind::kElementCreate:
      return std::holds_alternative<ElementCreate>(payload);
  }
  return false;
}

}  // namespace

TraceFormatError::TraceFormatError(std::size_t line, const std::string& message)
    : InputError("trace line " + std::to_string(line) + ": " + message), line_(line) {}

TraceInvariantError::TraceInvariantError(std::size_t line, const std::string& message)
    : InvariantError("trace line " + std::to_string(line) + ": " + message), line_(line) {}

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "request";
}

std::string_view to_string(Store store) {
  return store == Store::kCookie ? "cookie" : "localStorage";
}

EventKind parse_event_kind(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  throw InputError("unknown event kind '" + std::string(text) + "'");
}

Store parse_store(std::string_view text) {
  if (text == "cookie") return Store::kCookie;
  if (text == "localStorage") return Store::kLocalStorage;
  throw InputError("unknown store '" + std::string(text) + "'");
}

bool TraceEvent::operator==(const TraceEvent& other) const {
  return seq == other.seq && kind == other.kind && page_url == other.page_url &&
         site == other.site && actor == other.actor && payload == other.payload;
}

ValidationReport validate_trace(const Trace& trace) {
  ValidationReport report;
  auto add = [&](std::string message, std::vector<std::uint64_t> seqs, std::size_t line) {
    report.findings.push_back({std::move(message), std::move(seqs), line});
  };

  std::map<std::uint64_t, const TraceEvent*> seen_seq;
  std::set<std::string> requests;
  std::set<std::string> scripts;
  std::set<std::string> elements;
  std::set<std::string> answered;
  const TraceEvent* previous = nullptr;

  for (const auto& e : trace.events) {
    auto [it, inserted] = seen_seq.emplace(e.seq, &e);
    if (!inserted) {
      add("duplicate seq " + std::to_string(e.seq), {it->second->seq, e.seq}, e.line);
    } else if (previous && e.seq < previous->seq) {
      add("seq " + std::to_string(e.seq) + " is not greater than preceding seq " +
              std::to_string(previous->seq),
          {previous->seq, e.seq}, e.line);
    }
    previous = &e;

    if (e.site != trace.site) {
      add("event site '" + e.site + "' differs from trace site '" + trace.site + "'", {e.seq},
          e.line);
    }
    if (e.actor.empty()) add("empty actor", {e.seq}, e.line);
    if (!payload_matches_kind(e.kind, e.payload)) {
      add("payload does not match kind " + std::string(to_string(e.kind)), {e.seq}, e.line);
      continue;
    }

    auto define_request = [&](const std::string& id) {
      if (id.empty()) {
        add("empty request id", {e.seq}, e.line);
      } else if (!requests.insert(id).second) {
        add("request id '" + id + "' defined twice", {e.seq}, e.line);
      }
    };
    auto reference_request = [&](const std::string& id) {
      if (!requests.contains(id)) {
        add("dangling request reference '" + id + "'", {e.seq}, e.line);
      }
    };

    switch (e.kind) {
      case EventKind::kScriptLoad: {
        const auto& p = std::get<ScriptLoad>(e.payload);
        if (p.script.empty() || !scripts.insert(p.script).second) {
          add("script id '" + p.script + "' empty or defined twice", {e.seq}, e.line);
        }
        break;
      }
      case EventKind::kEvalScript: {
        const auto& p = std::get<EvalScript>(e.payload);
        if (p.script.empty() || !scripts.insert(p.script).second) {
          add("script id '" + p.script + "' empty or defined twice", {e.seq}, e.line);
        }
        break;
      }
      case EventKind::kStorageSet:
      case EventKind::kStorageGet:
        if (std::get<StorageAccess>(e.payload).key.empty()) {
          add("storage event with empty key", {e.seq}, e.line);
        }
        break;
      case EventKind::kRequest:
      case EventKind::kElementRequest:
        define_request(std::get<RequestSent>(e.payload).request_id);
        break;
      case EventKind::kResponse: {
        const auto& p = std::get<ResponseReceived>(e.payload);
        reference_request(p.request_id);
        if (!answered.insert(p.request_id).second) {
          add("second response for request '" + p.request_id + "'", {e.seq}, e.line);
        }
        for (const auto& s : p.set_storage) {
          if (s.key.empty()) add("response sets storage with empty key", {e.seq}, e.line);
        }
        break;
      }
      case EventKind::kRedirect: {
        const auto& p = std::get<Redirect>(e.payload);
        reference_request(p.from_request_id);
        define_request(p.request_id);
        break;
      }
      case EventKind::kElementCreate: {
        const auto& p = std::get<ElementCreate>(e.payload);
        if (p.element.empty() || !elements.insert(p.element).second) {
          add("element id '" + p.element + "' empty or defined twice", {e.seq}, e.line);
        }
        break;
      }
    }
  }
  return report;
}

Trace parse_trace(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    Json object;
    try {
      object = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw TraceFormatError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!object.is_object()) throw TraceFormatError(line_no, "expected a JSON object");

    if (!have_header) {
      const auto& format = field(object, "format", line_no);
      if (!format.is_number_integer()) throw TraceFormatError(line_no, "format must be an integer");
      if (format.get<int>() != kTraceFormatVersion) {
        throw TraceInvariantError(line_no, "unsupported trace format " +
                                               std::to_string(format.get<int>()) + " (expected " +
                                               std::to_string(kTraceFormatVersion) + ")");
      }
      if (object.contains("site")) trace.site = string_field(object, "site", line_no);
      if (object.contains("page_url")) trace.page_url = string_field(object, "page_url", line_no);
      have_header = true;
      continue;
    }

    for (const auto& [name, value] : object.items()) {
      if (name != "seq" && name != "kind" && name != "page_url" && name != "site" &&
          name != "actor" && name != "payload") {
        throw TraceFormatError(line_no, "unexpected field '" + name + "'");
      }
    }
    TraceEvent event;
    event.line = line_no;
    event.seq = uint_field(object, "seq", line_no);
    try {
      event.kind = parse_event_kind(string_field(object, "kind", line_no));
    } catch (const TraceFormatError&) {
      throw;
    } catch (const InputError& e) {
      throw TraceFormatError(line_no, e.what());
    }
    event.page_url = string_field(object, "page_url", line_no);
    event.site = string_field(object, "site", line_no);
    event.actor = string_field(object, "actor", line_no);
    event.payload = parse_payload(event.kind, field(object, "payload", line_no), line_no);
    if (trace.events.empty() && trace.site.empty()) {
      trace.site = event.site;
      trace.page_url = event.page_url;
    }
    trace.events.push_back(std::move(event));
  }

  auto report = validate_trace(trace);
  if (!report.ok()) {
    const auto& first = report.findings.front();
    throw TraceInvariantError(first.line, first.message);
  }
  return trace;
}

Trace parse_trace(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trace(in);
}

std::string serialize_trace(const Trace& trace) {
  std::string out =
      Json{{"format", kTraceFormatVersion}, {"site", trace.site}, {"page_url", trace.page_url}}
          .dump();
  out += '\n';
  for (const auto& e : trace.events) {
    Json object{{"seq", e.seq},
                {"kind", to_string(e.kind)},
                {"page_url", e.page_url},
                {"site", e.site},
                {"actor", e.actor},
                {"payload", payload_json(e.payload)}};
    out += object.dump();
    out += '\n';
  }
  return out;
}

}  // namespace linkdeco
