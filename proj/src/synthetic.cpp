#include "linkdeco/synthetic.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <stdexcept>

#include "linkdeco/forest.hpp"
#include "linkdeco/url.hpp"

namespace linkdeco {

namespace {

enum class Slot { kQuery, kPath, kKeyedFragment, kFragment };

struct Company {
  std::string_view name;
  std::string_view script;  // file served from cdn.<name>.example
  std::string_view cookie;  // identifier cookie
  Slot slot;
  std::string_view key;        // query or fragment key carrying the identifier
  std::string_view local_key;  // query key for a localStorage id, empty if unused
  bool eval;                   // requests go through an eval'd script
  bool pixels;                 // requests go through image elements
};

// The first entry doubles as a tag manager that loads some of the others.
constexpr Company kCompanies[] = {
    {"tagspring", "gtm.js", "_tsp_id", Slot::kQuery, "tid", "", false, false},
    {"adnexus", "ads.js", "_anx_uid", Slot::kQuery, "uid", "", false, true},
    {"pixelhub", "pixel.js", "_phb", Slot::kPath, "", "", false, true},
    {"syncwave", "sync.js", "sw_id", Slot::kKeyedFragment, "sw_uid", "", true, false},
    {"metricsly", "analytics.js", "_mly_cid", Slot::kQuery, "cid", "sid", false, false},
    {"beaconate", "beacon.js", "bcn", Slot::kPath, "", "", true, false},
    {"admesh", "loader.js", "_amsh", Slot::kFragment, "", "", false, false},
    {"clickstream", "cs.js", "cs_visitor", Slot::kQuery, "visitor", "vsid", true, false},
    {"audiencia", "canvas-audience.js", "_aud", Slot::kQuery, "aud_id", "", false, true},
    {"retargo", "retarget.js", "rt_u", Slot::kQuery, "rt_user", "", false, false},
    {"bidlane", "prebid.js", "_bl_uid", Slot::kQuery, "bidder_uid", "", true, false},
    {"fontprint", "font-fingerprint.js", "fpr", Slot::kQuery, "fpid", "lfp", false, false},
};

constexpr std::string_view kSections[] = {
    "accessories", "collection", "homepage", "newsletter", "settings", "seasonal",
    "bestsellers", "clearance", "essentials", "sneakers", "dresses", "offers"};
constexpr std::string_view kSorts[] = {"relevance", "newest", "recommended", "bestsellers",
                                       "rating", "lowest"};
constexpr std::string_view kViews[] = {"grid", "list", "compact", "gallery"};
constexpr std::string_view kLangs[] = {"en-US", "de-DE", "fr-FR", "es-ES"};
constexpr std::string_view kSearches[] = {"dress+shoes", "summer+dresses", "sweet+treats",
                                          "green+teas", "sale+sandals", "rose+seeds"};
constexpr std::string_view kRefs[] = {"homepage", "sidebars", "footer", "newsletter", "banners"};
constexpr std::string_view kExtraKeys[] = {"currency", "region", "layout", "variant", "mode"};
constexpr std::string_view kExtraValues[] = {"EUR",      "USD",         "eu-west",  "standard",
                                             "default",  "fullscreen",  "seller",   "reduced",
                                             "assorted", "reassessed",  "selected", "preferred"};
constexpr std::string_view kTrackerFunctional[][2] = {{"v", "2"}, {"fmt", "gif"}, {"ver", "1.4"}};

class LabelBook {
 public:
  void put(const DecorationId& id, Label label) {
    auto [it, inserted] = labels_.emplace(id, label);
    if (!inserted && it->second != label) {
      throw std::logic_error("generator assigned two labels to " + id.to_string());
    }
  }
  std::vector<LabeledDecoration> finish() const {
    std::vector<LabeledDecoration> out;
    for (const auto& [id, label] : labels_) out.push_back({id, label, {"planted"}, false});
    return out;
  }

 private:
  std::map<DecorationId, Label> labels_;
};

// Builds a URL part by part and remembers the planted class of each
// decoration it adds.
class UrlBuilder {
 public:
  explicit UrlBuilder(std::string host) : host_(std::move(host)) {}

  UrlBuilder& dir(std::string raw, Label label) {
    labels_.emplace_back(path_key(dirs_.size()), label);
    dirs_.push_back(std::move(raw));
    return *this;
  }
  UrlBuilder& resource(std::string name) {
    resource_ = std::move(name);
    return *this;
  }
  UrlBuilder& param(std::string key, std::string raw, Label label) {
    labels_.emplace_back(key, label);
    query_.emplace_back(std::move(key), std::move(raw));
    return *this;
  }
  UrlBuilder& fragment_param(std::string key, std::string raw, Label label) {
    labels_.emplace_back(key, label);
    fragment_params_.emplace_back(std::move(key), std::move(raw));
    return *this;
  }
  UrlBuilder& fragment(std::string raw, Label label) {
    labels_.emplace_back(std::string(kFragmentKey), label);
    fragment_ = std::move(raw);
    return *this;
  }

  std::string str() const {
    std::string url = "https://" + host_ + "/";
    for (const auto& d : dirs_) url += d + "/";
    url += resource_;
    for (std::size_t i = 0; i < query_.size(); ++i) {
      url += (i == 0 ? "?" : "&") + query_[i].first + "=" + query_[i].second;
    }
    if (!fragment_params_.empty()) {
      for (std::size_t i = 0; i < fragment_params_.size(); ++i) {
        url += (i == 0 ? "#" : "&") + fragment_params_[i].first + "=" + fragment_params_[i].second;
      }
    } else if (fragment_) {
      url += "#" + *fragment_;
    }
    return url;
  }

  void record(const std::string& site, LabelBook& book) const {
    for (const auto& [key, label] : labels_) book.put({site, host_, key}, label);
  }

 private:
  std::string host_;
  std::vector<std::string> dirs_;
  std::string resource_;
  std::vector<std::pair<std::string, std::string>> query_;
  std::vector<std::pair<std::string, std::string>> fragment_params_;
  std::optional<std::string> fragment_;
  std::vector<std::pair<std::string, Label>> labels_;
};

class SiteGenerator {
 public:
  SiteGenerator(const SyntheticConfig& cfg, std::size_t index, LabelBook& book)
      : cfg_(cfg), book_(book), rng_(splitmix64(cfg.seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)))) {
    site_ = "site" + std::to_string(index) + ".example";
    trace_.site = site_;
    trace_.page_url = "https://www." + site_ + "/";
  }

  Trace run() {
    auto trackers = pick_trackers();
    first_party();
    std::optional<std::string> manager;
    if (std::find(trackers.begin(), trackers.end(), 0) != trackers.end()) {
      manager = load_tracker(kCompanies[0], std::string(kDocumentActor));
    }
    std::vector<std::pair<std::size_t, std::string>> loaded;
    for (auto t : trackers) {
      if (t == 0) {
        loaded.emplace_back(0, script_id(kCompanies[0]));
        continue;
      }
      auto loader = manager && chance(0.5) ? *manager : std::string(kDocumentActor);
      loaded.emplace_back(t, load_tracker(kCompanies[t], loader));
    }
    for (std::size_t i = 0; i < loaded.size(); ++i) {
      const auto& [t, script] = loaded[i];
      std::optional<std::size_t> partner;
      if (loaded.size() > 1) {
        auto j = (i + 1 + draw_index(rng_, loaded.size() - 1)) % loaded.size();
        partner = loaded[j].first;
      }
      track(kCompanies[t], script, partner);
    }
    first_party_late();
    return std::move(trace_);
  }

 private:
  // ---- randomness -------------------------------------------------------
  bool chance(double p) { return static_cast<double>(draw_index(rng_, 1u << 20)) < p * (1u << 20); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + draw_index(rng_, hi - lo + 1); }
  template <typename T, std::size_t N>
  std::string pick(const T (&items)[N]) {
    return std::string(items[draw_index(rng_, N)]);
  }
  std::string random_text(std::string_view alphabet, std::size_t length) {
    std::string out(length, ' ');
    for (auto& c : out) c = alphabet[draw_index(rng_, alphabet.size())];
    return out;
  }
  std::string identifier() { return random_text(cfg_.id_alphabet, cfg_.id_length); }
  std::string hex(std::size_t length) { return random_text("0123456789abcdef", length); }
  std::string digits(std::size_t length) { return random_text("0123456789", length); }
  Encoding encoding() { return cfg_.encodings[draw_index(rng_, cfg_.encodings.size())]; }
  static std::string in_url(std::string_view value, Encoding e) {
    return percent_encode(encode(value, e));
  }

  std::vector<std::size_t> pick_trackers() {
    std::vector<std::size_t> pool(std::size(kCompanies));
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    shuffle(pool, rng_);
    pool.resize(cfg_.trackers_per_site);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  // ---- events -----------------------------------------------------------
  void emit(EventKind kind, const std::string& actor, EventPayload payload) {
    TraceEvent e;
    e.seq = ++seq_;
    e.kind = kind;
    e.page_url = trace_.page_url;
    e.site = site_;
    e.actor = actor;
    e.payload = std::move(payload);
    trace_.events.push_back(std::move(e));
  }
  void load_script(const std::string& actor, const std::string& script, const std::string& url) {
    emit(EventKind::kScriptLoad, actor, ScriptLoad{script, url, between(2000, 90000)});
  }
  void set(const std::string& actor, Store store, const std::string& key, const std::string& value) {
    emit(EventKind::kStorageSet, actor, StorageAccess{store, key, value});
  }
  void get(const std::string& actor, Store store, const std::string& key, const std::string& value) {
    emit(EventKind::kStorageGet, actor, StorageAccess{store, key, value});
  }
  std::string request(const std::string& actor, const UrlBuilder& url, bool element = false) {
    auto id = "r" + std::to_string(++requests_);
    url.record(site_, book_);
    emit(element ? EventKind::kElementRequest : EventKind::kRequest, actor,
         RequestSent{id, url.str()});
    return id;
  }
  void respond(const std::string& id, std::string body = {},
               std::vector<StorageAccess> set_storage = {}, int status = 200) {
    emit(EventKind::kResponse, std::string(kDocumentActor),
         ResponseReceived{id, status, std::move(body), std::move(set_storage)});
  }
  std::string redirect(const std::string& actor, const std::string& from, const UrlBuilder& url) {
    auto id = "r" + std::to_string(++requests_);
    url.record(site_, book_);
    emit(EventKind::kRedirect, actor, Redirect{from, id, url.str()});
    return id;
  }
  std::string element(const std::string& actor, const std::string& tag) {
    auto id = tag + "-" + std::to_string(++elements_);
    emit(EventKind::kElementCreate, actor, ElementCreate{id, tag});
    return id;
  }

  // ---- first party ------------------------------------------------------
  std::string www() const { return "www." + site_; }

  void functional_extras(UrlBuilder& url) {
    for (std::size_t i = 0; i < cfg_.functional_params; ++i) {
      url.param(std::string(kExtraKeys[i % std::size(kExtraKeys)]), pick(kExtraValues),
                Label::kNonAts);
    }
  }

  void first_party() {
    const std::string app = "fp-app";
    load_script(std::string(kDocumentActor), app, "https://" + www() + "/static/js/app.js");
    session_ = hex(24);
    set(app, Store::kCookie, "session", session_);
    set(app, Store::kLocalStorage, "theme", chance(0.5) ? "dark" : "light");
    auto lang = pick(kLangs);
    set(app, Store::kLocalStorage, "lang", lang);
    set(app, Store::kLocalStorage, "consent", "necessary,preferences");

    for (std::size_t n = between(2, 4); n > 0; --n) {
      UrlBuilder url(www());
      url.dir("api", Label::kNonAts).dir("v2", Label::kNonAts).dir(pick(kSections), Label::kNonAts);
      url.resource("list");
      url.param("page", std::to_string(between(1, 40)), Label::kNonAts)
          .param("sort", pick(kSorts), Label::kNonAts)
          .param("view", pick(kViews), Label::kNonAts)
          .param("lang", lang, Label::kNonAts);
      functional_extras(url);
      auto id = request(app, url);
      respond(id, "{\"items\":[],\"total\":" + std::to_string(between(0, 500)) + "}");
    }

    if (chance(0.6)) {
      UrlBuilder url(www());
      url.dir("api", Label::kNonAts).dir("v2", Label::kNonAts).dir("cart", Label::kNonAts);
      url.resource("update");
      get(app, Store::kCookie, "session", session_);
      url.param("csrf_token", session_, Label::kNonAts).param("qty", "1", Label::kNonAts);
      respond(request(app, url), "{\"ok\":true}");
    }

    if (chance(0.5)) {
      UrlBuilder url(www());
      url.dir("api", Label::kNonAts).dir("v2", Label::kNonAts).dir("session", Label::kNonAts);
      url.resource("refresh");
      url.param("ts", "17" + digits(11), Label::kNonAts);
      auto fresh = hex(24);
      respond(request(app, url), "{\"session\":\"" + fresh + "\"}");
      set(app, Store::kCookie, "session_next", fresh);
    }

    {
      UrlBuilder url(www());
      url.resource("search");
      url.param("q", pick(kSearches), Label::kNonAts)
          .param("category", pick(kSections), Label::kNonAts);
      respond(request(app, url));
    }

    // Static resources fetched by the document.
    for (std::size_t n = between(2, 4); n > 0; --n) {
      UrlBuilder url("static." + site_);
      url.dir("img", Label::kNonAts).dir("listings", Label::kNonAts);
      url.dir(chance(0.5) ? "large" : "small", Label::kNonAts);
      url.resource("item-" + std::to_string(between(1, 9999)) + ".jpg");
      url.param("w", std::to_string(between(2, 12) * 80), Label::kNonAts)
          .param("h", std::to_string(between(2, 12) * 60), Label::kNonAts)
          .param("fit", chance(0.5) ? "crop" : "cover", Label::kNonAts);
      request("img-doc-" + std::to_string(++elements_), url, true);
    }
    if (chance(0.6)) {
      UrlBuilder url(www());
      url.dir("assets", Label::kNonAts).dir(hex(10), Label::kNonAts).resource("logo.png");
      request("img-doc-" + std::to_string(++elements_), url, true);
    }
    if (chance(0.5)) {
      UrlBuilder url(www());
      url.dir("static", Label::kNonAts).dir("css", Label::kNonAts).resource("main.css");
      url.param("v", "17" + digits(11), Label::kNonAts);
      request("link-doc-" + std::to_string(++elements_), url, true);
    }

    if (chance(0.5)) {
      const std::string widget = "fp-widget";
      load_script(app, widget, "https://" + www() + "/static/js/banner-carousel.js");
      get(widget, Store::kLocalStorage, "lang", lang);
      UrlBuilder url(www());
      url.dir("widgets", Label::kNonAts).dir("carousel", Label::kNonAts).resource("slides");
      url.param("ref", pick(kRefs), Label::kNonAts).param("layout", pick(kViews), Label::kNonAts);
      respond(request(widget, url), "[]");
    }
    if (chance(0.4)) {
      const std::string fonts = "fp-fonts";
      load_script(app, fonts, "https://" + www() + "/static/js/fonts.js");
      UrlBuilder url("fonts." + site_);
      url.resource("css");
      url.param("family", chance(0.5) ? "Open+Sans" : "Roboto+Slab", Label::kNonAts)
          .param("display", "swap", Label::kNonAts);
      respond(request(fonts, url), "@font-face{}");
    }
  }

  void first_party_late() {
    // Navigation and analytics of the site's own pages after trackers ran.
    const std::string app = "fp-app";
    if (chance(0.5)) {
      UrlBuilder url(www());
      url.dir(pick(kSections), Label::kNonAts).resource("index.html");
      url.param("ref", pick(kRefs), Label::kNonAts);
      request(app, url);
    }
  }

  // ---- trackers ---------------------------------------------------------
  static std::string script_id(const Company& c) { return "t-" + std::string(c.name); }
  static std::string cdn(const Company& c) { return "cdn." + std::string(c.name) + ".example"; }
  static std::string px(const Company& c) { return "px." + std::string(c.name) + ".example"; }
  static std::string sync(const Company& c) { return "sync." + std::string(c.name) + ".example"; }

  std::string load_tracker(const Company& c, const std::string& loader) {
    auto script = script_id(c);
    load_script(loader, script, "https://" + cdn(c) + "/" + std::string(c.script));
    auto id = identifier();
    ids_[std::string(c.name)] = id;
    set(script, Store::kCookie, std::string(c.cookie), id);
    if (!c.local_key.empty()) {
      auto local = identifier();
      local_ids_[std::string(c.name)] = local;
      set(script, Store::kLocalStorage, std::string(c.name) + "_lid", local);
    }
    return script;
  }

  void maybe_functional(UrlBuilder& url) {
    if (!chance(0.3)) return;
    const auto& kv = kTrackerFunctional[draw_index(rng_, std::size(kTrackerFunctional))];
    url.param(std::string(kv[0]), std::string(kv[1]), Label::kNonAts);
  }

  // Collection endpoint of `c` carrying `id` in the company's slot.
  UrlBuilder collect_url(const Company& c, const std::string& id) {
    switch (c.slot) {
      case Slot::kQuery: {
        UrlBuilder url(px(c));
        url.resource("collect");
        url.param(std::string(c.key), in_url(id, encoding()), Label::kAts);
        if (!c.local_key.empty() && chance(0.7)) {
          url.param(std::string(c.local_key), in_url(local_ids_[std::string(c.name)], encoding()),
                    Label::kAts);
        }
        maybe_functional(url);
        return url;
      }
      case Slot::kPath: {
        UrlBuilder url(px(c));
        url.dir(in_url(id, encoding()), Label::kAts).resource(chance(0.5) ? "p.gif" : "b.png");
        maybe_functional(url);
        return url;
      }
      case Slot::kKeyedFragment: {
        UrlBuilder url(sync(c));
        url.resource("match");
        maybe_functional(url);
        url.fragment_param(std::string(c.key), in_url(id, encoding()), Label::kAts);
        return url;
      }
      case Slot::kFragment: {
        UrlBuilder url(sync(c));
        url.resource("match");
        maybe_functional(url);
        url.fragment(in_url(id, encoding()), Label::kAts);
        return url;
      }
    }
    throw std::logic_error("unknown slot");
  }

  // Partner's user-sync endpoint receiving `from`'s identifier.
  UrlBuilder usersync_url(const Company& partner, const Company& from) {
    UrlBuilder url("usersync." + std::string(partner.name) + ".example");
    url.resource("setuid");
    url.param("partner_uid", in_url(ids_[std::string(from.name)], encoding()), Label::kAts);
    maybe_functional(url);
    return url;
  }

  void track(const Company& c, const std::string& script, std::optional<std::size_t> partner) {
    const std::string name(c.name);
    auto sender = script;
    if (c.eval) {
      sender = script + "-eval";
      emit(EventKind::kEvalScript, script, EvalScript{sender, between(300, 5000)});
    }
    get(sender, Store::kCookie, std::string(c.cookie), ids_[name]);

    for (std::size_t n = between(2, 4); n > 0; --n) {
      auto url = collect_url(c, ids_[name]);
      std::string actor = sender;
      bool via_element = c.pixels && chance(0.6);
      if (via_element) actor = element(sender, "img");
      auto id = request(actor, url, via_element);

      if (partner && chance(0.35)) {
        // The collection endpoint bounces the browser to the partner.
        auto hop = redirect(actor, id, usersync_url(kCompanies[*partner], c));
        respond(id, {}, {}, 302);
        respond(hop, {}, {{Store::kCookie, "sync_" + name, identifier()}});
        continue;
      }
      if (chance(0.4)) {
        respond(id, {}, {{Store::kCookie, name + "_seen", identifier()}});
      } else if (chance(0.5)) {
        auto assigned = identifier();
        respond(id, "{\"uid\":\"" + assigned + "\"}");
        set(sender, Store::kCookie, name + "_assigned", assigned);
      } else {
        respond(id);
      }
    }

    if (partner) {
      // Cookie syncing: read the partner's identifier and forward ours.
      const auto& p = kCompanies[*partner];
      get(sender, Store::kCookie, std::string(p.cookie), ids_[std::string(p.name)]);
      auto id = request(sender, usersync_url(p, c));
      respond(id);
    }
  }

  const SyntheticConfig& cfg_;
  LabelBook& book_;
  std::mt19937_64 rng_;
  std::string site_;
  Trace trace_;
  std::uint64_t seq_ = 0;
  std::size_t requests_ = 0;
  std::size_t elements_ = 0;
  std::string session_;
  std::map<std::string, std::string> ids_;
  std::map<std::string, std::string> local_ids_;
};

std::string label_sources_rules() {
  std::string out = "! request rules for the synthetic tracker pool\n";
  for (const auto& c : kCompanies) {
    for (auto prefix : {"cdn.", "px.", "sync.", "usersync."}) {
      out += "||" + std::string(prefix) + std::string(c.name) + ".example^\n";
    }
  }
  out += "/adserver/\n";
  return out;
}

std::string label_sources_cookies() {
  std::string out = "# domain,key,purpose\n";
  for (std::size_t i = 0; i < std::size(kCompanies); ++i) {
    const auto& c = kCompanies[i];
    out += "*," + std::string(c.cookie) + "," + (i % 3 == 1 ? "analytics" : "advertising") + "\n";
  }
  out += "*,session,strictly-necessary\n";
  out += "*,session_next,strictly-necessary\n";
  return out;
}

std::string label_sources_curated() {
  std::string out = "# fqdn|key\n";
  for (const auto& c : kCompanies) {
    if (!c.local_key.empty()) {
      out += "px." + std::string(c.name) + ".example|" + std::string(c.local_key) + "\n";
    }
  }
  out += "*|partner_uid\n";
  return out;
}

}  // namespace

void SyntheticConfig::validate() const {
  if (sites == 0) throw InputError("synthetic config: sites must be at least 1");
  if (id_length < 8) throw InputError("synthetic config: identifier length must be at least 8");
  if (id_alphabet.size() < 2) throw InputError("synthetic config: alphabet needs two symbols");
  if (encodings.empty()) throw InputError("synthetic config: no encodings");
  if (trackers_per_site > tracker_pool_size()) {
    throw InputError("synthetic config: at most " + std::to_string(tracker_pool_size()) +
                     " trackers per site");
  }
}

std::size_t tracker_pool_size() { return std::size(kCompanies); }

SyntheticCorpus generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  SyntheticCorpus corpus;
  LabelBook book;
  auto width = std::to_string(cfg.sites - 1).size();
  for (std::size_t i = 0; i < cfg.sites; ++i) {
    auto number = std::to_string(i);
    number.insert(0, width - number.size(), '0');
    corpus.traces.push_back({"site-" + number, SiteGenerator(cfg, i, book).run()});
  }
  corpus.labels = book.finish();
  corpus.request_rules = label_sources_rules();
  corpus.cookie_purposes = label_sources_cookies();
  corpus.curated = label_sources_curated();
  return corpus;
}

}  // namespace linkdeco
