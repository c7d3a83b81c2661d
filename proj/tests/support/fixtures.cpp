#include "fixtures.hpp"

namespace fixtures {

std::string header(const std::string& site) {
  return R"({"format":1,"site":")" + site + R"(","page_url":"https://www.)" + site + R"(/"})" + "\n";
}

std::string event(int seq, const std::string& kind, const std::string& actor,
                  const std::string& payload, const std::string& site) {
  return R"({"seq":)" + std::to_string(seq) + R"(,"kind":")" + kind + R"(","page_url":"https://www.)" +
         site + R"(/","site":")" + site + R"(","actor":")" + actor + R"(","payload":)" + payload +
         "}\n";
}

std::string sync_chain_trace(bool with_responses) {
  std::string t = header();
  t += event(1, "storage_get", "s1", R"({"store":"cookie","key":"info","value":"lang-en-GB-x91"})");
  t += event(2, "request", "s1",
             R"({"request_id":"r1","url":"https://tracker1.com/sync/lang-en-GB-x91/p.gif?t=1700000000"})");
  t += event(3, "response", "document",
             R"({"request_id":"r1","status":200,"body":"{\"uid\":\"UID-5f3a9c2e71\"}","set_storage":[]})");
  t += event(4, "storage_set", "s1", R"({"store":"cookie","key":"UID","value":"UID-5f3a9c2e71"})");
  t += event(5, "storage_get", "s1", R"({"store":"cookie","key":"UID","value":"UID-5f3a9c2e71"})");
  t += event(6, "request", "s1", R"({"request_id":"r2","url":"https://tracker2.com/px?id=UID-5f3a9c2e71"})");
  t += event(7, "request", "s1",
             R"({"request_id":"r3","url":"https://tracker3.com/c/p.gif#uid=VUlELTVmM2E5YzJlNzE="})");
  if (with_responses) {
    t += event(8, "response", "document", R"({"request_id":"r2","status":204,"body":"","set_storage":[]})");
    t += event(9, "response", "document", R"({"request_id":"r3","status":204,"body":"","set_storage":[]})");
  }
  return t;
}

std::string ten_node_trace() {
  std::string t = header();
  // nodes: script:s1 script:s2 storage:cookie:uid html:img1 request:r1
  // decoration:r1:path:0 decoration:r1:query:0 response:r1 request:r2 request:r3
  t += event(1, "script_load", "document",
             R"({"script":"s1","url":"https://cdn.adtrack.example/ads/loader.js","length":1200})");
  t += event(2, "storage_set", "s1", R"({"store":"cookie","key":"uid","value":"u7Kq2mZp9Xc4"})");
  t += event(3, "eval_script", "s1", R"({"script":"s2","length":40})");
  t += event(4, "storage_get", "s2", R"({"store":"cookie","key":"uid","value":"u7Kq2mZp9Xc4"})");
  t += event(5, "request", "s2",
             R"({"request_id":"r1","url":"https://px.adtrack.example/u7Kq2mZp9Xc4/p.gif?uid=dTdLcTJtWnA5WGM0"})");
  t += event(6, "response", "document",
             R"({"request_id":"r1","status":302,"body":"","set_storage":[{"store":"cookie","key":"uid","value":"u7Kq2mZp9Xc4"}]})");
  t += event(7, "redirect", "s2",
             R"({"from_request_id":"r1","request_id":"r2","url":"https://cdn.adtrack.example/done"})");
  t += event(8, "element_create", "s1", R"({"element":"img1","tag":"img"})");
  t += event(9, "element_request", "img1", R"({"request_id":"r3","url":"https://px.adtrack.example/b.gif"})");
  return t;
}

}  // namespace fixtures
