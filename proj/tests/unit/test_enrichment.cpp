#include <atomic>
#include <chrono>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "newsclick/enrichment.hpp"
#include "newsclick/error.hpp"
#include "newsclick/log.hpp"
#include "unit/support.hpp"

using namespace newsclick;
using namespace std::chrono_literals;

namespace {

struct SilenceWarnings {
  SilenceWarnings() : previous(set_warning_sink({})) {}
  ~SilenceWarnings() { set_warning_sink(previous); }
  WarningSink previous;
};

template <class T>
class CountingProvider final : public Provider<T> {
 public:
  explicit CountingProvider(std::unordered_map<std::string, T> table) : table_(std::move(table)) {}
  Lookup<T> fetch(const std::string& key) override {
    ++calls;
    auto it = table_.find(key);
    if (it == table_.end()) return {LookupStatus::kNotFound, std::nullopt};
    return {LookupStatus::kFound, it->second};
  }
  std::atomic<int> calls{0};

 private:
  std::unordered_map<std::string, T> table_;
};

template <class T>
class DownProvider final : public Provider<T> {
 public:
  Lookup<T> fetch(const std::string&) override { return {LookupStatus::kUnavailable, std::nullopt}; }
};

Dataset sample_dataset() {
  std::istringstream in(
      "[1] [2011-03-01 10:00:00] [1] [geral] [null] [10] [3] [Benfica vence]\n"
      "[2] [2011-03-01 11:00:00] [1] [geral] [null] [10] [4] [Benfica vence]\n"
      "[3] [2011-03-01 11:00:00] [2] [vida] [footer] [11] [4] [Benfica vence]\n"
      "[4] [2011-03-01 12:00:00] [2] [vida] [footer] [12] [9] [Sem dados]\n");
  return parse_dataset(in);
}

class LiveServer {
 public:
  LiveServer() {
    server_.Get("/hits", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      const auto q = req.get_param_value("q");
      if (q == "slow") {
        std::this_thread::sleep_for(600ms);
        res.set_content("1", "text/plain");
      } else if (q == "flaky" && flaky_failures_.fetch_add(1) == 0) {
        res.status = 500;
      } else if (q == "Benfica vence" || q == "flaky") {
        res.set_content("42\n", "text/plain");
      } else if (q == "garbage") {
        res.set_content("lots", "text/plain");
      } else {
        res.status = 404;
      }
    });
    server_.Get("/social", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      if (req.get_param_value("q") == "10") res.set_content("1, 2, 3, 6", "text/plain");
      else res.status = 404;
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LiveServer() {
    server_.stop();
    thread_.join();
  }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }
  std::atomic<int> requests{0};

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> flaky_failures_{0};
};

ProviderConfig live_config(const std::string& url) {
  ProviderConfig cfg;
  cfg.mode = ProviderMode::kLive;
  cfg.endpoint_url = url;
  cfg.timeout = 200ms;
  cfg.retry_count = 1;
  cfg.max_concurrent_requests = 3;
  return cfg;
}

}  // namespace

TEST_CASE("fixture files") {
  std::istringstream hits("Benfica vence\t42\nT\\tab\t0\n");
  const auto h = parse_title_hits_fixture(hits);
  CHECK(h.at("Benfica vence") == 42);
  CHECK(h.at("T\tab") == 0);
  std::istringstream neg("x\t-1\n");
  CHECK_THROWS_AS(parse_title_hits_fixture(neg), ValidationError);
  std::istringstream short_line("x\n");
  CHECK_THROWS(parse_title_hits_fixture(short_line));

  std::istringstream social("http://a/1\t1\t2\t3\t6\n");
  const auto s = parse_social_fixture(social);
  CHECK(s.at("http://a/1") == SocialMetadata{1, 2, 3, 6});
  std::istringstream bad_social("k\t1\t2\t3\n");
  CHECK_THROWS(parse_social_fixture(bad_social));
  std::istringstream neg_social("k\t1\t-2\t3\t4\n");
  CHECK_THROWS_AS(parse_social_fixture(neg_social), ValidationError);
}

TEST_CASE("response bodies and encoding") {
  CHECK(parse_title_hits_body(" 17\n") == std::optional<std::int64_t>(17));
  CHECK_FALSE(parse_title_hits_body("17 18").has_value());
  CHECK_FALSE(parse_title_hits_body("-3").has_value());
  CHECK(parse_social_body("1,2,3,6") == std::optional<SocialMetadata>(SocialMetadata{1, 2, 3, 6}));
  CHECK(parse_social_body("1 2\t3 6\n") == std::optional<SocialMetadata>(SocialMetadata{1, 2, 3, 6}));
  CHECK_FALSE(parse_social_body("1,2,3").has_value());
  CHECK(percent_encode("a b/ç") == "a%20b%2F%C3%A7");
  CHECK(percent_encode("AZaz09-._~") == "AZaz09-._~");
}

TEST_CASE("provider configuration is validated") {
  ProviderConfig cfg;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.fixture_path = "x.tsv";
  CHECK_NOTHROW(cfg.validate());
  cfg.mode = ProviderMode::kFixtureThenLive;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.endpoint_url = "ftp://x";
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.endpoint_url = "http://localhost:1/x";
  CHECK_NOTHROW(cfg.validate());
  CHECK(parse_provider_mode(provider_mode_name(ProviderMode::kFixtureThenLive)) == ProviderMode::kFixtureThenLive);
}

TEST_CASE("table lookups distinguish absent from zero") {
  auto p = make_table_provider<std::int64_t>({{"a", 0}});
  CHECK(title_hit_count("a", *p) == std::optional<std::int64_t>(0));
  CHECK_FALSE(title_hit_count("b", *p).has_value());
  DownProvider<SocialMetadata> down;
  CHECK_FALSE(social_metadata("a", down).has_value());
}

TEST_CASE("enrichment dedups lookups and reuses the cache") {
  testing::TempDir dir("enrich");
  const auto d = sample_dataset();
  ContentMap content{{10, {10, "http://n/10", ""}}};
  CHECK(social_key(10, &content) == "http://n/10");
  CHECK(social_key(11, &content) == "11");
  CHECK(social_key(11, nullptr) == "11");

  auto hits = std::make_shared<CountingProvider<std::int64_t>>(
      std::unordered_map<std::string, std::int64_t>{{"Benfica vence", 42}});
  auto social = std::make_shared<CountingProvider<SocialMetadata>>(
      std::unordered_map<std::string, SocialMetadata>{{"http://n/10", {1, 2, 3, 6}}});
  const Providers providers{hits, social};
  EnrichmentMap first;
  {
    EnrichmentCache cache(dir.path());
    first = enrich_dataset(d, providers, &cache, &content);
  }
  CHECK(hits->calls == 2);
  CHECK(social->calls == 3);
  REQUIRE(first.size() == 2u);
  CHECK(first.at(10).title_hits == std::optional<std::int64_t>(42));
  CHECK(first.at(10).social == std::optional<SocialMetadata>(SocialMetadata{1, 2, 3, 6}));
  CHECK(first.at(10).key == "http://n/10");
  CHECK(first.at(11).title_hits == std::optional<std::int64_t>(42));
  CHECK_FALSE(first.at(11).social.has_value());
  CHECK_FALSE(first.contains(12));

  EnrichmentCache warm(dir.path());
  const auto second = enrich_dataset(d, providers, &warm, &content);
  CHECK(hits->calls == 2);
  CHECK(social->calls == 3);
  CHECK(second.size() == first.size());
  CHECK(second.at(10).title_hits == first.at(10).title_hits);
  CHECK(second.at(10).social == first.at(10).social);

  const auto uncached = enrich_dataset(d, providers, nullptr, &content);
  CHECK(hits->calls == 4);
}

TEST_CASE("cache files round-trip and tolerate a torn tail") {
  SilenceWarnings quiet;
  testing::TempDir dir("cache");
  const Timestamp at{2011, 3, 1, 9, 0, 0};
  {
    EnrichmentCache c(dir.path());
    c.put_title_hits("tab\there", {LookupStatus::kFound, 5}, at);
    c.put_title_hits("none", {LookupStatus::kNotFound, std::nullopt}, at);
    c.put_title_hits("down", {LookupStatus::kUnavailable, std::nullopt}, at);
    c.put_social("k", {LookupStatus::kFound, SocialMetadata{1, 1, 1, 3}}, at);
  }
  {
    EnrichmentCache c(dir.path());
    REQUIRE(c.title_hits("tab\there"));
    CHECK(c.title_hits("tab\there")->value == std::optional<std::int64_t>(5));
    REQUIRE(c.title_hits("none"));
    CHECK(c.title_hits("none")->status == LookupStatus::kNotFound);
    CHECK_FALSE(c.title_hits("down").has_value());
    CHECK(c.social("k")->value == std::optional<SocialMetadata>(SocialMetadata{1, 1, 1, 3}));
  }
  const auto path = dir / "title_hits.tsv";
  const auto before = testing::slurp(path);
  testing::spit(path, before + "half\t7");
  {
    EnrichmentCache c(dir.path());
    CHECK_FALSE(c.title_hits("half").has_value());
    CHECK(c.title_hits("none").has_value());
  }
  CHECK(testing::slurp(path) == before);
  testing::spit(path, "broken line\n");
  CHECK_THROWS_AS(EnrichmentCache(dir.path()), ParseError);
}

TEST_CASE("live provider over http") {
  SilenceWarnings quiet;
  LiveServer server;
  auto hits = make_title_hits_provider(live_config(server.url("/hits")));
  CHECK(hits->max_concurrency() == 3);
  const auto found = hits->fetch("Benfica vence");
  CHECK(found.status == LookupStatus::kFound);
  CHECK(found.value == std::optional<std::int64_t>(42));
  CHECK(hits->fetch("unknown").status == LookupStatus::kNotFound);
  CHECK(hits->fetch("flaky").value == std::optional<std::int64_t>(42));
  const auto warnings = warning_count();
  CHECK(hits->fetch("garbage").status == LookupStatus::kUnavailable);
  CHECK(warning_count() == warnings + 1);

  auto social = make_social_provider(live_config(server.url("/social")));
  CHECK(social->fetch("10").value == std::optional<SocialMetadata>(SocialMetadata{1, 2, 3, 6}));
}

TEST_CASE("live provider times out instead of hanging") {
  SilenceWarnings quiet;
  LiveServer server;
  auto cfg = live_config(server.url("/hits"));
  cfg.retry_count = 0;
  auto hits = make_title_hits_provider(cfg);
  const auto start = std::chrono::steady_clock::now();
  const auto r = hits->fetch("slow");
  CHECK(r.status == LookupStatus::kUnavailable);
  CHECK(std::chrono::steady_clock::now() - start < 550ms);
}

TEST_CASE("unreachable endpoint degrades to unavailable") {
  SilenceWarnings quiet;
  auto cfg = live_config("http://127.0.0.1:9/hits");
  auto hits = make_title_hits_provider(cfg);
  CHECK(hits->fetch("x").status == LookupStatus::kUnavailable);
}

TEST_CASE("fixture-then-live consults the endpoint only for misses") {
  SilenceWarnings quiet;
  LiveServer server;
  testing::TempDir dir("chain");
  testing::spit(dir / "hits.tsv", "local\t7\n");
  auto cfg = live_config(server.url("/hits?src=x"));
  cfg.mode = ProviderMode::kFixtureThenLive;
  cfg.fixture_path = dir / "hits.tsv";
  auto hits = make_title_hits_provider(cfg);
  CHECK(hits->fetch("local").value == std::optional<std::int64_t>(7));
  CHECK(server.requests == 0);
  CHECK(hits->fetch("Benfica vence").value == std::optional<std::int64_t>(42));
  CHECK(server.requests == 1);

  const auto d = sample_dataset();
  testing::TempDir cache_dir("chain-cache");
  EnrichmentCache cache(cache_dir.path());
  const auto m = enrich_dataset(d, Providers{hits, nullptr}, &cache);
  CHECK(m.at(10).title_hits == std::optional<std::int64_t>(42));
  CHECK_FALSE(m.contains(12));
}
