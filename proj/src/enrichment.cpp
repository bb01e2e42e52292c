#include "newsclick/enrichment.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include "newsclick/error.hpp"
#include "newsclick/io.hpp"
#include "newsclick/log.hpp"
#include "newsclick/text.hpp"

namespace newsclick {

namespace {

constexpr std::string_view kNotFound = "NA";

Timestamp now_utc() {
  const auto s = std::chrono::duration_cast<std::chrono::seconds>(
      std::chrono::system_clock::now().time_since_epoch());
  return Timestamp::from_epoch_seconds(s.count());
}

std::int64_t parse_count(std::string_view field) {
  const std::int64_t v = parse_int(text::trim(field));
  if (v < 0) throw ValidationError("negative count " + std::to_string(v));
  return v;
}

template <class F>
void for_each_line(std::istream& in, F&& f) {
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    try {
      f(std::string_view(line));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(no) + ": " + e.what());
    }
  }
}

SocialMetadata social_from(std::span<const std::string_view> f) {
  return {parse_count(f[0]), parse_count(f[1]), parse_count(f[2]), parse_count(f[3])};
}

std::vector<std::string_view> split_numbers(std::string_view body) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto sep = [](char c) { return c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (i < body.size()) {
    while (i < body.size() && sep(body[i])) ++i;
    const std::size_t start = i;
    while (i < body.size() && !sep(body[i])) ++i;
    if (i > start) out.push_back(body.substr(start, i - start));
  }
  return out;
}

template <class T>
class TableProvider final : public Provider<T> {
 public:
  explicit TableProvider(std::unordered_map<std::string, T> table) : table_(std::move(table)) {}

  Lookup<T> fetch(const std::string& key) override {
    const auto it = table_.find(key);
    if (it == table_.end()) return {LookupStatus::kNotFound, std::nullopt};
    return {LookupStatus::kFound, it->second};
  }

  int max_concurrency() const override { return 1; }

 private:
  std::unordered_map<std::string, T> table_;
};

template <class T>
class HttpProvider final : public Provider<T> {
 public:
  using Parser = std::optional<T> (*)(std::string_view);

  HttpProvider(const ProviderConfig& cfg, Parser parse) : cfg_(cfg), parse_(parse) {
    const std::string& url = *cfg.endpoint_url;
    const std::size_t slash = url.find('/', std::string_view("http://").size());
    base_ = url.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : url.substr(slash);
    path_ += path_.find('?') == std::string::npos ? "?q=" : "&q=";
  }

  Lookup<T> fetch(const std::string& key) override {
    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.retry_count; ++attempt) {
      httplib::Client client(base_);
      client.set_connection_timeout(cfg_.timeout);
      client.set_read_timeout(cfg_.timeout);
      client.set_write_timeout(cfg_.timeout);
      const auto res = client.Get(path_ + percent_encode(key));
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status == 404) return {LookupStatus::kNotFound, std::nullopt};
      if (res->status != 200) {
        last_error = "HTTP status " + std::to_string(res->status);
        continue;
      }
      auto value = parse_(res->body);
      if (!value) {
        last_error = "malformed response body";
        continue;
      }
      return {LookupStatus::kFound, std::move(value)};
    }
    warn(base_ + ": lookup of '" + key + "' failed after " + std::to_string(cfg_.retry_count + 1) +
         " attempt(s): " + last_error);
    return {LookupStatus::kUnavailable, std::nullopt};
  }

  int max_concurrency() const override { return cfg_.max_concurrent_requests; }

 private:
  ProviderConfig cfg_;
  Parser parse_;
  std::string base_;
  std::string path_;
};

template <class T>
class ChainProvider final : public Provider<T> {
 public:
  ChainProvider(std::shared_ptr<Provider<T>> first, std::shared_ptr<Provider<T>> second)
      : first_(std::move(first)), second_(std::move(second)) {}

  Lookup<T> fetch(const std::string& key) override {
    auto r = first_->fetch(key);
    if (r.status == LookupStatus::kFound) return r;
    return second_->fetch(key);
  }

  int max_concurrency() const override { return second_->max_concurrency(); }

 private:
  std::shared_ptr<Provider<T>> first_;
  std::shared_ptr<Provider<T>> second_;
};

template <class T, class LoadFixture, class Parser>
std::shared_ptr<Provider<T>> make_provider(const ProviderConfig& cfg, LoadFixture load, Parser parse) {
  cfg.validate();
  std::shared_ptr<Provider<T>> fixture;
  if (cfg.mode != ProviderMode::kLive) {
    auto in = open_input(*cfg.fixture_path);
    try {
      fixture = make_table_provider<T>(load(in));
    } catch (const Error& e) {
      throw ValidationError(cfg.fixture_path->string() + ": " + e.what());
    }
  }
  if (cfg.mode == ProviderMode::kFixture) return fixture;
  auto live = std::make_shared<HttpProvider<T>>(cfg, parse);
  if (cfg.mode == ProviderMode::kLive) return live;
  return std::make_shared<ChainProvider<T>>(fixture, live);
}

template <class T>
void write_value(std::ostream& out, const T& v);

template <>
void write_value(std::ostream& out, const std::int64_t& v) {
  out << v;
}

template <>
void write_value(std::ostream& out, const SocialMetadata& v) {
  out << v.shares << '\t' << v.likes << '\t' << v.comments << '\t' << v.total;
}

template <class T>
void append_record(const std::filesystem::path& path, const std::string& key, const Lookup<T>& v,
                   const Timestamp& at) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot open cache file " + path.string());
  out << text::escape_field(key) << '\t';
  if (v.value) {
    write_value(out, *v.value);
  } else {
    out << kNotFound;
  }
  out << '\t' << at.to_string() << '\n';
  out.flush();
  if (!out) throw IoError("cannot write cache file " + path.string());
}

template <class T, class Decode>
void load_cache(const std::filesystem::path& path, std::size_t value_cols,
                std::unordered_map<std::string, Lookup<T>>& into, Decode decode) {
  if (!std::filesystem::exists(path)) return;
  std::string data;
  {
    auto file = open_input(path);
    data.assign(std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>());
  }
  if (!data.empty() && data.back() != '\n') {
    warn(path.string() + ": ignoring incomplete final record");
    data.erase(data.find_last_of('\n') == std::string::npos ? 0 : data.find_last_of('\n') + 1);
    write_file_atomic(path, [&](std::ostream& o) { o << data; });
  }
  std::istringstream in(data);
  try {
    for_each_line(in, [&](std::string_view line) {
      const auto f = text::split(line, '\t');
      if (f.size() == 3 && f[1] == kNotFound) {
        Timestamp::parse(f[2]);
        into[text::unescape_field(f[0])] = {LookupStatus::kNotFound, std::nullopt};
        return;
      }
      if (f.size() != value_cols + 2) throw ParseError("expected " + std::to_string(value_cols + 2) + " columns");
      Timestamp::parse(f.back());
      into[text::unescape_field(f[0])] = {LookupStatus::kFound,
                                           decode(std::span<const std::string_view>(f).subspan(1, value_cols))};
    });
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

/// Runs fetch over keys with up to `workers` threads; results are stored by
/// key position, so completion order does not matter.
template <class T>
std::vector<Lookup<T>> fetch_all(Provider<T>& provider, const std::vector<std::string>& keys) {
  std::vector<Lookup<T>> out(keys.size());
  const std::size_t workers =
      std::min<std::size_t>(keys.size(), static_cast<std::size_t>(std::max(1, provider.max_concurrency())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < keys.size(); ++i) out[i] = provider.fetch(keys[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mu;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < keys.size();) {
        try {
          out[i] = provider.fetch(keys[i]);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

template <class T, class Get, class Put>
std::unordered_map<std::string, std::optional<T>> resolve(Provider<T>& provider, const std::set<std::string>& keys,
                                                          EnrichmentCache* cache, Get get, Put put,
                                                          const Timestamp& at) {
  std::unordered_map<std::string, std::optional<T>> out;
  std::vector<std::string> pending;
  for (const auto& k : keys) {
    if (cache) {
      if (auto hit = (cache->*get)(k)) {
        out[k] = hit->value;
        continue;
      }
    }
    pending.push_back(k);
  }
  const auto results = fetch_all(provider, pending);
  for (std::size_t i = 0; i < pending.size(); ++i) {
    out[pending[i]] = results[i].value;
    if (cache && results[i].status != LookupStatus::kUnavailable) (cache->*put)(pending[i], results[i], at);
  }
  return out;
}

}  // namespace

ProviderMode parse_provider_mode(std::string_view name) {
  if (name == "fixture") return ProviderMode::kFixture;
  if (name == "live") return ProviderMode::kLive;
  if (name == "fixture-then-live") return ProviderMode::kFixtureThenLive;
  throw ParseError("unknown enrichment mode '" + std::string(name) + "' (fixture, live, fixture-then-live)");
}

std::string_view provider_mode_name(ProviderMode m) {
  switch (m) {
    case ProviderMode::kFixture: return "fixture";
    case ProviderMode::kLive: return "live";
    case ProviderMode::kFixtureThenLive: return "fixture-then-live";
  }
  return "?";
}

void ProviderConfig::validate() const {
  if (mode != ProviderMode::kLive && !fixture_path) throw ValidationError("fixture mode requires a fixture path");
  if (mode != ProviderMode::kFixture) {
    if (!endpoint_url) throw ValidationError("live mode requires an endpoint url");
    if (!endpoint_url->starts_with("http://") || endpoint_url->size() <= 7)
      throw ValidationError("endpoint url must start with http:// (got '" + *endpoint_url + "')");
  }
  if (timeout.count() <= 0) throw ValidationError("timeout must be positive");
  if (max_concurrent_requests < 1) throw ValidationError("max_concurrent_requests must be >= 1");
  if (retry_count < 0) throw ValidationError("retry_count must be >= 0");
}

std::unordered_map<std::string, std::int64_t> parse_title_hits_fixture(std::istream& in) {
  std::unordered_map<std::string, std::int64_t> out;
  for_each_line(in, [&](std::string_view line) {
    const auto f = text::split(line, '\t');
    if (f.size() != 2) throw ParseError("expected title<TAB>count");
    out[text::unescape_field(f[0])] = parse_count(f[1]);
  });
  return out;
}

std::unordered_map<std::string, SocialMetadata> parse_social_fixture(std::istream& in) {
  std::unordered_map<std::string, SocialMetadata> out;
  for_each_line(in, [&](std::string_view line) {
    const auto f = text::split(line, '\t');
    if (f.size() != 5) throw ParseError("expected key<TAB>shares<TAB>likes<TAB>comments<TAB>total");
    out[text::unescape_field(f[0])] = social_from(std::span<const std::string_view>(f).subspan(1));
  });
  return out;
}

std::optional<std::int64_t> parse_title_hits_body(std::string_view body) {
  try {
    return parse_count(text::trim(body));
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::optional<SocialMetadata> parse_social_body(std::string_view body) {
  const auto f = split_numbers(body);
  if (f.size() != 4) return std::nullopt;
  try {
    return social_from(f);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::string percent_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (const unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 15];
    }
  }
  return out;
}

template <class T>
std::shared_ptr<Provider<T>> make_table_provider(std::unordered_map<std::string, T> table) {
  return std::make_shared<TableProvider<T>>(std::move(table));
}

template std::shared_ptr<Provider<std::int64_t>> make_table_provider(std::unordered_map<std::string, std::int64_t>);
template std::shared_ptr<Provider<SocialMetadata>> make_table_provider(
    std::unordered_map<std::string, SocialMetadata>);

std::shared_ptr<TitleHitsProvider> make_title_hits_provider(const ProviderConfig& cfg) {
  return make_provider<std::int64_t>(cfg, parse_title_hits_fixture, parse_title_hits_body);
}

std::shared_ptr<SocialProvider> make_social_provider(const ProviderConfig& cfg) {
  return make_provider<SocialMetadata>(cfg, parse_social_fixture, parse_social_body);
}

std::optional<std::int64_t> title_hit_count(const std::string& title, TitleHitsProvider& provider) {
  return provider.fetch(title).value;
}

std::optional<SocialMetadata> social_metadata(const std::string& key, SocialProvider& provider) {
  return provider.fetch(key).value;
}

EnrichmentCache::EnrichmentCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create cache directory " + dir_.string() + ": " + ec.message());
  load_cache<std::int64_t>(title_hits_path(), 1, hits_,
                           [](std::span<const std::string_view> f) { return parse_count(f[0]); });
  load_cache<SocialMetadata>(social_path(), 4, social_, social_from);
}

std::optional<Lookup<std::int64_t>> EnrichmentCache::title_hits(const std::string& title) const {
  std::lock_guard lock(mu_);
  const auto it = hits_.find(title);
  if (it == hits_.end()) return std::nullopt;
  return it->second;
}

std::optional<Lookup<SocialMetadata>> EnrichmentCache::social(const std::string& key) const {
  std::lock_guard lock(mu_);
  const auto it = social_.find(key);
  if (it == social_.end()) return std::nullopt;
  return it->second;
}

void EnrichmentCache::put_title_hits(const std::string& title, const Lookup<std::int64_t>& v, const Timestamp& at) {
  if (v.status == LookupStatus::kUnavailable) return;
  std::lock_guard lock(mu_);
  append_record(title_hits_path(), title, v, at);
  hits_[title] = v;
}

void EnrichmentCache::put_social(const std::string& key, const Lookup<SocialMetadata>& v, const Timestamp& at) {
  if (v.status == LookupStatus::kUnavailable) return;
  std::lock_guard lock(mu_);
  append_record(social_path(), key, v, at);
  social_[key] = v;
}

std::string social_key(std::int64_t news_id, const ContentMap* content) {
  if (content) {
    const auto it = content->find(news_id);
    if (it != content->end() && it->second.url && !it->second.url->empty()) return *it->second.url;
  }
  return std::to_string(news_id);
}

EnrichmentMap enrich_dataset(const Dataset& d, const Providers& providers, EnrichmentCache* cache,
                             const ContentMap* content) {
  const Timestamp at = now_utc();
  std::map<std::int64_t, std::pair<std::string, std::string>> stories;  // id -> (title, social key)
  std::set<std::string> titles, keys;
  for (const auto& [id, rows] : d.by_news_id()) {
    const std::string& title = d[rows.front()].title;
    std::string key = social_key(id, content);
    titles.insert(title);
    keys.insert(key);
    stories.emplace(id, std::pair{title, std::move(key)});
  }

  std::unordered_map<std::string, std::optional<std::int64_t>> hits;
  std::unordered_map<std::string, std::optional<SocialMetadata>> social;
  if (providers.title_hits)
    hits = resolve(*providers.title_hits, titles, cache, &EnrichmentCache::title_hits,
                   &EnrichmentCache::put_title_hits, at);
  if (providers.social)
    social = resolve(*providers.social, keys, cache, &EnrichmentCache::social, &EnrichmentCache::put_social, at);

  EnrichmentMap out;
  for (const auto& [id, story] : stories) {
    EnrichmentRecord r;
    r.title = story.first;
    r.key = story.second;
    r.fetched_at = at;
    if (auto it = hits.find(r.title); it != hits.end()) r.title_hits = it->second;
    if (auto it = social.find(r.key); it != social.end()) r.social = it->second;
    if (r.title_hits || r.social) out.emplace(id, std::move(r));
  }
  return out;
}

}  // namespace newsclick
