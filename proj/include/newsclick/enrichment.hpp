#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "newsclick/data_model.hpp"
#include "newsclick/timestamp.hpp"

namespace newsclick {

/// Enrichment gathered for one news story. At least one value is present.
struct EnrichmentRecord {
  std::string key;  // social key: the content url, or the news id as text
  std::string title;
  std::optional<std::int64_t> title_hits;
  std::optional<SocialMetadata> social;
  Timestamp fetched_at;

  bool operator==(const EnrichmentRecord&) const = default;
};

using EnrichmentMap = std::map<std::int64_t, EnrichmentRecord>;

enum class ProviderMode { kFixture, kLive, kFixtureThenLive };

ProviderMode parse_provider_mode(std::string_view name);
std::string_view provider_mode_name(ProviderMode m);

struct ProviderConfig {
  ProviderMode mode = ProviderMode::kFixture;
  std::optional<std::filesystem::path> fixture_path;
  std::optional<std::string> endpoint_url;  // http://host[:port]/path[?query]
  std::chrono::milliseconds timeout{5000};
  int max_concurrent_requests = 4;
  int retry_count = 1;

  /// Throws ValidationError: fixture modes need fixture_path, live modes
  /// need an http endpoint_url.
  void validate() const;
};

enum class LookupStatus {
  kFound,
  kNotFound,     // the source has no value for the key
  kUnavailable,  // the source could not be asked (network failure, timeout)
};

template <class T>
struct Lookup {
  LookupStatus status = LookupStatus::kNotFound;
  std::optional<T> value;
};

/// Source of one kind of enrichment value. Implementations are safe to call
/// from several threads at once.
template <class T>
class Provider {
 public:
  virtual ~Provider() = default;
  virtual Lookup<T> fetch(const std::string& key) = 0;
  virtual int max_concurrency() const { return 1; }
};

using TitleHitsProvider = Provider<std::int64_t>;
using SocialProvider = Provider<SocialMetadata>;

/// Fixture files: `title<TAB>count` and `key<TAB>shares<TAB>likes<TAB>comments<TAB>total`.
/// Keys are escaped with text::escape_field. Negative counts and malformed
/// lines throw at load time.
std::unordered_map<std::string, std::int64_t> parse_title_hits_fixture(std::istream& in);
std::unordered_map<std::string, SocialMetadata> parse_social_fixture(std::istream& in);

/// Live response bodies: a bare integer, or four integers separated by
/// whitespace or commas.
std::optional<std::int64_t> parse_title_hits_body(std::string_view body);
std::optional<SocialMetadata> parse_social_body(std::string_view body);

std::string percent_encode(std::string_view s);

std::shared_ptr<TitleHitsProvider> make_title_hits_provider(const ProviderConfig& cfg);
std::shared_ptr<SocialProvider> make_social_provider(const ProviderConfig& cfg);

/// Fixture-backed provider over an in-memory table.
template <class T>
std::shared_ptr<Provider<T>> make_table_provider(std::unordered_map<std::string, T> table);

/// Lookups that absorb failure: absent means unavailable or unknown, never 0.
std::optional<std::int64_t> title_hit_count(const std::string& title, TitleHitsProvider& provider);
std::optional<SocialMetadata> social_metadata(const std::string& key, SocialProvider& provider);

/// Append-only on-disk cache, one file per provider kind. Found and
/// not-found answers are cached; unavailable ones are not.
class EnrichmentCache {
 public:
  /// Creates `dir` if needed and loads existing records. Throws IoError.
  explicit EnrichmentCache(std::filesystem::path dir);

  std::optional<Lookup<std::int64_t>> title_hits(const std::string& title) const;
  std::optional<Lookup<SocialMetadata>> social(const std::string& key) const;
  void put_title_hits(const std::string& title, const Lookup<std::int64_t>& v, const Timestamp& at);
  void put_social(const std::string& key, const Lookup<SocialMetadata>& v, const Timestamp& at);

  std::filesystem::path title_hits_path() const { return dir_ / "title_hits.tsv"; }
  std::filesystem::path social_path() const { return dir_ / "social.tsv"; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, Lookup<std::int64_t>> hits_;
  std::unordered_map<std::string, Lookup<SocialMetadata>> social_;
};

struct Providers {
  std::shared_ptr<TitleHitsProvider> title_hits;  // null: F1 not gathered
  std::shared_ptr<SocialProvider> social;         // null: F2 not gathered
};

/// Social lookup key of a story: its content url when known, else its id.
std::string social_key(std::int64_t news_id, const ContentMap* content);

/// One lookup per distinct title and per distinct social key, cache first.
/// Stories with neither value are omitted from the result.
EnrichmentMap enrich_dataset(const Dataset& d, const Providers& providers, EnrichmentCache* cache,
                             const ContentMap* content = nullptr);

}  // namespace newsclick
