#include "newsclick/synth.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "newsclick/error.hpp"
#include "newsclick/io.hpp"
#include "newsclick/rng.hpp"
#include "newsclick/text.hpp"

namespace newsclick {

namespace {

const std::vector<std::string> kWords = {
    "novo",     "plano",    "para",      "mais",    "ano",      "contra",   "sobre",    "entre",   "primeiro",
    "grande",   "casa",     "cidade",    "mundo",   "dia",      "noite",    "semana",   "milhões", "vitória",
    "derrota",  "jogo",     "acordo",    "lei",     "país",     "estudo",   "revela",   "anuncia", "admite",
    "recusa",   "quer",     "pode",      "vai",     "diz",      "contas",   "empresa",  "mercado", "preço",
    "escola",   "hospital", "tribunal",  "polícia", "ministro", "presidente", "clube",  "treinador",
    "jogador",  "equipa",   "final",     "época",   "resultado", "proposta", "medida",  "crescimento",
    "novidade", "lançamento", "rede",    "internet", "carro",   "viagem",   "verão",    "inverno", "chuva",
};

const std::vector<std::string> kKeyphrases = {
    "Benfica",        "FC Porto",       "Sporting",       "Cristiano Ronaldo", "Liga dos Campeões",
    "Mourinho",       "Liga Europa",    "Selecção Nacional", "governo",        "troika",
    "orçamento",      "desemprego",     "crise",          "greve",             "impostos",
    "Passos Coelho",  "Angela Merkel",  "Obama",          "eleições",          "bolsa",
    "Apple",          "Facebook",       "Google",         "iPhone",            "Android",
    "Samsung",        "incêndio",       "acidente",       "tempestade",        "festival",
    "cinema",         "música",         "saúde",          "Euro 2012",
};

const std::array<std::string_view, kSectionCount> kSectionLabels = {"Geral", "Desporto", "Economia", "Tecnologia",
                                                                    "Vida"};

std::string capitalize_first(std::string s) {
  auto u = text::decode_utf8(s);
  if (!u.empty() && u[0] < 128) u[0] = static_cast<char32_t>(std::toupper(static_cast<int>(u[0])));
  return text::encode_utf8(u);
}

}  // namespace

void SynthParams::validate() const {
  if (n_links < 1) throw ValidationError("n_links must be >= 1");
  if (days < 1) throw ValidationError("days must be >= 1");
  if (!(popularity_sigma >= 0.0)) throw ValidationError("popularity sigma must be >= 0");
  if (!(half_life_hours > 0.0)) throw ValidationError("half-life must be positive");
  if (channels < 1) throw ValidationError("channels must be >= 1");
  if (!(mean_hours_shown >= 1.0)) throw ValidationError("mean_hours_shown must be >= 1");
  for (const double m : hourly_multiplier)
    if (!(m > 0.0)) throw ValidationError("hourly multipliers must be positive");
  for (const double m : subsection_multiplier)
    if (!(m > 0.0)) throw ValidationError("subsection multipliers must be positive");
}

const std::vector<std::string>& synth_keyphrase_vocabulary() { return kKeyphrases; }

SynthOutput synth_generate(const SynthParams& p) {
  p.validate();
  SynthOutput out;

  // Vocabulary stream: keyphrase effects, confidences, channel effects.
  Rng vocab(derive_seed(p.seed, 0));
  std::normal_distribution<double> effect(0.0, 0.8);
  std::uniform_real_distribution<double> confidence(0.45, 1.0);
  std::vector<double> phrase_mult;
  for (const auto& k : kKeyphrases) {
    phrase_mult.push_back(std::exp(effect(vocab)));
    out.keyphrases.push_back({k, std::round(confidence(vocab) * 100.0) / 100.0});
  }
  std::normal_distribution<double> channel_effect(0.0, 0.3);
  std::vector<double> channel_mult;
  for (int c = 0; c < p.channels; ++c) channel_mult.push_back(std::exp(channel_effect(vocab)));

  struct Row {
    std::int64_t hour_index;
    int link;
    LinkHourEntry entry;
  };
  std::vector<Row> rows;
  const std::int64_t total_hours = static_cast<std::int64_t>(p.days) * 24;
  const std::int64_t start = p.start.epoch_seconds();

  for (int link = 0; link < p.n_links; ++link) {
    Rng rng(derive_seed(p.seed, static_cast<std::uint64_t>(link) + 1));
    const std::int64_t news_id = 100000 + link;

    // Title: pool words with up to two keyphrases spliced in.
    std::uniform_int_distribution<int> n_words(3, 8);
    std::uniform_int_distribution<std::size_t> pick_word(0, kWords.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_phrase(0, kKeyphrases.size() - 1);
    std::discrete_distribution<int> n_phrases({0.15, 0.6, 0.25});
    std::vector<std::string> words;
    const int nw = n_words(rng);
    for (int i = 0; i < nw; ++i) words.push_back(kWords[pick_word(rng)]);
    double base = std::exp(std::normal_distribution<double>(p.popularity_mu, p.popularity_sigma)(rng));
    std::vector<std::size_t> used;
    const int np = n_phrases(rng);
    for (int i = 0; i < np; ++i) {
      const std::size_t k = pick_phrase(rng);
      if (std::find(used.begin(), used.end(), k) != used.end()) continue;
      used.push_back(k);
      base *= phrase_mult[k];
      std::uniform_int_distribution<std::size_t> pos(0, words.size());
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos(rng)), kKeyphrases[k]);
    }
    if (std::bernoulli_distribution(0.1)(rng)) {
      std::uniform_int_distribution<std::size_t> pos(0, words.size() - 1);
      auto& w = words[pos(rng)];
      w = "\"" + w + "\"";
    }
    std::string title;
    for (const auto& w : words) title += (title.empty() ? "" : " ") + w;
    title = capitalize_first(title);

    const std::int64_t channel = std::uniform_int_distribution<std::int64_t>(1, p.channels)(rng);
    const auto section = static_cast<std::size_t>(std::uniform_int_distribution<int>(0, kSectionCount - 1)(rng));
    const std::int64_t published = std::uniform_int_distribution<std::int64_t>(0, total_hours - 1)(rng);
    const std::int64_t shown =
        1 + std::geometric_distribution<std::int64_t>(1.0 / p.mean_hours_shown)(rng);
    int level = std::discrete_distribution<int>({0.15, 0.45, 0.25, 0.15})(rng);

    for (std::int64_t h = 0; h < shown && published + h < total_hours; ++h) {
      if (h > 0 && level < 3 && std::bernoulli_distribution(0.2)(rng)) ++level;
      const Subsection sub =
          std::bernoulli_distribution(0.05)(rng) ? Subsection::kNull : static_cast<Subsection>(level);
      LinkHourEntry e;
      e.timestamp = Timestamp::from_epoch_seconds(start + (published + h) * 3600);
      e.channel_id = channel;
      e.section_raw = std::string(kSectionLabels[section]);
      e.section = static_cast<Section>(section);
      e.subsection = sub;
      e.news_id = news_id;
      e.title = title;
      const double expected = base * p.hourly_multiplier[e.timestamp.hour] *
                              p.subsection_multiplier[static_cast<std::size_t>(sub)] *
                              channel_mult[static_cast<std::size_t>(channel - 1)] *
                              std::exp2(-static_cast<double>(h) / p.half_life_hours);
      const auto draw = std::poisson_distribution<std::int64_t>(expected)(rng);
      e.clicks = std::max<std::int64_t>(1, draw);
      rows.push_back({published + h, link, std::move(e)});
    }

    ArticleContent c;
    c.news_id = news_id;
    c.url = "http://news.example/" + std::to_string(news_id);
    std::string body;
    const int body_words = std::uniform_int_distribution<int>(20, 40)(rng);
    for (int i = 0; i < body_words; ++i) body += (body.empty() ? "" : " ") + kWords[pick_word(rng)];
    for (const auto k : used) body += " " + kKeyphrases[k];
    if (std::bernoulli_distribution(0.3)(rng)) body += " " + kKeyphrases[pick_phrase(rng)];
    c.body = body + ".";
    out.content.push_back(std::move(c));

    if (std::bernoulli_distribution(0.9)(rng))
      out.title_hits[title] = std::poisson_distribution<std::int64_t>(1.0 + base / 8.0)(rng);
    if (std::bernoulli_distribution(0.85)(rng)) {
      SocialMetadata s;
      s.shares = std::poisson_distribution<std::int64_t>(0.3 * base)(rng);
      s.likes = std::poisson_distribution<std::int64_t>(0.8 * base)(rng);
      s.comments = std::poisson_distribution<std::int64_t>(0.1 * base)(rng);
      s.total = s.shares + s.likes + s.comments;
      out.social[*out.content.back().url] = s;
    }
  }

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.hour_index != b.hour_index ? a.hour_index < b.hour_index : a.link < b.link;
  });
  std::vector<LinkHourEntry> entries;
  entries.reserve(rows.size());
  for (auto& r : rows) {
    r.entry.line_number = static_cast<std::int64_t>(entries.size()) + 1;
    entries.push_back(std::move(r.entry));
  }
  out.dataset = Dataset(std::move(entries));
  return out;
}

SynthFiles SynthFiles::beside(const std::filesystem::path& dataset) {
  auto sibling = [&](std::string_view suffix) {
    auto p = dataset;
    p.replace_filename(dataset.stem().string() + std::string(suffix));
    return p;
  };
  return {dataset, sibling(".content.tsv"), sibling(".keyphrases.tsv"), sibling(".title_hits.tsv"),
          sibling(".social.tsv")};
}

namespace {

template <class Map, class F>
void write_sorted(const Map& m, std::ostream& out, F&& line) {
  std::vector<typename Map::key_type> keys;
  for (const auto& kv : m) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  for (const auto& k : keys) line(out, k, m.at(k));
}

}  // namespace

void write_synth(const SynthOutput& s, const SynthFiles& files) {
  if (!files.dataset.empty()) write_file_atomic(files.dataset, [&](std::ostream& o) { write_dataset(s.dataset, o); });
  if (!files.content.empty()) write_file_atomic(files.content, [&](std::ostream& o) { write_content(s.content, o); });
  if (!files.keyphrases.empty())
    write_file_atomic(files.keyphrases, [&](std::ostream& o) { write_keyphrases(s.keyphrases, o); });
  if (!files.title_hits.empty())
    write_file_atomic(files.title_hits, [&](std::ostream& o) {
      write_sorted(s.title_hits, o, [](std::ostream& out, const std::string& k, std::int64_t v) {
        out << text::escape_field(k) << '\t' << v << '\n';
      });
    });
  if (!files.social.empty())
    write_file_atomic(files.social, [&](std::ostream& o) {
      write_sorted(s.social, o, [](std::ostream& out, const std::string& k, const SocialMetadata& v) {
        out << text::escape_field(k) << '\t' << v.shares << '\t' << v.likes << '\t' << v.comments << '\t'
            << v.total << '\n';
      });
    });
}

}  // namespace newsclick
