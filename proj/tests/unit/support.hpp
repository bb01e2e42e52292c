#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "newsclick/data_model.hpp"
#include "newsclick/matrix.hpp"

namespace testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("newsclick-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline newsclick::LinkHourEntry random_entry(std::mt19937_64& rng, std::int64_t line) {
  static const char* sections[] = {"geral", "desporto", "sport", "economia", "tecnologia", "vida", "life"};
  static const char* subs[] = {"manchete", "headlines", "related", "footer", "null"};
  static const char* words[] = {"Benfica", "vence", "em", "Lisboa", "mercado", "[nota", "Crise", "é", "«já»", "x"};
  std::uniform_int_distribution<int> pick(0, 1000000);
  newsclick::LinkHourEntry e;
  e.line_number = line;
  e.timestamp = newsclick::Timestamp{2011, static_cast<unsigned>(1 + pick(rng) % 12),
                                     static_cast<unsigned>(1 + pick(rng) % 28), static_cast<unsigned>(pick(rng) % 24),
                                     static_cast<unsigned>(pick(rng) % 60), static_cast<unsigned>(pick(rng) % 60)};
  e.channel_id = pick(rng) % 40;
  e.section_raw = sections[pick(rng) % 7];
  e.section = *newsclick::canonical_section(e.section_raw);
  e.subsection = *newsclick::parse_subsection(subs[pick(rng) % 5]);
  e.news_id = pick(rng) % 50;
  e.clicks = 1 + pick(rng) % 5000;
  const int n = 1 + pick(rng) % 6;
  for (int i = 0; i < n; ++i) {
    if (i) e.title += ' ';
    e.title += words[pick(rng) % 10];
  }
  return e;
}

inline newsclick::Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, int levels = 0) {
  newsclick::Matrix X(rows, cols);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> lv(0, levels > 0 ? levels - 1 : 0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) X(r, c) = levels > 0 ? lv(rng) : g(rng);
  return X;
}

}  // namespace testing
