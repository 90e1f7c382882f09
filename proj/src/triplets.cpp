#include "hice/triplets.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "hice/errors.hpp"
#include "hice/predicate_lexicon_data.hpp"

namespace hice {

namespace {

constexpr std::array<std::string_view, 3> kArticles = {"a", "an", "the"};
constexpr std::array<std::string_view, 6> kConjunctions = {"and", "but", "or", "nor", "yet", "so"};

bool is_clause_break(char c) {
  return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?';
}

bool is_token_separator(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '(' || c == ')' ||
         c == '[' || c == ']' || c == '{' || c == '}';
}

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& words, std::string_view w) {
  return std::find(words.begin(), words.end(), w) != words.end();
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::string current;
  for (char c : s) {
    if (is_token_separator(c)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::string join(const std::vector<std::string>& tokens, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

// Clauses as article-free token lists, in input order.
std::vector<std::vector<std::string>> split_clauses(std::string_view lowered) {
  std::vector<std::vector<std::string>> clauses;
  std::vector<std::string> current;
  auto flush = [&] {
    if (!current.empty()) clauses.push_back(std::move(current));
    current.clear();
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i <= lowered.size(); ++i) {
    if (i < lowered.size() && !is_clause_break(lowered[i])) continue;
    for (auto& word : split_words(lowered.substr(start, i - start))) {
      if (contains(kConjunctions, word)) {
        flush();
      } else if (!contains(kArticles, word)) {
        current.push_back(std::move(word));
      }
    }
    flush();
    start = i + 1;
  }
  return clauses;
}

}  // namespace

const PredicateLexicon& PredicateLexicon::builtin() {
  static const PredicateLexicon lexicon = from_text(detail::kBuiltinLexicon);
  return lexicon;
}

PredicateLexicon PredicateLexicon::from_text(std::string_view text) {
  PredicateLexicon lex;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream comment(line.substr(first + 1));
      std::string key;
      int value = 0;
      if (comment >> key && key == "version:" && comment >> value) lex.version_ = value;
      continue;
    }
    auto tokens = split_words(to_lower_ascii(line));
    if (tokens.empty()) continue;
    auto& bucket = lex.by_first_[tokens.front()];
    if (std::find(bucket.begin(), bucket.end(), tokens) != bucket.end()) continue;
    bucket.push_back(std::move(tokens));
    ++lex.size_;
  }
  for (auto& [first, bucket] : lex.by_first_) {
    std::stable_sort(bucket.begin(), bucket.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
  }
  return lex;
}

PredicateLexicon PredicateLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open lexicon file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_text(buffer.str());
}

std::vector<std::string> PredicateLexicon::entries() const {
  std::vector<std::string> out;
  out.reserve(size_);
  for (const auto& [first, bucket] : by_first_) {
    for (const auto& tokens : bucket) out.push_back(join(tokens, 0, tokens.size()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t PredicateLexicon::match(const std::vector<std::string>& tokens, std::size_t pos) const {
  const auto lengths = matches(tokens, pos);
  return lengths.empty() ? 0 : lengths.front();
}

std::vector<std::size_t> PredicateLexicon::matches(const std::vector<std::string>& tokens,
                                                   std::size_t pos) const {
  std::vector<std::size_t> out;
  const auto it = by_first_.find(tokens[pos]);
  if (it == by_first_.end()) return out;
  for (const auto& entry : it->second) {
    if (pos + entry.size() > tokens.size()) continue;
    if (std::equal(entry.begin(), entry.end(), tokens.begin() + static_cast<std::ptrdiff_t>(pos))) {
      out.push_back(entry.size());
    }
  }
  return out;
}

std::vector<Triplet> extract_triplets(std::string_view text, const PredicateLexicon& lexicon) {
  std::vector<Triplet> out;
  for (const auto& clause : split_clauses(to_lower_ascii(text))) {
    std::size_t pred_begin = clause.size();
    for (std::size_t i = 0; i < clause.size(); ++i) {
      if (lexicon.match(clause, i) > 0) {
        pred_begin = i;
        break;
      }
    }
    if (pred_begin == 0 || pred_begin == clause.size()) {
      out.push_back({join(clause, 0, clause.size()), "", ""});
      continue;
    }
    // farthest end reachable by chaining entries
    std::vector<bool> reachable(clause.size() + 1, false);
    reachable[pred_begin] = true;
    std::size_t pred_end = pred_begin;
    for (std::size_t i = pred_begin; i < clause.size(); ++i) {
      if (!reachable[i]) continue;
      for (std::size_t len : lexicon.matches(clause, i)) {
        reachable[i + len] = true;
        pred_end = std::max(pred_end, i + len);
      }
    }
    out.push_back({join(clause, 0, pred_begin), join(clause, pred_begin, pred_end),
                   join(clause, pred_end, clause.size())});
  }
  return out;
}

std::string render_phrase(const Triplet& t) {
  std::string out;
  for (const std::string* part : {&t.subject, &t.predicate, &t.object}) {
    if (part->empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += *part;
  }
  return out;
}

}  // namespace hice
