#include "rules.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "brat.hpp"
#include "error.hpp"
#include "unicode.hpp"

namespace fs = std::filesystem;

namespace deid::rules {

namespace {

std::vector<std::string> folded_tokens(const std::vector<Token>& toks) {
  std::vector<std::string> out;
  out.reserve(toks.size());
  for (const auto& t : toks) out.push_back(unicode::fold(t.surface));
  return out;
}

std::string join(const std::vector<Token>& toks, std::size_t b, std::size_t n) {
  std::string s;
  for (std::size_t k = 0; k < n; ++k) {
    if (k) s += ' ';
    s += toks[b + k].surface;
  }
  return s;
}

bool is_capitalized(const std::string& surface) {
  auto cps = unicode::decode(surface);
  return !cps.empty() && unicode::is_upper(cps[0]);
}

bool is_honorific(const std::string& surface) {
  auto f = unicode::fold(surface);
  return f == "dr" || f == "dra" || f == "doctor" || f == "doctora";
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileMissing, "cannot open '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

}  // namespace

void Gazetteer::add(const std::string& surface) {
  auto toks = tokenize(surface);
  if (toks.empty()) return;
  std::string phrase;
  for (std::size_t k = 0; k < toks.size(); ++k) {
    if (k) phrase += ' ';
    phrase += unicode::fold(toks[k].surface);
  }
  entries_.insert(phrase);
  max_len_ = std::max(max_len_, toks.size());
}

bool Gazetteer::contains(const std::string& phrase) const { return entries_.count(phrase) > 0; }

std::size_t Gazetteer::longest_match(const std::vector<std::string>& folded, std::size_t i) const {
  if (entries_.empty() || i >= folded.size()) return 0;
  std::size_t longest = std::min(max_len_, folded.size() - i);
  for (std::size_t n = longest; n >= 1; --n) {
    std::string phrase = folded[i];
    for (std::size_t k = 1; k < n; ++k) phrase += ' ' + folded[i + k];
    if (entries_.count(phrase)) return n;
  }
  return 0;
}

const std::vector<std::string>& category_priority() {
  static const std::vector<std::string> order{"Date",    "Time", "Age",     "Doctor",
                                              "Hospital", "Patient", "Sex", "Kinship",
                                              "Location", "Job"};
  return order;
}

const std::vector<std::string>& gazetteer_categories() {
  static const std::vector<std::string> cats{"Hospital", "Sex", "Kinship", "Location", "Job"};
  return cats;
}

std::map<std::string, std::vector<std::string>> RuleSet::default_patterns() {
  const std::string months =
      "(enero|febrero|marzo|abril|mayo|junio|julio|agosto|septiembre|setiembre|octubre|"
      "noviembre|diciembre)";
  return {
      {"Date",
       {R"(\d{1,2}[/-]\d{1,2}[/-]\d{2,4})", R"(\d{1,2} de )" + months + R"( de \d{4})",
        R"(\d{1,2} de )" + months, months + R"( de \d{4})"}},
      {"Time", {R"(\d{1,2}:\d{2}( (h|horas))?)", R"(\d{1,2} (h|horas))"}},
      {"Age", {R"(\d{1,3} (años|año|meses|mes|semanas|semana|días|día))"}},
      {"Doctor", {R"(dr|dra|doctor|doctora)"}},
  };
}

RuleSet::RuleSet() {
  for (auto& [cat, pats] : default_patterns()) set_patterns(cat, pats);
}

void RuleSet::set_patterns(const std::string& category, std::vector<std::string> patterns) {
  std::vector<std::regex> compiled;
  for (const auto& p : patterns) {
    try {
      compiled.emplace_back(p, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::kInvalidArgument,
                  "bad " + category + " pattern '" + p + "': " + e.what());
    }
  }
  patterns_[category] = std::move(patterns);
  compiled_[category] = std::move(compiled);
}

void RuleSet::set_name_list(std::vector<std::string> names) {
  name_list = std::move(names);
  names_ = Gazetteer{};
  for (const auto& n : name_list) names_.add(n);
}

std::optional<std::size_t> RuleSet::match_regex(const std::string& category,
                                                const std::vector<Token>& toks, std::size_t i,
                                                std::size_t window) const {
  auto it = compiled_.find(category);
  if (it == compiled_.end() || i >= toks.size()) return std::nullopt;
  std::size_t widest = std::min(window, toks.size() - i);
  for (std::size_t n = widest; n >= 1; --n) {
    auto text = join(toks, i, n);
    for (const auto& re : it->second)
      if (std::regex_match(text, re)) return n;
  }
  return std::nullopt;
}

std::optional<std::size_t> RuleSet::match_date(const std::vector<Token>& toks,
                                               std::size_t i) const {
  return match_regex("Date", toks, i, options.window);
}

std::optional<std::size_t> RuleSet::match_time(const std::vector<Token>& toks,
                                               std::size_t i) const {
  return match_regex("Time", toks, i, options.window);
}

std::optional<std::size_t> RuleSet::match_age(const std::vector<Token>& toks,
                                              std::size_t i) const {
  auto n = match_regex("Age", toks, i, options.window);
  if (!n) return n;
  if (options.extended_age_qualifiers && i + *n + 1 < toks.size() &&
      unicode::fold(toks[i + *n].surface) == "y" &&
      unicode::fold(toks[i + *n + 1].surface) == "medio")
    return *n + 2;
  return n;
}

std::optional<Span> RuleSet::match_doctor(const std::vector<Token>& toks, std::size_t i) const {
  if (i >= toks.size() || !match_regex("Doctor", toks, i, 1)) return std::nullopt;
  std::size_t j = i + 1;
  if (j < toks.size() && toks[j].surface == ".") ++j;
  std::size_t first_name = j;
  std::size_t max_names = options.window > 1 ? options.window - 1 : 1;
  while (j < toks.size() && j - first_name < max_names && is_capitalized(toks[j].surface) &&
         !is_honorific(toks[j].surface))
    ++j;
  if (j == first_name) return std::nullopt;
  std::size_t b = options.doctor_includes_honorific ? i : first_name;
  return Span{"Doctor", b, j - b};
}

std::vector<Span> RuleSet::find_spans(const Sentence& sentence) const {
  const auto& toks = sentence.tokens;
  const auto folded = folded_tokens(toks);
  std::vector<bool> taken(toks.size(), false);
  std::vector<Span> out;

  auto free = [&](std::size_t b, std::size_t n) {
    for (std::size_t k = b; k < b + n; ++k)
      if (taken[k]) return false;
    return true;
  };
  auto accept = [&](Span s) {
    for (std::size_t k = s.begin; k < s.begin + s.length; ++k) taken[k] = true;
    out.push_back(std::move(s));
  };

  for (const auto& cat : category_priority()) {
    for (std::size_t i = 0; i < toks.size();) {
      std::optional<Span> m;
      if (cat == "Date") {
        if (auto n = match_date(toks, i)) m = Span{cat, i, *n};
      } else if (cat == "Time") {
        if (auto n = match_time(toks, i)) m = Span{cat, i, *n};
      } else if (cat == "Age") {
        if (auto n = match_age(toks, i)) m = Span{cat, i, *n};
      } else if (cat == "Doctor") {
        m = match_doctor(toks, i);
      } else if (cat == "Patient") {
        if (is_capitalized(toks[i].surface)) {
          if (auto n = names_.longest_match(folded, i)) {
            std::size_t j = i + n;
            std::size_t limit = i + n + (options.window > 1 ? options.window - 1 : 0);
            while (j < toks.size() && j < limit && is_capitalized(toks[j].surface) &&
                   unicode::is_letter(unicode::decode(toks[j].surface)[0]))
              ++j;
            m = Span{cat, i, j - i};
          }
        }
      } else if (auto g = gazetteers.find(cat); g != gazetteers.end()) {
        if (auto n = g->second.longest_match(folded, i)) m = Span{cat, i, n};
      }
      if (m && free(m->begin, m->length)) {
        std::size_t next = m->begin + m->length;
        accept(std::move(*m));
        i = next;
      } else {
        ++i;
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Span& a, const Span& b) { return a.begin < b.begin; });
  return out;
}

LabelSequence tag_rules(const Sentence& sentence, const RuleSet& rules) {
  LabelSequence labels(sentence.tokens.size());
  for (const auto& s : rules.find_spans(sentence)) {
    labels[s.begin] = BioLabel::begin(s.category);
    for (std::size_t k = 1; k < s.length; ++k) labels[s.begin + k] = BioLabel::inside(s.category);
  }
  return labels;
}

std::map<std::string, Gazetteer> build_gazetteers(const Corpus& train,
                                                  const std::vector<std::string>& categories) {
  std::map<std::string, Gazetteer> out;
  for (const auto& c : categories) out[c];
  for (const auto& d : train)
    for (const auto& a : d.annotations) {
      auto it = out.find(a.category);
      if (it != out.end()) it->second.add(a.surface);
    }
  return out;
}

std::vector<std::string> load_name_list(const std::string& path) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (auto& line : read_lines(path)) {
    auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t");
    auto name = line.substr(b, e - b + 1);
    if (seen.insert(name).second) names.push_back(std::move(name));
  }
  return names;
}

RuleSet build_rules(const Corpus& train, std::vector<std::string> names) {
  RuleSet rules;
  rules.gazetteers = build_gazetteers(train, gazetteer_categories());
  rules.set_name_list(std::move(names));
  return rules;
}

void save_rules(const RuleSet& rules, const std::string& dir) {
  fs::create_directories(dir);
  for (const auto& [cat, gaz] : rules.gazetteers) {
    std::string body;
    for (const auto& e : gaz.entries()) body += e + "\n";
    write_file((fs::path(dir) / ("gazetteer_" + cat + ".txt")).string(), body);
  }
  for (const auto& [cat, pats] : rules.patterns()) {
    std::string body;
    for (const auto& p : pats) body += p + "\n";
    write_file((fs::path(dir) / ("regex_" + cat + ".txt")).string(), body);
  }
  std::string names;
  for (const auto& n : rules.name_list) names += n + "\n";
  write_file((fs::path(dir) / "names.txt").string(), names);
  std::ostringstream opts;
  opts << "window=" << rules.options.window << "\n"
       << "extended_age_qualifiers=" << rules.options.extended_age_qualifiers << "\n"
       << "doctor_includes_honorific=" << rules.options.doctor_includes_honorific << "\n";
  write_file((fs::path(dir) / "options.txt").string(), opts.str());
}

RuleSet load_rules(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kFileMissing, "no rules directory '" + dir + "'");
  RuleSet rules;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    auto stem = p.stem().string();
    if (p.extension() != ".txt") continue;
    if (stem.rfind("gazetteer_", 0) == 0) {
      Gazetteer g;
      for (const auto& line : read_lines(p.string()))
        if (!line.empty()) g.add(line);
      rules.gazetteers[stem.substr(10)] = std::move(g);
    } else if (stem.rfind("regex_", 0) == 0) {
      std::vector<std::string> pats;
      for (auto& line : read_lines(p.string()))
        if (!line.empty()) pats.push_back(line);
      rules.set_patterns(stem.substr(6), std::move(pats));
    } else if (stem == "names") {
      rules.set_name_list(load_name_list(p.string()));
    } else if (stem == "options") {
      for (const auto& line : read_lines(p.string())) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto key = line.substr(0, eq);
        auto val = line.substr(eq + 1);
        try {
          if (key == "window") rules.options.window = std::stoul(val);
          else if (key == "extended_age_qualifiers") rules.options.extended_age_qualifiers = val == "1";
          else if (key == "doctor_includes_honorific") rules.options.doctor_includes_honorific = val == "1";
        } catch (const std::exception&) {
          throw Error(ErrorCode::kCorruptFile, "bad option line '" + line + "' in " + p.string());
        }
      }
    }
  }
  return rules;
}

}  // namespace deid::rules
