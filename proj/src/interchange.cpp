#include "interchange.hpp"

#include <charconv>
#include <sstream>

#include "brat.hpp"
#include "error.hpp"

namespace deid {

namespace {

constexpr std::string_view kColumnsPrefix = "# columns:";
constexpr std::string_view kDocPrefix = "# doc:";

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > b) out.emplace_back(s.substr(b, i - b));
  }
  return out;
}

std::vector<std::string> split_tabs(std::string_view s) {
  std::vector<std::string> out;
  std::size_t b = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == '\t') {
      out.emplace_back(s.substr(b, i - b));
      b = i + 1;
    }
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_row(std::size_t lineno, const std::string& why) {
  throw Error(ErrorCode::kMalformedRow, "interchange line " + std::to_string(lineno) + ": " + why);
}

}  // namespace

InterchangeFile parse_interchange(const std::string& content, const LabelSet* labels) {
  InterchangeFile file;
  std::vector<std::string> columns;
  int c_token = -1, c_start = -1, c_end = -1, c_gold = -1, c_pred = -1, c_lemma = -1,
      c_pos = -1, c_ner = -1;
  std::string doc_id;

  InterchangeSentence cur;
  bool cur_has_gold = false, cur_has_pred = false;
  auto flush = [&]() {
    if (cur.sentence.tokens.empty()) return;
    if (!cur_has_gold) cur.gold.clear();
    if (!cur_has_pred) cur.pred.clear();
    cur.sentence.doc_id = doc_id;
    std::size_t idx = 0;
    for (auto it = file.sentences.rbegin(); it != file.sentences.rend(); ++it)
      if (it->sentence.doc_id == doc_id) {
        idx = it->sentence.index + 1;
        break;
      }
    cur.sentence.index = idx;
    for (auto& t : cur.sentence.tokens) t.sentence_index = idx;
    file.sentences.push_back(std::move(cur));
    cur = InterchangeSentence{};
    cur_has_gold = cur_has_pred = false;
  };

  auto label_cell = [&](const std::string& cell, std::size_t lineno, bool& seen) -> BioLabel {
    if (cell == "-") return BioLabel::outside();
    seen = true;
    BioLabel l;
    try {
      l = BioLabel::parse(cell);
    } catch (const Error& e) {
      throw Error(ErrorCode::kLabelVocabulary,
                  "interchange line " + std::to_string(lineno) + ": " + e.what());
    }
    if (labels && !l.is_outside() && !labels->contains(l.category))
      throw Error(ErrorCode::kLabelVocabulary, "interchange line " + std::to_string(lineno) +
                                                   ": unknown category '" + l.category + "'");
    return l;
  };

  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind(kColumnsPrefix, 0) == 0) {
      columns = split_ws(std::string_view(line).substr(kColumnsPrefix.size()));
      for (int i = 0; i < static_cast<int>(columns.size()); ++i) {
        const auto& c = columns[i];
        if (c == "token") c_token = i;
        else if (c == "start") c_start = i;
        else if (c == "end") c_end = i;
        else if (c == "gold") c_gold = i;
        else if (c == "pred") c_pred = i;
        else if (c == "lemma") c_lemma = i;
        else if (c == "pos") c_pos = i;
        else if (c == "ner") c_ner = i;
        else bad_row(lineno, "unknown column '" + c + "'");
      }
      if (c_token < 0 || c_start < 0 || c_end < 0)
        bad_row(lineno, "header must declare token, start and end");
      file.has_lemma = c_lemma >= 0;
      file.has_pos = c_pos >= 0;
      file.has_ner = c_ner >= 0;
      continue;
    }
    if (line.rfind(kDocPrefix, 0) == 0) {
      flush();
      doc_id = trim(std::string_view(line).substr(kDocPrefix.size()));
      continue;
    }
    // Token rows always contain tabs, so a lone "#" token is not a comment.
    if (!line.empty() && line[0] == '#' && line.find('\t') == std::string::npos) continue;
    if (trim(line).empty()) {
      flush();
      continue;
    }
    if (columns.empty()) bad_row(lineno, "token row before '# columns:' header");
    auto cells = split_tabs(line);
    if (cells.size() != columns.size())
      bad_row(lineno, "expected " + std::to_string(columns.size()) + " columns, found " +
                          std::to_string(cells.size()));
    Token t;
    t.surface = cells[c_token];
    auto num = [&](const std::string& s, std::size_t& out) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      if (ec != std::errc() || p != s.data() + s.size())
        bad_row(lineno, "non-numeric offset '" + s + "'");
    };
    num(cells[c_start], t.start);
    num(cells[c_end], t.end);
    if (t.end < t.start) bad_row(lineno, "end before start");
    auto opt = [&](int col) -> std::optional<std::string> {
      if (col < 0 || cells[col] == "-") return std::nullopt;
      return cells[col];
    };
    t.features.lemma = opt(c_lemma);
    t.features.pos = opt(c_pos);
    t.features.ner = opt(c_ner);
    cur.gold.push_back(c_gold >= 0 ? label_cell(cells[c_gold], lineno, cur_has_gold)
                                   : BioLabel::outside());
    cur.pred.push_back(c_pred >= 0 ? label_cell(cells[c_pred], lineno, cur_has_pred)
                                   : BioLabel::outside());
    cur.sentence.tokens.push_back(std::move(t));
  }
  flush();
  return file;
}

InterchangeFile read_interchange(const std::string& path, const LabelSet* labels) {
  return parse_interchange(read_file(path), labels);
}

std::string format_interchange(const InterchangeFile& file) {
  std::ostringstream out;
  out << "# columns: token start end gold pred";
  if (file.has_lemma) out << " lemma";
  if (file.has_pos) out << " pos";
  if (file.has_ner) out << " ner";
  out << '\n';
  std::string doc_id;
  bool first = true;
  for (const auto& s : file.sentences) {
    if (first || s.sentence.doc_id != doc_id) {
      if (!first) out << '\n';
      doc_id = s.sentence.doc_id;
      if (!doc_id.empty() || !first) out << "# doc: " << doc_id << '\n';
    } else {
      out << '\n';
    }
    first = false;
    for (std::size_t i = 0; i < s.sentence.tokens.size(); ++i) {
      const auto& t = s.sentence.tokens[i];
      out << t.surface << '\t' << t.start << '\t' << t.end << '\t'
          << (s.gold.empty() ? "-" : s.gold[i].str()) << '\t'
          << (s.pred.empty() ? "-" : s.pred[i].str());
      auto cell = [&](bool present, const std::optional<std::string>& v) {
        if (present) out << '\t' << v.value_or("-");
      };
      cell(file.has_lemma, t.features.lemma);
      cell(file.has_pos, t.features.pos);
      cell(file.has_ner, t.features.ner);
      out << '\n';
    }
  }
  return out.str();
}

void write_interchange(const std::string& path, const InterchangeFile& file) {
  write_file(path, format_interchange(file));
}

}  // namespace deid
