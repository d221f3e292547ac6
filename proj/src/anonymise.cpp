#include "anonymise.hpp"

#include <algorithm>
#include <optional>
#include <regex>

#include "error.hpp"
#include "random.hpp"
#include "tokenizer.hpp"
#include "unicode.hpp"
#include "json.hpp"

namespace deid::anon {

namespace {

const std::vector<std::string>& month_names() {
  static const std::vector<std::string> m{"enero", "febrero", "marzo", "abril", "mayo", "junio",
                                          "julio", "agosto", "septiembre", "octubre",
                                          "noviembre", "diciembre"};
  return m;
}

int month_index(const std::string& word) {
  auto f = unicode::fold(word);
  if (f == "setiembre") return 9;
  const auto& m = month_names();
  auto it = std::find(m.begin(), m.end(), f);
  return it == m.end() ? 0 : static_cast<int>(it - m.begin()) + 1;
}

bool valid_date(int y, int m, int d) {
  if (m < 1 || m > 12 || d < 1) return false;
  int y2 = y, m2 = m + 1;
  if (m2 == 13) {
    m2 = 1;
    ++y2;
  }
  auto len = days_from_civil(y2, static_cast<unsigned>(m2), 1) -
             days_from_civil(y, static_cast<unsigned>(m), 1);
  return d <= len;
}

std::string pad(long v, std::size_t width) {
  auto s = std::to_string(v);
  while (s.size() < width) s.insert(s.begin(), '0');
  return s;
}

std::string match_case(const std::string& like, std::string word) {
  auto src = unicode::decode(like);
  auto w = unicode::decode(word);
  if (src.empty() || w.empty()) return word;
  bool all_upper = std::all_of(src.begin(), src.end(), [](char32_t c) { return !unicode::is_lower(c); });
  if (all_upper && src.size() > 1) {
    for (auto& c : w) c = unicode::to_upper(c);
  } else if (unicode::is_upper(src[0])) {
    w[0] = unicode::to_upper(w[0]);
  }
  return unicode::encode(w);
}

std::string title_case(const std::string& phrase) {
  auto w = unicode::decode(phrase);
  bool start = true;
  for (auto& c : w) {
    if (start && unicode::is_letter(c)) c = unicode::to_upper(c);
    start = unicode::is_space(c);
  }
  return unicode::encode(w);
}

std::optional<std::string> shift_date(const std::string& s, int days) {
  static const std::regex numeric(R"(^(\d{1,2})([/-])(\d{1,2})([/-])(\d{2}|\d{4})$)");
  static const std::regex textual(R"(^(\d{1,2}) de ([^ ]+)( de (\d{4}))?$)", std::regex::icase);
  static const std::regex month_year(R"(^([^ ]+) de (\d{4})$)", std::regex::icase);
  std::smatch m;
  int y = 0, mo = 0, d = 0;
  if (std::regex_match(s, m, numeric)) {
    d = std::stoi(m[1]);
    mo = std::stoi(m[3]);
    y = std::stoi(m[5]);
    const bool short_year = m[5].length() == 2;
    if (short_year) y += y < 50 ? 2000 : 1900;
    if (!valid_date(y, mo, d)) return std::nullopt;
    int ny;
    unsigned nm, nd;
    civil_from_days(days_from_civil(y, mo, d) + days, ny, nm, nd);
    return pad(nd, m[1].length()) + m[2].str() + pad(nm, m[3].length()) + m[4].str() +
           (short_year ? pad(ny % 100, 2) : pad(ny, 4));
  }
  if (std::regex_match(s, m, textual)) {
    mo = month_index(m[2]);
    if (!mo) return std::nullopt;
    d = std::stoi(m[1]);
    const bool has_year = m[3].matched;
    // Without a year, use a non-leap reference year.
    y = has_year ? std::stoi(m[4]) : 2001;
    if (!valid_date(y, mo, d)) return std::nullopt;
    int ny;
    unsigned nm, nd;
    civil_from_days(days_from_civil(y, mo, d) + days, ny, nm, nd);
    // Written-out dates only zero-pad when the source did.
    const std::size_t width = m[1].str()[0] == '0' ? 2 : 1;
    std::string out = pad(nd, width) + " de " + match_case(m[2], month_names()[nm - 1]);
    if (has_year) out += " de " + std::to_string(ny);
    return out;
  }
  if (std::regex_match(s, m, month_year)) {
    mo = month_index(m[1]);
    if (!mo) return std::nullopt;
    y = std::stoi(m[2]);
    int ny;
    unsigned nm, nd;
    civil_from_days(days_from_civil(y, mo, 1) + days, ny, nm, nd);
    return match_case(m[1], month_names()[nm - 1]) + " de " + std::to_string(ny);
  }
  return std::nullopt;
}

std::optional<std::string> shift_age(const std::string& s, int years) {
  static const std::regex age(R"(^(\d{1,3})(.*)$)");
  std::smatch m;
  if (!std::regex_match(s, m, age)) return std::nullopt;
  long v = std::stol(m[1]) + years;
  if (v < 1) v = 1;
  return std::to_string(v) + m[2].str();
}

std::optional<std::string> shift_time(const std::string& s, std::uint64_t seed) {
  static const std::regex hhmm(R"(^(\d{1,2}):(\d{2})(.*)$)");
  static const std::regex hours(R"(^(\d{1,2})( .*)$)");
  std::smatch m;
  Rng rng(seed);
  if (std::regex_match(s, m, hhmm)) {
    int minutes = std::stoi(m[1]) * 60 + std::stoi(m[2]);
    minutes = (minutes + static_cast<int>(uniform_int(rng, 15, 180))) % (24 * 60);
    return pad(minutes / 60, m[1].length()) + ":" + pad(minutes % 60, 2) + m[3].str();
  }
  if (std::regex_match(s, m, hours)) {
    int h = (std::stoi(m[1]) + static_cast<int>(uniform_int(rng, 1, 6))) % 24;
    return pad(h, m[1].length()) + m[2].str();
  }
  return std::nullopt;
}

enum class Gender { kUnknown, kFemale, kMale };

struct NameParts {
  std::string article, honorific;
  bool honorific_dot = false;
  std::vector<std::string> names;
  Gender gender = Gender::kUnknown;
};

NameParts parse_name(const std::string& s) {
  NameParts p;
  auto toks = tokenize(s);
  std::size_t i = 0;
  if (i < toks.size()) {
    auto f = unicode::fold(toks[i].surface);
    if (f == "el" || f == "la") {
      p.article = toks[i].surface;
      p.gender = f == "la" ? Gender::kFemale : Gender::kMale;
      ++i;
    }
  }
  if (i < toks.size()) {
    auto f = unicode::fold(toks[i].surface);
    if (f == "dr" || f == "dra" || f == "doctor" || f == "doctora") {
      p.honorific = toks[i].surface;
      p.gender = (f == "dra" || f == "doctora") ? Gender::kFemale : Gender::kMale;
      ++i;
      if (i < toks.size() && toks[i].surface == ".") {
        p.honorific_dot = true;
        ++i;
      }
    }
  }
  for (; i < toks.size(); ++i)
    if (unicode::is_letter(unicode::decode(toks[i].surface)[0])) p.names.push_back(toks[i].surface);
  return p;
}

bool contains_folded(const std::vector<std::string>& pool, const std::string& value) {
  auto f = unicode::fold(value);
  return std::any_of(pool.begin(), pool.end(), [&](const std::string& x) { return unicode::fold(x) == f; });
}

const std::string& pick(const std::vector<std::string>& pool, Rng& rng, const std::string& avoid) {
  for (int attempt = 0; attempt < 16; ++attempt) {
    const auto& v = pool[uniform_index(rng, pool.size())];
    if (unicode::fold(v) != unicode::fold(avoid)) return v;
  }
  return pool[uniform_index(rng, pool.size())];
}

std::optional<std::string> surrogate_name(const Annotation& a, const SurrogateResources& res,
                                          Rng& rng) {
  auto parts = parse_name(a.surface);
  if (parts.gender == Gender::kUnknown && !parts.names.empty()) {
    if (contains_folded(res.female_names, parts.names[0])) parts.gender = Gender::kFemale;
    else if (contains_folded(res.male_names, parts.names[0])) parts.gender = Gender::kMale;
  }
  if (parts.gender == Gender::kUnknown)
    parts.gender = uniform_index(rng, 2) == 0 ? Gender::kFemale : Gender::kMale;
  const bool female = parts.gender == Gender::kFemale;

  std::vector<std::string> out;
  if (!parts.article.empty()) out.push_back(match_case(parts.article, female ? "la" : "el"));
  if (!parts.honorific.empty()) {
    auto f = unicode::fold(parts.honorific);
    bool long_form = f == "doctor" || f == "doctora";
    std::string h = long_form ? (female ? "doctora" : "doctor") : (female ? "dra" : "dr");
    out.push_back(match_case(parts.honorific, h) + (parts.honorific_dot ? "." : ""));
  }
  std::size_t n = std::max<std::size_t>(1, parts.names.size());
  const auto& given = female ? res.female_names : res.male_names;
  bool patient = a.category == "Patient";
  for (std::size_t k = 0; k < n; ++k) {
    const std::string avoid = k < parts.names.size() ? parts.names[k] : std::string();
    if (patient && k == 0) {
      if (given.empty()) return std::nullopt;
      out.push_back(pick(given, rng, avoid));
    } else {
      if (res.surnames.empty()) return std::nullopt;
      out.push_back(pick(res.surnames, rng, avoid));
    }
  }
  std::string s;
  for (std::size_t k = 0; k < out.size(); ++k) s += (k ? " " : "") + out[k];
  return s;
}

}  // namespace

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = static_cast<int>(static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2));
}

DocumentShift document_shift(const std::string& doc_id, const Policy& policy) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : doc_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  Rng rng(mix_seed(policy.surrogate_seed, h));
  DocumentShift s;
  if (policy.date_shift_min > policy.date_shift_max || policy.age_shift_min > policy.age_shift_max)
    throw Error(ErrorCode::kInvalidArgument, "shift range with min > max");
  s.days = static_cast<int>(uniform_int(rng, policy.date_shift_min, policy.date_shift_max));
  s.years = static_cast<int>(uniform_int(rng, policy.age_shift_min, policy.age_shift_max));
  return s;
}

std::string placeholder(const std::string& category, std::size_t span_length, const Policy& policy) {
  std::string tag = unicode::encode(
      [&] {
        auto w = unicode::decode(category);
        for (auto& c : w) c = unicode::to_upper(c);
        return w;
      }());
  const auto& fmt = policy.placeholder_format;
  auto pos = fmt.find("{CAT}");
  if (pos == std::string::npos) return fmt;
  std::string prefix = fmt.substr(0, pos), suffix = fmt.substr(pos + 5);
  if (!policy.fit_placeholder_length || prefix.empty() || suffix.empty() || prefix.back() != '-' ||
      suffix.front() != '-')
    return prefix + tag + suffix;
  while (!prefix.empty() && prefix.back() == '-') prefix.pop_back();
  while (!suffix.empty() && suffix.front() == '-') suffix.erase(suffix.begin());
  std::size_t base = unicode::length(prefix) + unicode::length(tag) + unicode::length(suffix);
  std::size_t dashes = span_length > base + 2 ? span_length - base : 2;
  std::size_t left = dashes / 2;
  return prefix + std::string(left, '-') + tag + std::string(dashes - left, '-') + suffix;
}

std::string surrogate(const Annotation& a, const Policy& policy, const SurrogateResources& res,
                      const DocumentShift& shift, std::uint64_t span_seed) {
  if (!res.labels.contains(a.category))
    throw Error(ErrorCode::kUnknownCategory, "no surrogate strategy for category '" + a.category + "'");
  Rng rng(mix_seed(policy.surrogate_seed, span_seed));
  std::optional<std::string> out;
  if (a.category == "Date") {
    out = shift_date(a.surface, shift.days);
  } else if (a.category == "Age") {
    out = shift_age(a.surface, shift.years);
  } else if (a.category == "Time") {
    out = shift_time(a.surface, mix_seed(policy.surrogate_seed, span_seed + 1));
  } else if (a.category == "Doctor" || a.category == "Patient") {
    out = surrogate_name(a, res, rng);
  } else if (auto g = res.gazetteers.find(a.category); g != res.gazetteers.end() && g->second.size() > 1) {
    auto choice = pick(g->second, rng, a.surface);
    auto src = unicode::decode(a.surface);
    bool capital = !src.empty() && unicode::is_upper(src[0]);
    out = capital ? title_case(choice) : choice;
  }
  return out ? *out : placeholder(a.category, a.length(), policy);
}

Anonymised anonymise(const Document& doc, const std::vector<Annotation>& annotations,
                     const Policy& policy, const SurrogateResources& resources) {
  auto anns = annotations;
  std::sort(anns.begin(), anns.end(), [](const Annotation& x, const Annotation& y) { return x.start < y.start; });
  for (std::size_t i = 0; i < anns.size(); ++i) {
    if (anns[i].start >= anns[i].end || anns[i].end > doc.text.size())
      throw Error(ErrorCode::kOffsetOutOfRange, doc.id + ": span [" + std::to_string(anns[i].start) +
                                                    "," + std::to_string(anns[i].end) + ") is out of range");
    if (i && anns[i - 1].overlaps(anns[i]))
      throw Error(ErrorCode::kOverlap, doc.id + ": overlapping spans cannot be anonymised");
  }
  const DocumentShift shift =
      policy.mode == Mode::kSurrogate ? document_shift(doc.id, policy) : DocumentShift{};

  std::vector<Replacement> reps(anns.size());
  for (std::size_t i = 0; i < anns.size(); ++i) {
    auto& r = reps[i];
    const auto& a = anns[i];
    r.source_start = a.start;
    r.source_end = a.end;
    r.category = a.category;
    r.original = doc.slice(a.start, a.end);
    switch (policy.mode) {
      case Mode::kMask:
        r.replacement = unicode::encode(std::u32string(a.length(), policy.mask_char));
        break;
      case Mode::kPlaceholder:
        r.replacement = placeholder(a.category, a.length(), policy);
        break;
      case Mode::kSurrogate: {
        Annotation src = a;
        src.surface = r.original;
        r.replacement = surrogate(src, policy, resources, shift, mix_seed(a.start, a.end));
        break;
      }
    }
  }

  // Right to left so that earlier offsets stay valid while splicing.
  std::u32string text = doc.text;
  for (std::size_t i = reps.size(); i-- > 0;) {
    auto repl = unicode::decode(reps[i].replacement);
    text.replace(reps[i].source_start, reps[i].source_end - reps[i].source_start, repl);
  }
  long long delta = 0;
  for (auto& r : reps) {
    auto len = static_cast<long long>(unicode::length(r.replacement));
    r.output_start = static_cast<std::size_t>(static_cast<long long>(r.source_start) + delta);
    r.output_end = r.output_start + static_cast<std::size_t>(len);
    delta += len - static_cast<long long>(r.source_end - r.source_start);
  }
  return {unicode::encode(text), std::move(reps)};
}

std::string restore(const Anonymised& result) {
  auto text = unicode::decode(result.text);
  for (std::size_t i = result.replacements.size(); i-- > 0;) {
    const auto& r = result.replacements[i];
    text.replace(r.output_start, r.output_end - r.output_start, unicode::decode(r.original));
  }
  return unicode::encode(text);
}

std::string mapping_json(const std::string& doc_id, const Anonymised& result) {
  nlohmann::json j;
  j["document"] = doc_id;
  j["sensitive"] = true;
  auto& arr = j["replacements"] = nlohmann::json::array();
  for (std::size_t i = 0; i < result.replacements.size(); ++i) {
    const auto& r = result.replacements[i];
    arr.push_back({{"id", i + 1},
                   {"category", r.category},
                   {"original", r.original},
                   {"replacement", r.replacement},
                   {"source_start", r.source_start},
                   {"source_end", r.source_end},
                   {"output_start", r.output_start},
                   {"output_end", r.output_end}});
  }
  return j.dump(2);
}

std::vector<std::string> leaked_surfaces(const std::string& output,
                                         const std::vector<Annotation>& annotations) {
  const auto text = unicode::decode(output);
  std::vector<std::string> out;
  for (const auto& a : annotations) {
    const auto needle = unicode::decode(a.surface);
    if (needle.empty()) continue;
    for (auto pos = text.find(needle); pos != std::u32string::npos; pos = text.find(needle, pos + 1)) {
      const auto end = pos + needle.size();
      if ((pos == 0 || !unicode::is_alnum(text[pos - 1])) && (end == text.size() || !unicode::is_alnum(text[end]))) {
        out.push_back(a.surface);
        break;
      }
    }
  }
  return out;
}

}  // namespace deid::anon
