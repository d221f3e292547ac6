#include "brat.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "unicode.hpp"

namespace fs = std::filesystem;

namespace deid {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t b = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(b, i - b));
      b = i + 1;
    }
  }
  return out;
}

bool parse_offset(std::string_view s, std::size_t& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

[[noreturn]] void malformed(const std::string& id, std::size_t lineno, const std::string& why) {
  throw Error(ErrorCode::kMalformedLine,
              (id.empty() ? std::string("ann") : id) + ":" + std::to_string(lineno) + ": " + why);
}

}  // namespace

Document parse_brat(const std::string& text_content, const std::string& ann_content,
                    const LabelSet& labels, std::string id,
                    std::vector<std::string>* warnings) {
  Document doc;
  doc.id = std::move(id);
  doc.text = unicode::decode(text_content);

  std::vector<Annotation> anns;
  std::istringstream in(ann_content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] != 'T') {
      if (warnings)
        warnings->push_back(doc.id + ":" + std::to_string(lineno) + ": skipped non-entity line");
      continue;
    }
    auto fields = split(line, '\t');
    if (fields.size() != 3) malformed(doc.id, lineno, "expected 3 tab-separated fields");
    auto entity = split(fields[1], ' ');
    if (entity.size() < 3) malformed(doc.id, lineno, "expected '<label> <start> <end>'");
    if (entity.size() > 3 || fields[1].find(';') != std::string_view::npos) {
      if (warnings)
        warnings->push_back(doc.id + ":" + std::to_string(lineno) +
                            ": skipped discontinuous entity");
      continue;
    }
    Annotation a;
    a.id = std::string(fields[0]);
    a.category = std::string(entity[0]);
    if (!parse_offset(entity[1], a.start) || !parse_offset(entity[2], a.end))
      malformed(doc.id, lineno, "non-numeric offsets");
    if (a.start >= a.end) malformed(doc.id, lineno, "empty or inverted span");
    a.surface = std::string(fields[2]);
    labels.require(a.category);
    if (a.end > doc.text.size())
      throw Error(ErrorCode::kOffsetMismatch,
                  doc.id + ": " + a.id + " ends past the end of the text");
    auto actual = doc.slice(a.start, a.end);
    if (actual != a.surface)
      throw Error(ErrorCode::kOffsetMismatch, doc.id + ": " + a.id + " surface '" +
                                                  a.surface + "' but text has '" + actual + "'");
    anns.push_back(std::move(a));
  }

  auto kept = normalize_annotations(anns);
  if (warnings && kept.size() != anns.size())
    warnings->push_back(doc.id + ": dropped " + std::to_string(anns.size() - kept.size()) +
                        " overlapping annotation(s)");
  doc.annotations = std::move(kept);
  validate(doc, labels);
  return doc;
}

std::pair<std::string, std::string> serialize_brat(const Document& doc) {
  auto anns = doc.annotations;
  std::stable_sort(anns.begin(), anns.end(), [](const Annotation& x, const Annotation& y) {
    auto nx = annotation_number(x.id), ny = annotation_number(y.id);
    if (nx != ny) return nx < ny;
    return x.id < y.id;
  });
  std::string ann;
  for (const auto& a : anns) {
    ann += a.id + "\t" + a.category + " " + std::to_string(a.start) + " " +
           std::to_string(a.end) + "\t" + a.surface + "\n";
  }
  return {doc.utf8_text(), ann};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileMissing, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path + "'");
}

Corpus read_brat_dir(const std::string& dir, const LabelSet& labels,
                     std::vector<std::string>* warnings) {
  if (!fs::is_directory(dir))
    throw Error(ErrorCode::kFileMissing, "not a directory: '" + dir + "'");
  std::vector<fs::path> texts;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".txt") texts.push_back(e.path());
  std::sort(texts.begin(), texts.end());

  Corpus corpus;
  corpus.reserve(texts.size());
  for (const auto& t : texts) {
    auto ann_path = t;
    ann_path.replace_extension(".ann");
    std::string ann = fs::exists(ann_path) ? read_file(ann_path.string()) : std::string();
    corpus.push_back(parse_brat(read_file(t.string()), ann, labels, t.stem().string(), warnings));
  }
  return corpus;
}

void write_brat_dir(const Corpus& corpus, const std::string& dir) {
  fs::create_directories(dir);
  for (const auto& d : corpus) {
    if (d.id.empty()) throw Error(ErrorCode::kInvalidArgument, "document without id");
    auto [txt, ann] = serialize_brat(d);
    write_file((fs::path(dir) / (d.id + ".txt")).string(), txt);
    write_file((fs::path(dir) / (d.id + ".ann")).string(), ann);
  }
}

}  // namespace deid
