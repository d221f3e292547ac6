#include "labels.hpp"

#include <algorithm>
#include <fstream>

#include "error.hpp"

namespace deid {

LabelSet::LabelSet(std::vector<std::string> categories)
    : categories_(std::move(categories)) {
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    const auto& c = categories_[i];
    if (c.empty() || c == "O" || c.find_first_of(" \t\n") != std::string::npos)
      throw Error(ErrorCode::kInvalidArgument, "invalid category name '" + c + "'");
    if (std::find(categories_.begin(), categories_.begin() + i, c) !=
        categories_.begin() + i)
      throw Error(ErrorCode::kInvalidArgument, "duplicate category '" + c + "'");
  }
}

LabelSet LabelSet::nubes() {
  return LabelSet({"Date", "Hospital", "Age", "Time", "Doctor", "Sex", "Kinship",
                   "Location", "Patient", "Job", "Other"});
}

LabelSet LabelSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileMissing, "cannot open label set '" + path + "'");
  std::vector<std::string> cats;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t");
    cats.push_back(line.substr(b, e - b + 1));
  }
  return LabelSet(std::move(cats));
}

bool LabelSet::contains(std::string_view category) const {
  return index_of(category).has_value();
}

void LabelSet::require(std::string_view category) const {
  if (!contains(category))
    throw Error(ErrorCode::kUnknownLabel,
                "label '" + std::string(category) + "' is not in the label set");
}

std::optional<std::size_t> LabelSet::index_of(std::string_view category) const {
  auto it = std::find(categories_.begin(), categories_.end(), category);
  if (it == categories_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - categories_.begin());
}

std::vector<std::string> LabelSet::bio_alphabet() const {
  std::vector<std::string> out{"O"};
  for (const auto& c : categories_) {
    out.push_back("B-" + c);
    out.push_back("I-" + c);
  }
  return out;
}

BioLabel BioLabel::parse(std::string_view s) {
  if (s == "O") return outside();
  if (s.size() > 2 && s[1] == '-' && (s[0] == 'B' || s[0] == 'I')) {
    BioLabel l;
    l.prefix = static_cast<BioPrefix>(s[0]);
    l.category = std::string(s.substr(2));
    return l;
  }
  throw Error(ErrorCode::kLabelVocabulary, "malformed BIO label '" + std::string(s) + "'");
}

std::string BioLabel::str() const {
  if (prefix == BioPrefix::kO) return "O";
  return std::string(1, static_cast<char>(prefix)) + "-" + category;
}

}  // namespace deid
