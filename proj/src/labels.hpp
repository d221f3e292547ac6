#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deid {

// Closed set of sensitive-information categories.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> categories);

  // The eleven categories of the reference corpus, in frequency order.
  static LabelSet nubes();
  // One category per line; blank lines and '#' comments are skipped.
  static LabelSet load(const std::string& path);

  bool contains(std::string_view category) const;
  // Throws kUnknownLabel for categories outside the set.
  void require(std::string_view category) const;
  std::optional<std::size_t> index_of(std::string_view category) const;

  const std::vector<std::string>& categories() const { return categories_; }
  std::size_t size() const { return categories_.size(); }

  // "O" followed by B-/I- pairs in category order: 2 * size() + 1 entries.
  std::vector<std::string> bio_alphabet() const;

  bool operator==(const LabelSet&) const = default;

 private:
  std::vector<std::string> categories_;
};

enum class BioPrefix : char { kB = 'B', kI = 'I', kO = 'O' };

struct BioLabel {
  BioPrefix prefix = BioPrefix::kO;
  std::string category;  // empty iff prefix == O

  static BioLabel outside() { return {}; }
  static BioLabel begin(std::string cat) { return {BioPrefix::kB, std::move(cat)}; }
  static BioLabel inside(std::string cat) { return {BioPrefix::kI, std::move(cat)}; }

  // Accepts "O", "B-<cat>" and "I-<cat>"; throws kLabelVocabulary otherwise.
  static BioLabel parse(std::string_view s);

  bool is_outside() const { return prefix == BioPrefix::kO; }
  std::string str() const;

  bool operator==(const BioLabel&) const = default;
};

using LabelSequence = std::vector<BioLabel>;

}  // namespace deid
