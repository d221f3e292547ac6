#pragma once

#include <string>
#include <utility>
#include <vector>

#include "document.hpp"

namespace deid {

// Parses one BRAT standoff pair. Only entity ("T") lines are read; other
// line kinds are skipped and reported through `warnings` when given.
// Overlapping entities are normalized before validation.
Document parse_brat(const std::string& text_content, const std::string& ann_content,
                    const LabelSet& labels, std::string id = {},
                    std::vector<std::string>* warnings = nullptr);

// Returns (txt, ann). Entity lines are written in ascending id order.
std::pair<std::string, std::string> serialize_brat(const Document& doc);

// Reads every <name>.txt in `dir` (with its optional <name>.ann), sorted by
// name. Document ids are the file stems.
Corpus read_brat_dir(const std::string& dir, const LabelSet& labels,
                     std::vector<std::string>* warnings = nullptr);
void write_brat_dir(const Corpus& corpus, const std::string& dir);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace deid
