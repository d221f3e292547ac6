#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "document.hpp"

namespace deid::synth {

struct GeneratorConfig {
  std::uint64_t seed = 0;
  std::size_t n_documents = 100;
  std::size_t min_sentences = 4;
  std::size_t max_sentences = 9;
  double filler_rate = 0.3;  // share of sentences without sensitive spans
  // Sentence templates keyed by the category they are picked for. Slots look
  // like "{Date}" or "{Date:day}"; a template may hold other categories too.
  std::map<std::string, std::vector<std::string>> templates;
  std::vector<std::string> fillers;
  // Target share of each category among all emitted spans (percent).
  std::map<std::string, double> targets;

  // Templates, fillers and targets filled in.
  static GeneratorConfig defaults();
  void validate() const;
};

std::map<std::string, double> default_targets();
std::map<std::string, std::vector<std::string>> default_templates();
std::vector<std::string> default_fillers();

// Given names the generator draws patients from that are also in the shipped
// name list; the rest of its pool is deliberately outside it.
const std::vector<std::string>& listed_given_names();

// Byte-identical output for equal configs.
Corpus generate(const GeneratorConfig& config);

// Percentage of spans per category.
std::map<std::string, double> category_shares(const Corpus& corpus);

}  // namespace deid::synth
