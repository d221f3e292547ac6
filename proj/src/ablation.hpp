#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "eval.hpp"
#include "pipeline.hpp"
#include "split.hpp"

namespace deid {

// A system that can be retrained from a sentence subset.
struct TrainableSystem {
  std::string name;
  std::function<std::unique_ptr<Tagger>(const std::vector<LabelledSentence>& train,
                                        const std::vector<LabelledSentence>& dev)>
      train;
};

TrainableSystem crf_system(const crf::CrfConfig& config);
// Gazetteers come from the subset's gold spans; `names` feeds the Patient detector.
TrainableSystem rules_system(std::vector<std::string> names);

struct AblationEntry {
  std::string system;
  int fraction = 100;
  std::size_t train_sentences = 0;
  std::uint64_t subset_hash = 0;
  eval::EvalReport report;
};

struct AblationReport {
  std::vector<int> fractions;
  std::uint64_t seed = 0;
  std::vector<AblationEntry> entries;

  const AblationEntry* find(const std::string& system, int fraction) const;
  // `system,fraction,scenario,precision,recall,f1,tp,fp,fn` with header.
  std::string to_csv() const;
  // `system,fraction,scenario,f1,delta_f1`; deltas against each system's
  // largest fraction (normally 100).
  std::string deltas_csv() const;
};

inline const std::vector<int>& default_fractions() {
  static const std::vector<int> f{1, 5, 10, 20, 40, 60, 80, 100};
  return f;
}

// Every system is retrained on the same nested subsets of the split's
// training sentences and scored on its test documents. Training failures are
// rethrown with the system and fraction prepended to the message.
AblationReport ablation_run(const std::vector<TrainableSystem>& systems, const CorpusSplit& split,
                            const std::vector<int>& fractions, std::uint64_t seed,
                            const std::vector<std::string>& categories);

}  // namespace deid
