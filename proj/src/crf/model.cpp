#include "crf/model.hpp"

#include <cmath>
#include <cstring>

#include "brat.hpp"
#include "error.hpp"

namespace deid::crf {

void CrfConfig::validate() const {
  if (max_iterations < 1)
    throw Error(ErrorCode::kInvalidArgument, "max_iterations must be at least 1");
  if (!(c1 >= 0) || !(c2 >= 0))
    throw Error(ErrorCode::kInvalidArgument, "regularization coefficients must be >= 0");
  if (window.empty()) throw Error(ErrorCode::kInvalidArgument, "empty feature window");
  if (lbfgs_memory < 1) throw Error(ErrorCode::kInvalidArgument, "lbfgs_memory must be >= 1");
}

std::vector<std::size_t> viterbi_decode(const Matrix& state, const Matrix& transition) {
  const std::size_t T = state.rows, L = state.cols;
  std::vector<std::size_t> path(T);
  if (T == 0 || L == 0) return path;
  std::vector<double> delta(L), next(L);
  std::vector<std::size_t> back(T * L, 0);
  for (std::size_t y = 0; y < L; ++y) delta[y] = state(0, y);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      std::size_t best = 0;
      double best_score = delta[0] + transition(0, y);
      for (std::size_t p = 1; p < L; ++p) {
        double s = delta[p] + transition(p, y);
        if (s > best_score) {
          best_score = s;
          best = p;
        }
      }
      next[y] = best_score + state(t, y);
      back[t * L + y] = best;
    }
    delta.swap(next);
  }
  std::size_t best = 0;
  for (std::size_t y = 1; y < L; ++y)
    if (delta[y] > delta[best]) best = y;
  path[T - 1] = best;
  for (std::size_t t = T - 1; t > 0; --t) path[t - 1] = back[t * L + path[t]];
  return path;
}

void CrfModel::index() {
  attr_lookup_.clear();
  attr_lookup_.reserve(attributes.size());
  for (std::uint32_t i = 0; i < attributes.size(); ++i) attr_lookup_.emplace(attributes[i], i);
}

std::int64_t CrfModel::attribute_id(const std::string& name) const {
  auto it = attr_lookup_.find(name);
  return it == attr_lookup_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

std::vector<std::vector<Observation>> CrfModel::observe(const Sentence& sentence) const {
  auto feats = extract_sentence_features(sentence, config.window);
  std::vector<std::vector<Observation>> obs(feats.size());
  for (std::size_t t = 0; t < feats.size(); ++t)
    for (const auto& a : feats[t]) {
      auto id = attribute_id(a.name);
      if (id >= 0) obs[t].push_back({static_cast<std::uint32_t>(id), a.value});
    }
  return obs;
}

Matrix CrfModel::state_scores(const std::vector<std::vector<Observation>>& obs,
                              const std::vector<double>* w) const {
  const auto& wt = w ? *w : weights;
  Matrix s(obs.size(), labels.size());
  for (std::size_t t = 0; t < obs.size(); ++t)
    for (const auto& o : obs[t])
      for (auto k = attr_offsets[o.attr]; k < attr_offsets[o.attr + 1]; ++k)
        s(t, state_labels[k]) += o.value * wt[k];
  return s;
}

Matrix CrfModel::transition_scores(const std::vector<double>* w) const {
  const auto& wt = w ? *w : weights;
  const std::size_t L = labels.size();
  Matrix m(L, L);
  for (std::size_t i = 0; i < L * L; ++i)
    if (transition_param[i] != kNoParam) m.data[i] = wt[static_cast<std::size_t>(transition_param[i])];
  return m;
}

LabelSequence CrfModel::tag(const Sentence& sentence) const {
  auto path = viterbi_decode(state_scores(observe(sentence)), transition_scores());
  LabelSequence out;
  out.reserve(path.size());
  for (auto y : path) out.push_back(BioLabel::parse(labels[y]));
  return out;
}

namespace {

constexpr char kMagic[8] = {'D', 'E', 'I', 'D', 'C', 'R', 'F', '\0'};

class Writer {
 public:
  template <class T>
  void pod(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out += s;
  }
  std::string out;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  template <class T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string str() {
    auto n = pod<std::uint32_t>();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::size_t count(std::size_t elem_size) {
    auto n = pod<std::uint64_t>();
    if (elem_size && n > (in_.size() - pos_) / elem_size)
      throw Error(ErrorCode::kCorruptFile, "model file: array length exceeds file size");
    return static_cast<std::size_t>(n);
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) {
    if (in_.size() - pos_ < n) throw Error(ErrorCode::kCorruptFile, "model file is truncated");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::uint64_t fnv(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

// Layout: magic[8] | u32 version | payload | u64 FNV-1a(payload).
std::string CrfModel::serialize() const {
  Writer w;
  w.pod<std::int32_t>(config.max_iterations);
  w.pod<double>(config.c1);
  w.pod<double>(config.c2);
  w.pod<std::uint8_t>(config.all_transitions ? 1 : 0);
  w.pod<std::uint64_t>(config.window.size());
  for (int o : config.window) w.pod<std::int32_t>(o);
  w.pod<double>(config.convergence_tol);
  w.pod<std::int32_t>(config.lbfgs_memory);

  w.pod<std::uint64_t>(labels.size());
  for (const auto& l : labels) w.str(l);
  w.pod<std::uint64_t>(attributes.size());
  for (const auto& a : attributes) w.str(a);
  w.pod<std::uint64_t>(attr_offsets.size());
  for (auto v : attr_offsets) w.pod<std::uint32_t>(v);
  w.pod<std::uint64_t>(state_labels.size());
  for (auto v : state_labels) w.pod<std::uint32_t>(v);
  w.pod<std::uint64_t>(transition_param.size());
  for (auto v : transition_param) w.pod<std::int32_t>(v);
  w.pod<std::uint64_t>(weights.size());
  for (auto v : weights) w.pod<double>(v);

  std::string out(kMagic, sizeof kMagic);
  Writer head;
  head.pod<std::uint32_t>(kFormatVersion);
  out += head.out;
  out += w.out;
  Writer tail;
  tail.pod<std::uint64_t>(fnv(w.out));
  out += tail.out;
  return out;
}

CrfModel CrfModel::deserialize(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic + 4 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw Error(ErrorCode::kCorruptFile, "not a CRF model file");
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + sizeof kMagic, 4);
  if (version != kFormatVersion)
    throw Error(ErrorCode::kVersionMismatch, "model format version " + std::to_string(version) +
                                                 ", expected " + std::to_string(kFormatVersion));
  const std::size_t head = sizeof kMagic + 4;
  if (bytes.size() < head + 8) throw Error(ErrorCode::kCorruptFile, "model file is truncated");
  std::string_view payload(bytes.data() + head, bytes.size() - head - 8);
  std::uint64_t checksum;
  std::memcpy(&checksum, bytes.data() + bytes.size() - 8, 8);

  Reader r(payload);
  CrfModel m;
  m.config.max_iterations = r.pod<std::int32_t>();
  m.config.c1 = r.pod<double>();
  m.config.c2 = r.pod<double>();
  m.config.all_transitions = r.pod<std::uint8_t>() != 0;
  m.config.window.resize(r.count(4));
  for (auto& o : m.config.window) o = r.pod<std::int32_t>();
  m.config.convergence_tol = r.pod<double>();
  m.config.lbfgs_memory = r.pod<std::int32_t>();

  m.labels.resize(r.count(4));
  for (auto& l : m.labels) l = r.str();
  m.attributes.resize(r.count(4));
  for (auto& a : m.attributes) a = r.str();
  m.attr_offsets.resize(r.count(4));
  for (auto& v : m.attr_offsets) v = r.pod<std::uint32_t>();
  m.state_labels.resize(r.count(4));
  for (auto& v : m.state_labels) v = r.pod<std::uint32_t>();
  m.transition_param.resize(r.count(4));
  for (auto& v : m.transition_param) v = r.pod<std::int32_t>();
  m.weights.resize(r.count(8));
  for (auto& v : m.weights) v = r.pod<double>();
  if (!r.done()) throw Error(ErrorCode::kCorruptFile, "trailing bytes in model file");
  if (fnv(payload) != checksum) throw Error(ErrorCode::kCorruptFile, "model checksum mismatch");

  const std::size_t L = m.labels.size();
  bool consistent = m.attr_offsets.size() == m.attributes.size() + 1 &&
                    m.transition_param.size() == L * L && !m.attr_offsets.empty() &&
                    m.attr_offsets.back() == m.state_labels.size();
  for (auto l : m.state_labels) consistent = consistent && l < L;
  for (auto p : m.transition_param)
    consistent = consistent && (p == kNoParam || (p >= 0 && static_cast<std::size_t>(p) < m.weights.size()));
  for (double w : m.weights) consistent = consistent && std::isfinite(w);
  if (!consistent || m.weights.size() < m.state_labels.size())
    throw Error(ErrorCode::kCorruptFile, "inconsistent model tables");
  for (const auto& l : m.labels) BioLabel::parse(l);
  m.index();
  return m;
}

void CrfModel::save(const std::string& path) const { write_file(path, serialize()); }

CrfModel CrfModel::load(const std::string& path) { return deserialize(read_file(path)); }

}  // namespace deid::crf
