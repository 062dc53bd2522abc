// Copyright 2026 The memre Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MEMRE_DATA_HPP_
#define MEMRE_DATA_HPP_

// Corpus objects, DocRED-format and generic JSONL ingestion, candidate pair
// enumeration and label subsampling.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace memre {

enum class Provenance { kHuman, kDistant, kSyntheticTrue, kSyntheticObserved };

const char* provenance_name(Provenance p);
Provenance parse_provenance(std::string_view name);

struct EntityMention {
  std::size_t entity = 0;
  std::size_t sentence = 0;
  std::size_t start = 0;  // token offsets within the sentence
  std::size_t end = 0;
  std::string name;
  std::string type;
};

struct RelationTriple {
  std::size_t head = 0;
  std::size_t tail = 0;
  std::size_t relation = 0;  // 1..R
  Provenance provenance = Provenance::kHuman;

  friend bool operator==(const RelationTriple& a, const RelationTriple& b) {
    return a.head == b.head && a.tail == b.tail && a.relation == b.relation &&
           a.provenance == b.provenance;
  }
};

struct Document {
  std::string id;
  std::vector<std::vector<std::string>> sentences;
  std::vector<std::vector<EntityMention>> entities;
  std::vector<RelationTriple> labels;
  std::string split;

  std::size_t entity_count() const { return entities.size(); }
  std::size_t token_count() const;
  // Offset of the first token of sentence `s` in the flattened document.
  std::size_t sentence_offset(std::size_t s) const;
  std::vector<std::string> tokens() const;
  // Surface name of an entity: its first mention's name.
  const std::string& entity_name(std::size_t entity) const;
};

// Bidirectional relation-name <-> id map; ids start at 1 (0 is the
// threshold / no-relation class).
class RelationSchema {
 public:
  RelationSchema() = default;
  static RelationSchema from_names(const std::vector<std::string>& names);

  // Id for a name, registering it unless the schema is frozen.
  std::size_t intern(const std::string& name);
  std::size_t id(const std::string& name) const;
  bool contains(const std::string& name) const;
  const std::string& name(std::size_t id) const;
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t> ids_;
  bool frozen_ = false;
};

struct Corpus {
  std::vector<Document> docs;
  RelationSchema relations;

  std::size_t triple_count() const;
};

// DocRED JSON array: sents, vertexSet (name, sent_id, pos, type), labels
// (h, t, r, optional evidence, which is ignored).
Corpus parse_docred(std::string_view json, RelationSchema schema = {},
                    Provenance provenance = Provenance::kHuman);
std::string serialize_docred(const Corpus& corpus);

// One object per line: doc_id, sentences, mentions (entity, sent_id, start,
// end, name, type), triples (h, t, r, provenance). Blank lines are skipped.
Corpus parse_generic_jsonl(std::string_view text, RelationSchema schema = {});
std::string serialize_generic_jsonl(const Corpus& corpus);

// Throws ParseError on any out-of-range index or span.
void validate_document(const Document& doc, std::size_t relation_count);

// Ordered pairs (h, t), h != t, in lexicographic order.
std::vector<std::pair<std::size_t, std::size_t>> enumerate_pairs(
    const Document& doc);

// Keeps each labeled triple independently with probability `keep_fraction`.
Corpus drop_labels(const Corpus& corpus, double keep_fraction,
                   std::uint64_t seed);

// Format by extension: .json DocRED, .jsonl generic.
Corpus load_corpus(const std::filesystem::path& path,
                   RelationSchema schema = {});
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Vocabulary file: one token per line, line number is the id, id 0 reserved
// for the unknown token.
class Vocabulary {
 public:
  static constexpr std::size_t kUnknown = 0;
  static constexpr const char* kUnknownToken = "<unk>";

  Vocabulary();
  static Vocabulary build(const std::vector<const Corpus*>& corpora);
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t id(const std::string& token) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::vector<std::size_t> encode(const Document& doc) const;

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, std::size_t> ids_;
};

// --- synthetic PU corpora ---------------------------------------------------

struct SynthConfig {
  std::size_t train_docs = 500;
  std::size_t distant_docs = 0;
  std::size_t dev_docs = 100;
  std::size_t test_docs = 200;
  std::size_t entities_min = 6;
  std::size_t entities_max = 8;
  std::size_t mentions_max = 2;
  std::size_t sentences = 3;
  std::size_t sentence_length = 10;
  std::size_t filler_vocab = 200;
  std::size_t name_pool = 300;
  std::size_t types = 12;
  std::size_t type_synonyms = 3;
  std::size_t latent_dim = 4;
  std::size_t relations = 8;
  // Weight of the head-only / tail-only terms of the planted score relative
  // to the pairwise term.
  double unary_weight = 1.0;
  // Std of a hidden per-entity offset added to its type vector. Nonzero
  // values make the relation only probable, not certain, given the types.
  double entity_noise = 0.0;
  std::vector<double> priors;       // per class; empty -> default profile
  std::vector<double> keep_rates;   // per class train keep-rate; size 1 ok
  double distant_keep_rate = 0.5;
  double distant_noise = 0.1;       // relation-id flip probability
  std::uint64_t seed = 7;

  std::vector<double> resolved_priors() const;
  double keep_rate(std::size_t relation) const;  // 1-based
};

void validate_synth_config(const SynthConfig& cfg);

struct RealizedPriors {
  std::vector<double> pi;          // true positive rate per class
  std::vector<double> pi_labeled;  // observed positive rate per class
  std::vector<std::size_t> n_true;
  std::vector<std::size_t> n_observed;
  std::size_t candidate_pairs = 0;
};

struct SynthSplit {
  Corpus observed;
  Corpus oracle;
  RealizedPriors priors;
};

struct SynthCorpus {
  std::map<std::string, SynthSplit> splits;  // train, distant, dev, test
  RelationSchema relations;
  std::vector<double> thresholds;            // calibrated per class
};

// Relations are planted by thresholding a fixed score of the two entity
// types' latent vectors; the thresholds are calibrated on the type-pair grid
// so each class hits its configured prior. Observed labels keep true labels
// i.i.d. with the class keep-rate; the distant split also flips relation ids
// with probability `distant_noise`. Dev/test observed labels equal oracle.
SynthCorpus synthesize_pu_corpus(const SynthConfig& cfg);

RealizedPriors count_priors(const Corpus& observed, const Corpus& oracle);

}  // namespace memre

#endif  // MEMRE_DATA_HPP_
