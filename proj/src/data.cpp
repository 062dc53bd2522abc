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

#include "memre/data.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "memre/errors.hpp"
#include "memre/rng.hpp"

namespace memre {

using json = nlohmann::json;

namespace {

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(where + ": missing field '" + key + "'");
  }
  return obj.at(key);
}

std::string relation_key(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw ParseError("relation must be a string or integer");
}

std::vector<std::vector<std::string>> parse_sentences(const json& sents,
                                                     const std::string& where) {
  if (!sents.is_array()) throw ParseError(where + ": sentences not an array");
  std::vector<std::vector<std::string>> out;
  for (const auto& sent : sents) {
    if (!sent.is_array()) throw ParseError(where + ": sentence not an array");
    auto& tokens = out.emplace_back();
    for (const auto& tok : sent) tokens.push_back(tok.get<std::string>());
  }
  return out;
}

}  // namespace

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kHuman:
      return "human";
    case Provenance::kDistant:
      return "distant";
    case Provenance::kSyntheticTrue:
      return "synthetic-true";
    case Provenance::kSyntheticObserved:
      return "synthetic-observed";
  }
  return "human";
}

Provenance parse_provenance(std::string_view name) {
  if (name == "human") return Provenance::kHuman;
  if (name == "distant") return Provenance::kDistant;
  if (name == "synthetic-true") return Provenance::kSyntheticTrue;
  if (name == "synthetic-observed") return Provenance::kSyntheticObserved;
  throw ParseError("unknown provenance '" + std::string(name) + "'");
}

// --- Document ------------------------------------------------------------------

std::size_t Document::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

std::size_t Document::sentence_offset(std::size_t s) const {
  std::size_t offset = 0;
  for (std::size_t i = 0; i < s && i < sentences.size(); ++i)
    offset += sentences[i].size();
  return offset;
}

std::vector<std::string> Document::tokens() const {
  std::vector<std::string> out;
  for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

const std::string& Document::entity_name(std::size_t entity) const {
  return entities.at(entity).at(0).name;
}

// --- RelationSchema -------------------------------------------------------------

RelationSchema RelationSchema::from_names(const std::vector<std::string>& names) {
  RelationSchema schema;
  for (const auto& n : names) schema.intern(n);
  schema.freeze();
  return schema;
}

std::size_t RelationSchema::intern(const std::string& name) {
  auto it = ids_.find(name);
  if (it != ids_.end()) return it->second;
  if (frozen_) throw ParseError("relation '" + name + "' not in schema");
  names_.push_back(name);
  ids_[name] = names_.size();
  return names_.size();
}

std::size_t RelationSchema::id(const std::string& name) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) throw ParseError("relation '" + name + "' not in schema");
  return it->second;
}

bool RelationSchema::contains(const std::string& name) const {
  return ids_.count(name) > 0;
}

const std::string& RelationSchema::name(std::size_t id) const {
  if (id == 0 || id > names_.size()) {
    throw ParseError("relation id " + std::to_string(id) + " out of range");
  }
  return names_[id - 1];
}

std::size_t Corpus::triple_count() const {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.labels.size();
  return n;
}

// --- validation -------------------------------------------------------------------

void validate_document(const Document& doc, std::size_t relation_count) {
  const std::string where = "document '" + doc.id + "'";
  for (std::size_t e = 0; e < doc.entities.size(); ++e) {
    if (doc.entities[e].empty()) {
      throw ParseError(where + ": entity " + std::to_string(e) +
                       " has no mentions");
    }
    for (const auto& m : doc.entities[e]) {
      if (m.sentence >= doc.sentences.size()) {
        throw ParseError(where + ": validation: mention sentence " +
                         std::to_string(m.sentence) + " out of range");
      }
      if (m.start >= m.end || m.end > doc.sentences[m.sentence].size()) {
        throw ParseError(where + ": validation: mention span [" +
                         std::to_string(m.start) + "," +
                         std::to_string(m.end) + ") out of range");
      }
    }
  }
  for (const auto& t : doc.labels) {
    if (t.head >= doc.entities.size() || t.tail >= doc.entities.size()) {
      throw ParseError(where + ": validation: triple entity out of range");
    }
    if (t.head == t.tail) {
      throw ParseError(where + ": validation: triple with head == tail");
    }
    if (t.relation == 0 || t.relation > relation_count) {
      throw ParseError(where + ": validation: relation id " +
                       std::to_string(t.relation) + " out of range");
    }
  }
}

// --- DocRED ---------------------------------------------------------------------

Corpus parse_docred(std::string_view text, RelationSchema schema,
                    Provenance provenance) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("docred: ") + e.what());
  }
  if (!root.is_array()) throw ParseError("docred: top level is not an array");
  Corpus corpus;
  corpus.docs.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    const auto& obj = root[i];
    const std::string where = "docred document " + std::to_string(i);
    try {
      Document doc;
      doc.id = obj.contains("title") ? obj["title"].get<std::string>()
                                     : std::to_string(i);
      doc.sentences = parse_sentences(field(obj, "sents", where), where);
      const auto& vertex_set = field(obj, "vertexSet", where);
      for (std::size_t e = 0; e < vertex_set.size(); ++e) {
        auto& mentions = doc.entities.emplace_back();
        for (const auto& m : vertex_set[e]) {
          EntityMention mention;
          mention.entity = e;
          mention.name = field(m, "name", where).get<std::string>();
          mention.sentence = field(m, "sent_id", where).get<std::size_t>();
          const auto& pos = field(m, "pos", where);
          if (!pos.is_array() || pos.size() != 2) {
            throw ParseError(where + ": pos must be [start, end]");
          }
          mention.start = pos[0].get<std::size_t>();
          mention.end = pos[1].get<std::size_t>();
          mention.type = field(m, "type", where).get<std::string>();
          mentions.push_back(std::move(mention));
        }
      }
      for (const auto& lab : field(obj, "labels", where)) {
        RelationTriple t;
        t.head = field(lab, "h", where).get<std::size_t>();
        t.tail = field(lab, "t", where).get<std::size_t>();
        t.relation = schema.intern(relation_key(field(lab, "r", where)));
        t.provenance = provenance;
        doc.labels.push_back(t);
      }
      corpus.docs.push_back(std::move(doc));
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  for (const auto& doc : corpus.docs) validate_document(doc, schema.size());
  corpus.relations = std::move(schema);
  return corpus;
}

std::string serialize_docred(const Corpus& corpus) {
  json root = json::array();
  for (const auto& doc : corpus.docs) {
    json obj;
    obj["title"] = doc.id;
    obj["sents"] = doc.sentences;
    json vertex_set = json::array();
    for (const auto& mentions : doc.entities) {
      json ent = json::array();
      for (const auto& m : mentions) {
        ent.push_back({{"name", m.name},
                       {"sent_id", m.sentence},
                       {"pos", {m.start, m.end}},
                       {"type", m.type}});
      }
      vertex_set.push_back(std::move(ent));
    }
    obj["vertexSet"] = std::move(vertex_set);
    json labels = json::array();
    for (const auto& t : doc.labels) {
      labels.push_back({{"h", t.head},
                        {"t", t.tail},
                        {"r", corpus.relations.name(t.relation)},
                        {"evidence", json::array()}});
    }
    obj["labels"] = std::move(labels);
    root.push_back(std::move(obj));
  }
  return root.dump() + "\n";
}

// --- generic JSONL ------------------------------------------------------------------

Corpus parse_generic_jsonl(std::string_view text, RelationSchema schema) {
  Corpus corpus;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "jsonl line " + std::to_string(line_no);
    try {
      const json obj = json::parse(line);
      Document doc;
      doc.id = field(obj, "doc_id", where).get<std::string>();
      doc.sentences = parse_sentences(field(obj, "sentences", where), where);
      if (obj.contains("split")) doc.split = obj["split"].get<std::string>();
      for (const auto& m : field(obj, "mentions", where)) {
        EntityMention mention;
        mention.entity = field(m, "entity", where).get<std::size_t>();
        mention.sentence = field(m, "sent_id", where).get<std::size_t>();
        mention.start = field(m, "start", where).get<std::size_t>();
        mention.end = field(m, "end", where).get<std::size_t>();
        mention.name = m.value("name", std::string());
        mention.type = m.value("type", std::string());
        if (mention.entity >= doc.entities.size())
          doc.entities.resize(mention.entity + 1);
        doc.entities[mention.entity].push_back(std::move(mention));
      }
      for (const auto& tr : field(obj, "triples", where)) {
        RelationTriple t;
        t.head = field(tr, "h", where).get<std::size_t>();
        t.tail = field(tr, "t", where).get<std::size_t>();
        t.relation = schema.intern(relation_key(field(tr, "r", where)));
        t.provenance =
            parse_provenance(tr.value("provenance", std::string("human")));
        doc.labels.push_back(t);
      }
      validate_document(doc, schema.size());
      corpus.docs.push_back(std::move(doc));
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const ParseError& e) {
      const std::string msg = e.what();
      if (msg.rfind("jsonl line", 0) == 0) throw;
      throw ParseError(where + ": " + msg);
    }
  }
  corpus.relations = std::move(schema);
  return corpus;
}

std::string serialize_generic_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& doc : corpus.docs) {
    json obj;
    obj["doc_id"] = doc.id;
    if (!doc.split.empty()) obj["split"] = doc.split;
    obj["sentences"] = doc.sentences;
    json mentions = json::array();
    for (const auto& ent : doc.entities)
      for (const auto& m : ent)
        mentions.push_back({{"entity", m.entity},
                            {"sent_id", m.sentence},
                            {"start", m.start},
                            {"end", m.end},
                            {"name", m.name},
                            {"type", m.type}});
    obj["mentions"] = std::move(mentions);
    json triples = json::array();
    for (const auto& t : doc.labels)
      triples.push_back({{"h", t.head},
                         {"t", t.tail},
                         {"r", corpus.relations.name(t.relation)},
                         {"provenance", provenance_name(t.provenance)}});
    obj["triples"] = std::move(triples);
    out += obj.dump();
    out += '\n';
  }
  return out;
}

// --- pairs and label dropping -----------------------------------------------------

std::vector<std::pair<std::size_t, std::size_t>> enumerate_pairs(
    const Document& doc) {
  const std::size_t n = doc.entity_count();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (n < 2) return pairs;
  pairs.reserve(n * (n - 1));
  for (std::size_t h = 0; h < n; ++h)
    for (std::size_t t = 0; t < n; ++t)
      if (h != t) pairs.emplace_back(h, t);
  return pairs;
}

Corpus drop_labels(const Corpus& corpus, double keep_fraction,
                   std::uint64_t seed) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw PreconditionError("drop_labels: keep fraction must be in (0, 1]");
  }
  Corpus out = corpus;
  if (keep_fraction == 1.0) return out;
  Rng rng(seed);
  for (auto& doc : out.docs) {
    std::vector<RelationTriple> kept;
    for (const auto& t : doc.labels)
      if (rng.bernoulli(keep_fraction)) kept.push_back(t);
    doc.labels = std::move(kept);
  }
  return out;
}

// --- files --------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

Corpus load_corpus(const std::filesystem::path& path, RelationSchema schema) {
  const auto text = read_file(path);
  if (path.extension() == ".jsonl") {
    return parse_generic_jsonl(text, std::move(schema));
  }
  return parse_docred(text, std::move(schema));
}

// --- Vocabulary ------------------------------------------------------------------------

Vocabulary::Vocabulary() {
  tokens_.push_back(kUnknownToken);
  ids_[kUnknownToken] = kUnknown;
}

Vocabulary Vocabulary::build(const std::vector<const Corpus*>& corpora) {
  Vocabulary vocab;
  std::set<std::string> seen;
  for (const auto* corpus : corpora)
    for (const auto& doc : corpus->docs)
      for (const auto& sent : doc.sentences)
        for (const auto& tok : sent) seen.insert(tok);
  seen.erase(kUnknownToken);
  for (const auto& tok : seen) {
    vocab.ids_[tok] = vocab.tokens_.size();
    vocab.tokens_.push_back(tok);
  }
  return vocab;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open vocabulary " + path.string());
  Vocabulary vocab;
  vocab.tokens_.clear();
  vocab.ids_.clear();
  std::string line;
  while (std::getline(in, line)) {
    vocab.ids_.emplace(line, vocab.tokens_.size());
    vocab.tokens_.push_back(line);
  }
  if (vocab.tokens_.empty()) throw ParseError("empty vocabulary " + path.string());
  return vocab;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::string out;
  for (const auto& tok : tokens_) {
    out += tok;
    out += '\n';
  }
  write_file(path, out);
}

std::size_t Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnknown : it->second;
}

std::vector<std::size_t> Vocabulary::encode(const Document& doc) const {
  std::vector<std::size_t> ids;
  ids.reserve(doc.token_count());
  for (const auto& sent : doc.sentences)
    for (const auto& tok : sent) ids.push_back(id(tok));
  return ids;
}

}  // namespace memre
