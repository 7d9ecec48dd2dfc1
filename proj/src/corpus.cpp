#include "spiketext/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <stdexcept>

namespace spiketext {

namespace fs = std::filesystem;

std::vector<std::string> tokenize(std::string_view raw_text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2 && !is_stop_word(current)) tokens.push_back(current);
    current.clear();
  };
  for (const char c : raw_text) {
    if (c >= 'a' && c <= 'z') {
      current.push_back(c);
    } else if (c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

namespace {

struct RawFile {
  fs::path path;
  std::string label;
  std::string id;
};

std::vector<RawFile> list_split(const fs::path& split_root) {
  std::vector<RawFile> files;
  for (const auto& group_entry : fs::directory_iterator(split_root)) {
    if (!group_entry.is_directory()) continue;
    const std::string label = group_entry.path().filename().string();
    for (const auto& file_entry : fs::directory_iterator(group_entry.path())) {
      if (!file_entry.is_regular_file()) continue;
      files.push_back({file_entry.path(), label,
                       label + "/" + file_entry.path().filename().string()});
    }
  }
  std::sort(files.begin(), files.end(),
            [](const RawFile& a, const RawFile& b) { return a.path < b.path; });
  return files;
}

void ingest_split(const std::vector<RawFile>& files,
                  const std::unordered_map<std::string, int32_t>& label_index,
                  std::vector<CorpusDocument>& out, Corpus& corpus) {
  for (const RawFile& f : files) {
    std::ifstream in(f.path, std::ios::binary);
    if (!in) {
      std::cerr << "warning: skipping unreadable file " << f.path << "\n";
      ++corpus.skipped_unreadable;
      continue;
    }
    std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CorpusDocument doc;
    doc.id = f.id;
    doc.label = label_index.at(f.label);
    doc.tokens = tokenize(raw);
    if (doc.tokens.empty()) {
      ++corpus.dropped_empty;
      continue;
    }
    out.push_back(std::move(doc));
  }
}

}  // namespace

Corpus load_corpus(const fs::path& root, const CorpusLayout& layout) {
  if (!fs::exists(root)) throw std::runtime_error("corpus root does not exist: " + root.string());

  const fs::path train_root = root / layout.train_dir;
  const fs::path test_root = root / layout.test_dir;
  const bool has_split_dirs = fs::is_directory(train_root) || fs::is_directory(test_root);

  std::vector<RawFile> train_files, test_files;
  if (has_split_dirs) {
    if (fs::is_directory(train_root)) train_files = list_split(train_root);
    if (fs::is_directory(test_root)) test_files = list_split(test_root);
  } else {
    train_files = list_split(root);
  }

  // Closed label set discovered over both splits.
  std::set<std::string> labels;
  for (const RawFile& f : train_files) labels.insert(f.label);
  for (const RawFile& f : test_files) labels.insert(f.label);

  Corpus corpus;
  corpus.label_names.assign(labels.begin(), labels.end());
  std::unordered_map<std::string, int32_t> label_index;
  for (size_t i = 0; i < corpus.label_names.size(); ++i)
    label_index[corpus.label_names[i]] = static_cast<int32_t>(i);

  ingest_split(train_files, label_index, corpus.train, corpus);
  ingest_split(test_files, label_index, corpus.test, corpus);

  if (corpus.dropped_empty > 0)
    std::cerr << "note: dropped " << corpus.dropped_empty << " empty document(s)\n";
  if (corpus.train.empty() && corpus.test.empty())
    throw std::runtime_error("corpus contains zero readable documents: " + root.string());
  return corpus;
}

int32_t Dictionary::lookup(std::string_view token) const {
  const auto it = index.find(std::string(token));
  return it == index.end() ? -1 : it->second;
}

namespace {

DocumentTermMatrix vectorize(const std::vector<CorpusDocument>& docs, const Dictionary& dict) {
  DocumentTermMatrix out;
  out.weights.resize(static_cast<Eigen::Index>(docs.size()), dict.size());
  std::vector<Eigen::Triplet<double, int32_t>> trips;
  const double n_train = static_cast<double>(dict.train_documents);

  for (size_t i = 0; i < docs.size(); ++i) {
    const CorpusDocument& doc = docs[i];
    out.labels.push_back(doc.label);
    out.doc_ids.push_back(doc.id);

    std::map<int32_t, int64_t> counts;  // ordered so triplets come out sorted
    for (const std::string& tok : doc.tokens) {
      const int32_t col = dict.lookup(tok);
      if (col >= 0) ++counts[col];  // unseen test tokens are skipped
    }
    // Document length counts every surviving token, in-dictionary or not.
    const double len = static_cast<double>(doc.tokens.size());
    for (const auto& [col, count] : counts) {
      const double tf = static_cast<double>(count) / len;
      const double idf = std::log(n_train / static_cast<double>(dict.document_frequency[col]));
      trips.emplace_back(static_cast<int32_t>(i), col, tf * idf);
    }
  }
  out.weights.setFromTriplets(trips.begin(), trips.end());
  out.weights.makeCompressed();
  return out;
}

}  // namespace

CorpusArtifacts build_tfidf(const Corpus& corpus) {
  if (corpus.train.empty()) throw std::runtime_error("build_tfidf: empty train split");

  // Dictionary over train tokens, lexicographic column order.
  std::map<std::string, int64_t> df;
  for (const CorpusDocument& doc : corpus.train) {
    std::set<std::string_view> uniq(doc.tokens.begin(), doc.tokens.end());
    for (const auto tok : uniq) ++df[std::string(tok)];
  }

  CorpusArtifacts art;
  art.label_names = corpus.label_names;
  Dictionary& dict = art.dictionary;
  dict.train_documents = static_cast<int64_t>(corpus.train.size());
  dict.terms.reserve(df.size());
  dict.document_frequency.reserve(df.size());
  for (const auto& [term, count] : df) {
    dict.index.emplace(term, static_cast<int32_t>(dict.terms.size()));
    dict.terms.push_back(term);
    dict.document_frequency.push_back(count);
  }

  art.train = vectorize(corpus.train, dict);
  art.test = vectorize(corpus.test, dict);
  return art;
}

void save_corpus_artifacts(const fs::path& path, const CorpusArtifacts& art,
                           const std::string& meta_json) {
  std::vector<std::pair<std::string, std::string>> sections;

  ByteWriter dict;
  put_string_vector(dict, art.dictionary.terms);
  dict.u64(static_cast<uint64_t>(art.dictionary.document_frequency.size()));
  for (int64_t v : art.dictionary.document_frequency) dict.i64(v);
  dict.i64(art.dictionary.train_documents);
  sections.emplace_back("dictionary", dict.take());

  ByteWriter labels;
  put_string_vector(labels, art.label_names);
  sections.emplace_back("label_names", labels.take());

  for (const auto& [name, matrix] :
       {std::pair<std::string, const DocumentTermMatrix*>{"train", &art.train},
        {"test", &art.test}}) {
    ByteWriter w;
    put_sparse(w, matrix->weights);
    put_i32_vector(w, matrix->labels);
    put_string_vector(w, matrix->doc_ids);
    sections.emplace_back(name + "_matrix", w.take());
  }

  sections.emplace_back("meta", meta_json);
  write_container(path, kCorpusMagic, sections);
}

CorpusArtifacts load_corpus_artifacts(const fs::path& path) {
  const Container c = read_container(path, kCorpusMagic);
  CorpusArtifacts art;

  ByteReader dict(c.at("dictionary"));
  art.dictionary.terms = get_string_vector(dict);
  art.dictionary.document_frequency.resize(dict.u64());
  for (auto& v : art.dictionary.document_frequency) v = dict.i64();
  art.dictionary.train_documents = dict.i64();
  for (size_t i = 0; i < art.dictionary.terms.size(); ++i)
    art.dictionary.index.emplace(art.dictionary.terms[i], static_cast<int32_t>(i));

  ByteReader labels(c.at("label_names"));
  art.label_names = get_string_vector(labels);

  for (const auto& [name, matrix] :
       {std::pair<std::string, DocumentTermMatrix*>{"train", &art.train}, {"test", &art.test}}) {
    ByteReader r(c.at(name + "_matrix"));
    matrix->weights = get_sparse(r);
    matrix->labels = get_i32_vector(r);
    matrix->doc_ids = get_string_vector(r);
  }
  return art;
}

void write_term_list(const fs::path& path, const Dictionary& dict) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open term list for writing: " + path.string());
  for (const std::string& t : dict.terms) out << t << "\n";
}

}  // namespace spiketext
