#pragma once

#include <Eigen/SparseCore>

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spiketext/container.hpp"

namespace spiketext {

struct CorpusDocument {
  std::string id;  // "<group>/<filename>"
  int32_t label = -1;
  std::vector<std::string> tokens;
};

// Labeled document collection with an explicit train/test split. Immutable
// after construction and safe to share across threads.
struct Corpus {
  std::vector<std::string> label_names;  // sorted; shared by both splits
  std::vector<CorpusDocument> train;
  std::vector<CorpusDocument> test;
  int64_t dropped_empty = 0;
  int64_t skipped_unreadable = 0;
};

// Directory layout. When neither split directory exists under the root, the
// root itself is treated as a single train split of <label>/<file> entries.
struct CorpusLayout {
  std::string train_dir = "20news-bydate-train";
  std::string test_dir = "20news-bydate-test";
};

// Lowercased alphabetic tokens of length >= 2, split on non-letters, with the
// built-in English stop-word list applied. Bytes outside ASCII letters act as
// separators, so arbitrary (even non-UTF-8) input is accepted.
std::vector<std::string> tokenize(std::string_view raw_text);

bool is_stop_word(std::string_view token);

// Walks the corpus tree in lexicographic path order. Documents that end up
// with no tokens are dropped (counted in dropped_empty); unreadable files are
// skipped with a warning. Throws if the root is missing or no document
// survives.
Corpus load_corpus(const std::filesystem::path& root, const CorpusLayout& layout = {});

// Term index built from the train split only. Column ids are dense 0..M-1 in
// lexicographic term order.
struct Dictionary {
  std::vector<std::string> terms;
  std::unordered_map<std::string, int32_t> index;
  std::vector<int64_t> document_frequency;
  int64_t train_documents = 0;

  int32_t size() const { return static_cast<int32_t>(terms.size()); }
  int32_t lookup(std::string_view token) const;  // -1 when absent
};

// Sparse documents x terms matrix of TF-IDF weights plus row metadata.
// Stored entries correspond to term occurrences (a stored weight may be 0
// when the term appears in every training document).
struct DocumentTermMatrix {
  SparseRowMatrix weights;
  std::vector<int32_t> labels;
  std::vector<std::string> doc_ids;

  Eigen::Index rows() const { return weights.rows(); }
  Eigen::Index cols() const { return weights.cols(); }
};

struct CorpusArtifacts {
  Dictionary dictionary;
  std::vector<std::string> label_names;
  DocumentTermMatrix train;
  DocumentTermMatrix test;
};

// TF-IDF per the classic definition: w = (term count / document length) *
// ln(train documents / document frequency). Document frequency and IDF come
// from the train split; test rows use the train dictionary and skip unseen
// tokens.
CorpusArtifacts build_tfidf(const Corpus& corpus);

// SETC container round-trip plus a plain-text term list for inspection.
void save_corpus_artifacts(const std::filesystem::path& path, const CorpusArtifacts& artifacts,
                           const std::string& meta_json = "{}");
CorpusArtifacts load_corpus_artifacts(const std::filesystem::path& path);
void write_term_list(const std::filesystem::path& path, const Dictionary& dictionary);

}  // namespace spiketext
