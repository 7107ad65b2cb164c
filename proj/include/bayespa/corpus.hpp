#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bayespa/rng.hpp"

namespace bayespa {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bag-of-words document. tokens holds (word_id, count) with distinct ids,
// counts >= 1; n_d is the total token count. labels maps task_id -> {+1,-1}.
struct SparseDoc {
  std::vector<std::pair<int, int>> tokens;
  int n_d = 0;
  std::map<int, int> labels;

  std::optional<int> label(int task) const {
    auto it = labels.find(task);
    if (it == labels.end()) return std::nullopt;
    return it->second;
  }
};

struct Corpus {
  std::vector<SparseDoc> docs;
  std::vector<std::string> vocab;  // may be empty (ids only)
  int W = 0;
  std::vector<std::string> task_names;

  size_t size() const { return docs.size(); }
  int max_doc_length() const;
  int num_tasks() const { return int(task_names.size()); }

  // Throws DataError if any doc is inconsistent with W or the invariants.
  void validate() const;
};

struct MiniBatch {
  std::vector<size_t> indices;
  int epoch = 0;
  int step = 0;
};

// Documents longer than this are rejected at ingestion; bounds the shared
// Stirling table.
constexpr int kDefaultMaxDocLength = 10000;

// svmlight-style lines: `label[,label2,...] ws (word:count)*`. Labels are
// integers mapped to tasks; a single label populates task 0. Multi-label
// lines populate one task per class id with +1 (one-vs-all style gold).
Corpus load_svmlight(const std::string& path, int max_doc_length = kDefaultMaxDocLength);

void save_svmlight(const Corpus& corpus, const std::string& path);

// UCI docword format: D\nW\nNNZ\n then `docId wordId count` triples with
// 1-based ids. Labels come from a separate file of one integer per doc.
Corpus load_docword(const std::string& docword_path, const std::string& label_path,
                    int max_doc_length = kDefaultMaxDocLength);

// Seeded epoch-permutation mini-batch stream; single consumer. Each epoch
// is one shuffled partition of all doc indices, final batch may be short.
class MiniBatchStream {
 public:
  MiniBatchStream(const Corpus& corpus, size_t batch_size, int epochs, std::uint64_t seed);

  // nullopt when the configured epochs are exhausted.
  std::optional<MiniBatch> next();

 private:
  void shuffle_epoch();

  const Corpus& corpus_;
  size_t batch_size_;
  int epochs_;
  RngStream rng_;
  std::vector<size_t> perm_;
  size_t pos_ = 0;
  int epoch_ = 0;
  int step_ = 0;
};

}  // namespace bayespa
