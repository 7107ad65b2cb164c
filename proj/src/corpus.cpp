#include "bayespa/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace bayespa {

int Corpus::max_doc_length() const {
  int m = 0;
  for (const auto& d : docs) m = std::max(m, d.n_d);
  return m;
}

void Corpus::validate() const {
  for (size_t i = 0; i < docs.size(); ++i) {
    const auto& d = docs[i];
    if (d.n_d < 1) throw DataError("doc " + std::to_string(i) + ": empty (n_d >= 1 required)");
    int total = 0;
    std::set<int> seen;
    for (auto [w, c] : d.tokens) {
      if (w < 0 || w >= W) throw DataError("doc " + std::to_string(i) + ": word id out of range");
      if (c < 1) throw DataError("doc " + std::to_string(i) + ": count < 1");
      if (!seen.insert(w).second)
        throw DataError("doc " + std::to_string(i) + ": duplicate word id " + std::to_string(w));
      total += c;
    }
    if (total != d.n_d) throw DataError("doc " + std::to_string(i) + ": n_d mismatch");
    for (auto [task, y] : d.labels) {
      if (task < 0 || task >= int(task_names.size()))
        throw DataError("doc " + std::to_string(i) + ": unknown task id");
      if (y != 1 && y != -1) throw DataError("doc " + std::to_string(i) + ": label not in {+1,-1}");
    }
  }
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, size_t line_no, const std::string& what) {
  throw DataError(path + ":" + std::to_string(line_no) + ": " + what);
}

int parse_int(const std::string& s, bool& ok) {
  // from_chars does not accept a leading '+', but svmlight labels use one.
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  int v = 0;
  auto [p, ec] = std::from_chars(first, last, v);
  ok = (first != last && ec == std::errc() && p == last);
  return v;
}

}  // namespace

Corpus load_svmlight(const std::string& path, int max_doc_length) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  Corpus corpus;
  std::set<int> class_ids;
  std::vector<std::vector<int>> doc_classes;  // listed class ids per doc
  bool plain_binary = true;                   // every label is +1/-1

  std::string line;
  size_t line_no = 0;
  int max_word = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string label_field;
    if (!(ls >> label_field)) continue;

    std::vector<int> classes;
    std::stringstream cs(label_field);
    std::string piece;
    while (std::getline(cs, piece, ',')) {
      bool ok = false;
      int v = parse_int(piece, ok);
      if (!ok) parse_fail(path, line_no, "bad label '" + piece + "'");
      classes.push_back(v);
    }
    if (classes.empty()) parse_fail(path, line_no, "missing label");
    if (classes.size() > 1 || (classes[0] != 1 && classes[0] != -1)) plain_binary = false;

    SparseDoc doc;
    std::map<int, int> counts;
    std::string tok;
    while (ls >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos) parse_fail(path, line_no, "expected word:count, got '" + tok + "'");
      bool ok1 = false, ok2 = false;
      int w = parse_int(tok.substr(0, colon), ok1);
      int c = parse_int(tok.substr(colon + 1), ok2);
      if (!ok1 || !ok2) parse_fail(path, line_no, "malformed pair '" + tok + "'");
      if (w < 0) parse_fail(path, line_no, "negative word id");
      if (c <= 0) parse_fail(path, line_no, "count must be positive");
      counts[w] += c;
      max_word = std::max(max_word, w);
    }
    for (auto [w, c] : counts) {
      doc.tokens.emplace_back(w, c);
      doc.n_d += c;
    }
    if (doc.n_d < 1) parse_fail(path, line_no, "document has no tokens (n_d >= 1 required)");
    if (doc.n_d > max_doc_length)
      parse_fail(path, line_no, "document length " + std::to_string(doc.n_d) +
                                    " exceeds max " + std::to_string(max_doc_length));
    corpus.docs.push_back(std::move(doc));
    doc_classes.push_back(classes);
    for (int c : classes) class_ids.insert(c);
  }
  if (corpus.docs.empty()) throw DataError(path + ": no documents");
  corpus.W = max_word + 1;

  if (plain_binary) {
    corpus.task_names = {"task0"};
    for (size_t d = 0; d < corpus.docs.size(); ++d)
      corpus.docs[d].labels[0] = doc_classes[d][0];
  } else {
    // Multi-class / multi-label: one task per class id, closed world
    // (listed classes +1, everything else -1).
    std::map<int, int> class_to_task;
    for (int c : class_ids) {
      class_to_task[c] = int(corpus.task_names.size());
      corpus.task_names.push_back("class" + std::to_string(c));
    }
    for (size_t d = 0; d < corpus.docs.size(); ++d) {
      for (auto& [c, t] : class_to_task) corpus.docs[d].labels[t] = -1;
      for (int c : doc_classes[d]) corpus.docs[d].labels[class_to_task[c]] = 1;
    }
  }
  corpus.validate();
  return corpus;
}

void save_svmlight(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  const bool binary = corpus.task_names.size() == 1;
  for (const auto& doc : corpus.docs) {
    if (binary) {
      int y = doc.labels.count(0) ? doc.labels.at(0) : 1;
      out << (y > 0 ? "+1" : "-1");
    } else {
      std::string sep;
      bool any = false;
      for (auto [task, y] : doc.labels)
        if (y > 0) {
          // Task names carry the original class id ("classN").
          out << sep << corpus.task_names[task].substr(5);
          sep = ",";
          any = true;
        }
      if (!any) out << "-1";
    }
    for (auto [w, c] : doc.tokens) out << ' ' << w << ':' << c;
    out << '\n';
  }
}

Corpus load_docword(const std::string& docword_path, const std::string& label_path,
                    int max_doc_length) {
  std::ifstream in(docword_path);
  if (!in) throw DataError("cannot open " + docword_path);
  long d_count = 0, w_count = 0, nnz = 0;
  if (!(in >> d_count >> w_count >> nnz)) throw DataError(docword_path + ": bad header");
  if (d_count < 1 || w_count < 1) throw DataError(docword_path + ": empty corpus");

  std::vector<std::map<int, int>> counts(d_count);
  for (long i = 0; i < nnz; ++i) {
    long d = 0, w = 0, c = 0;
    if (!(in >> d >> w >> c)) throw DataError(docword_path + ": truncated triples");
    if (d < 1 || d > d_count || w < 1 || w > w_count || c < 1)
      throw DataError(docword_path + ": triple out of range at entry " + std::to_string(i));
    counts[d - 1][int(w - 1)] += int(c);
  }

  std::ifstream lin(label_path);
  if (!lin) throw DataError("cannot open " + label_path);
  std::vector<int> raw_labels;
  int y;
  while (lin >> y) raw_labels.push_back(y);
  if (long(raw_labels.size()) != d_count)
    throw DataError(label_path + ": expected " + std::to_string(d_count) + " labels, got " +
                    std::to_string(raw_labels.size()));

  Corpus corpus;
  corpus.W = int(w_count);
  bool plain_binary = std::all_of(raw_labels.begin(), raw_labels.end(),
                                  [](int v) { return v == 1 || v == -1; });
  std::set<int> class_ids(raw_labels.begin(), raw_labels.end());
  std::map<int, int> class_to_task;
  if (plain_binary) {
    corpus.task_names = {"task0"};
  } else {
    for (int c : class_ids) {
      class_to_task[c] = int(corpus.task_names.size());
      corpus.task_names.push_back("class" + std::to_string(c));
    }
  }
  for (long d = 0; d < d_count; ++d) {
    SparseDoc doc;
    for (auto [w, c] : counts[d]) {
      doc.tokens.emplace_back(w, c);
      doc.n_d += c;
    }
    if (doc.n_d < 1)
      throw DataError(docword_path + ": doc " + std::to_string(d + 1) + " has no tokens");
    if (doc.n_d > max_doc_length)
      throw DataError(docword_path + ": doc " + std::to_string(d + 1) + " exceeds max length");
    if (plain_binary) {
      doc.labels[0] = raw_labels[d];
    } else {
      for (auto& [c, t] : class_to_task) doc.labels[t] = (c == raw_labels[d]) ? 1 : -1;
    }
    corpus.docs.push_back(std::move(doc));
  }
  corpus.validate();
  return corpus;
}

MiniBatchStream::MiniBatchStream(const Corpus& corpus, size_t batch_size, int epochs,
                                 std::uint64_t seed)
    : corpus_(corpus), batch_size_(batch_size), epochs_(epochs), rng_(seed) {
  if (corpus.docs.empty()) throw DataError("minibatch stream over empty corpus");
  if (batch_size_ < 1) throw DataError("batch_size must be >= 1");
  perm_.resize(corpus.size());
  std::iota(perm_.begin(), perm_.end(), size_t(0));
  shuffle_epoch();
}

void MiniBatchStream::shuffle_epoch() {
  // Fisher-Yates on the shared RngStream keeps epochs reproducible.
  for (size_t i = perm_.size(); i > 1; --i) {
    size_t j = size_t(rng_.next_u64() % i);
    std::swap(perm_[i - 1], perm_[j]);
  }
  pos_ = 0;
}

std::optional<MiniBatch> MiniBatchStream::next() {
  if (epoch_ >= epochs_) return std::nullopt;
  MiniBatch b;
  b.epoch = epoch_;
  b.step = step_++;
  size_t end = std::min(pos_ + batch_size_, perm_.size());
  b.indices.assign(perm_.begin() + pos_, perm_.begin() + end);
  pos_ = end;
  if (pos_ >= perm_.size()) {
    ++epoch_;
    if (epoch_ < epochs_) shuffle_epoch();
  }
  return b;
}

}  // namespace bayespa
