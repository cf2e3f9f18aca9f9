#include "ldade/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "ldade/error.hpp"

namespace ldade::io {

namespace fs = std::filesystem;

CorpusFormat parse_format(std::string_view name) {
  if (name == "lines") return CorpusFormat::Lines;
  if (name == "csv") return CorpusFormat::Csv;
  throw Error("unknown corpus format '" + std::string(name) + "' (expected lines or csv)");
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text, const std::string& source) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    // A blank line yields a single empty unquoted field; skip it.
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted)
          throw Error(source + ":" + std::to_string(line) + ": stray quote inside field");
        in_quotes = true;
        field_was_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        if (field_was_quoted)
          throw Error(source + ":" + std::to_string(line) + ": text after closing quote");
        field.push_back(c);
    }
  }
  if (in_quotes)
    throw Error(source + ":" + std::to_string(record_line) + ": unterminated quoted field");
  if (!field.empty() || !record.empty() || field_was_quoted) end_record();
  return records;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<RawDocument> parse_lines_corpus(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  const auto width = std::to_string(lines.size()).size();
  std::vector<RawDocument> docs;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string_view::npos) continue;
    std::string id = std::to_string(i + 1);
    id.insert(0, width - id.size(), '0');
    docs.push_back({std::move(id), std::string(lines[i]), std::nullopt});
  }
  return docs;
}

std::vector<RawDocument> parse_csv_corpus(std::string_view text, const std::string& source) {
  auto records = parse_csv(text, source);
  if (records.empty()) throw Error(source + ": empty CSV (header row required)");
  const auto& header = records.front();
  auto column = [&](std::string_view name) -> int {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int id_col = column("id");
  const int text_col = column("text");
  const int label_col = column("label");
  if (id_col < 0 || text_col < 0)
    throw Error(source + ":1: header must contain id and text columns");
  std::vector<RawDocument> docs;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size())
      throw Error(source + ": record " + std::to_string(r + 1) + " has " +
                  std::to_string(rec.size()) + " fields, header has " +
                  std::to_string(header.size()));
    RawDocument doc{rec[static_cast<std::size_t>(id_col)], rec[static_cast<std::size_t>(text_col)],
                    std::nullopt};
    if (label_col >= 0) doc.label = rec[static_cast<std::size_t>(label_col)];
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<RawDocument> load_corpus(const fs::path& path, CorpusFormat format) {
  if (!fs::exists(path)) throw Error("input not found: " + path.string());
  const auto body = read_file(path);
  return format == CorpusFormat::Lines ? parse_lines_corpus(body)
                                       : parse_csv_corpus(body, path.string());
}

std::set<std::string, std::less<>> load_stopwords(const fs::path& path) {
  if (!fs::exists(path)) throw Error("stopword file not found: " + path.string());
  return parse_stopwords(read_file(path));
}

std::vector<std::pair<std::string, std::string>> matrix_files(const DocumentTermMatrix& matrix) {
  std::ostringstream triplets;
  triplets << "doc_index,term_index,count\n";
  for (std::size_t d = 0; d < matrix.num_docs(); ++d)
    for (const auto& tc : matrix.rows[d]) triplets << d << ',' << tc.term << ',' << tc.count << '\n';

  std::ostringstream terms;
  for (const auto& t : matrix.vocabulary->terms) terms << t << '\n';

  std::ostringstream docs;
  docs << "doc_index,id,label\n";
  for (std::size_t d = 0; d < matrix.num_docs(); ++d) {
    docs << d << ',' << csv_escape(matrix.doc_ids[d]) << ',';
    if (matrix.has_labels()) docs << csv_escape(matrix.labels[d]);
    docs << '\n';
  }

  const auto& v = *matrix.vocabulary;
  std::ostringstream vocab;
  vocab.precision(12);
  vocab << "term,corpus_tf,doc_freq,tfidf\n";
  for (std::size_t i = 0; i < v.size(); ++i)
    vocab << v.terms[i] << ',' << v.corpus_tf[i] << ',' << v.doc_freq[i] << ',' << v.tfidf_score[i]
          << '\n';

  return {{"matrix.csv", triplets.str()},
          {"terms.txt", terms.str()},
          {"docs.csv", docs.str()},
          {"vocabulary.csv", vocab.str()}};
}

std::vector<fs::path> export_matrix(const DocumentTermMatrix& matrix, const fs::path& dir) {
  std::vector<fs::path> written;
  for (const auto& [name, body] : matrix_files(matrix)) {
    write_file(dir / name, body);
    written.push_back(dir / name);
  }
  return written;
}

namespace {

long long to_integer(const std::string& s, const std::string& where) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(where + ": expected an integer, got '" + s + "'");
  return value;
}

}  // namespace

DocumentTermMatrix import_matrix(const fs::path& dir) {
  for (const char* name : {"matrix.csv", "terms.txt", "docs.csv"})
    if (!fs::exists(dir / name)) throw Error("matrix directory lacks " + (dir / name).string());

  auto vocab = std::make_shared<Vocabulary>();
  {
    std::istringstream in(read_file(dir / "terms.txt"));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      vocab->term_index.emplace(line, static_cast<int>(vocab->terms.size()));
      vocab->terms.push_back(line);
    }
  }
  // Statistics are informational; restore them when the sidecar is present.
  const auto vocab_csv = dir / "vocabulary.csv";
  vocab->corpus_tf.assign(vocab->size(), 0);
  vocab->doc_freq.assign(vocab->size(), 0);
  vocab->tfidf_score.assign(vocab->size(), 0.0);
  if (fs::exists(vocab_csv)) {
    auto recs = parse_csv(read_file(vocab_csv), vocab_csv.string());
    for (std::size_t r = 1; r < recs.size(); ++r) {
      const int idx = vocab->index_of(recs[r].at(0));
      if (idx < 0) continue;
      vocab->corpus_tf[idx] = to_integer(recs[r].at(1), vocab_csv.string());
      vocab->doc_freq[idx] = to_integer(recs[r].at(2), vocab_csv.string());
      vocab->tfidf_score[idx] = std::stod(recs[r].at(3));
    }
  }

  DocumentTermMatrix m;
  const auto docs_path = (dir / "docs.csv").string();
  auto doc_recs = parse_csv(read_file(dir / "docs.csv"), docs_path);
  bool labeled = false;
  for (std::size_t r = 1; r < doc_recs.size(); ++r) {
    const auto& rec = doc_recs[r];
    if (rec.size() != 3) throw Error(docs_path + ": record " + std::to_string(r + 1) + " malformed");
    if (to_integer(rec[0], docs_path) != static_cast<long long>(r - 1))
      throw Error(docs_path + ": doc_index out of sequence at record " + std::to_string(r + 1));
    m.doc_ids.push_back(rec[1]);
    m.labels.push_back(rec[2]);
    labeled = labeled || !rec[2].empty();
  }
  if (!labeled) m.labels.clear();
  m.rows.resize(m.doc_ids.size());

  const auto trip_path = (dir / "matrix.csv").string();
  auto trips = parse_csv(read_file(dir / "matrix.csv"), trip_path);
  for (std::size_t r = 1; r < trips.size(); ++r) {
    const auto& rec = trips[r];
    if (rec.size() != 3) throw Error(trip_path + ": record " + std::to_string(r + 1) + " malformed");
    const auto d = to_integer(rec[0], trip_path);
    const auto t = to_integer(rec[1], trip_path);
    const auto c = to_integer(rec[2], trip_path);
    if (d < 0 || d >= static_cast<long long>(m.rows.size()))
      throw Error(trip_path + ": doc_index out of range at record " + std::to_string(r + 1));
    m.rows[static_cast<std::size_t>(d)].push_back({static_cast<int>(t), static_cast<int>(c)});
  }
  for (auto& row : m.rows) std::sort(row.begin(), row.end());
  m.vocabulary = std::move(vocab);
  m.validate();
  return m;
}

}  // namespace ldade::io
