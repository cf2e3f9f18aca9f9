#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ldade/corpus.hpp"

namespace ldade::io {

enum class CorpusFormat { Lines, Csv };

CorpusFormat parse_format(std::string_view name);

/// Splits RFC-4180 CSV text into records. Quoted fields may contain commas,
/// doubled quotes and newlines. Throws Error naming the line of a malformed record.
std::vector<std::vector<std::string>> parse_csv(std::string_view text,
                                                const std::string& source = "<csv>");

std::string csv_escape(std::string_view field);

std::string read_file(const std::filesystem::path& path);

/// Writes the whole body; throws Error on failure.
void write_file(const std::filesystem::path& path, std::string_view body);

/// One document per non-empty line; ids are the 1-based line numbers, zero
/// padded to a fixed width so that lexicographic and file order agree.
std::vector<RawDocument> parse_lines_corpus(std::string_view text);

/// Header row must contain `id` and `text`; `label` is optional.
std::vector<RawDocument> parse_csv_corpus(std::string_view text,
                                          const std::string& source = "<csv>");

std::vector<RawDocument> load_corpus(const std::filesystem::path& path, CorpusFormat format);

std::set<std::string, std::less<>> load_stopwords(const std::filesystem::path& path);

/// File name and body of each matrix artifact, in the order export_matrix writes them.
std::vector<std::pair<std::string, std::string>> matrix_files(const DocumentTermMatrix& matrix);

/// Writes matrix.csv (doc_index,term_index,count), terms.txt, docs.csv
/// (doc_index,id,label) and vocabulary.csv into dir.
std::vector<std::filesystem::path> export_matrix(const DocumentTermMatrix& matrix,
                                                 const std::filesystem::path& dir);

/// Reads back a directory written by export_matrix.
DocumentTermMatrix import_matrix(const std::filesystem::path& dir);

}  // namespace ldade::io
