#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace specmt::corpus {

enum class MethodKind { official_human, raw_mt, llm_basic, llm_spec, llm_pe_spec, other };

std::string_view to_string(MethodKind kind);
MethodKind parse_method_kind(std::string_view s);

struct MethodProfile {
  std::string method_id;
  std::string display_name;
  MethodKind kind = MethodKind::other;

  friend bool operator==(const MethodProfile&, const MethodProfile&) = default;
};

/// The five-way method design: the published human translation, raw MT
/// output, an LLM with a minimal prompt, an LLM with the specification, and
/// an LLM post-editing the raw MT with the specification.
std::vector<MethodProfile> default_methods();

struct SourceDocument {
  std::string doc_id;
  std::string language;
  std::string text;  // LF line endings
  std::size_t char_count = 0;

  friend bool operator==(const SourceDocument&, const SourceDocument&) = default;
};

struct Provenance {
  std::string engine;  // engine name, or "human-official"
  std::string prompt_fingerprint;
  std::string timestamp;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct TranslationVariant {
  std::string doc_id;
  std::string method_id;
  std::string text;  // LF line endings
  std::size_t word_count = 0;
  Provenance provenance;

  friend bool operator==(const TranslationVariant&, const TranslationVariant&) = default;
};

/// Immutable view of a corpus. Documents keep insertion order; variants of a
/// document are listed in method registration order.
class Corpus {
 public:
  const std::vector<MethodProfile>& methods() const { return methods_; }
  const std::vector<SourceDocument>& documents() const { return documents_; }
  std::size_t variant_count() const { return variants_.size(); }

  const MethodProfile* find_method(std::string_view method_id) const;
  const SourceDocument* find_document(std::string_view doc_id) const;
  const TranslationVariant* find_variant(std::string_view doc_id, std::string_view method_id) const;
  std::vector<const TranslationVariant*> variants_for(std::string_view doc_id) const;

  /// Index text: ids, content hashes and counts for every record.
  std::string manifest() const;
  std::string content_hash() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  friend class CorpusStore;
  friend Corpus load_bundle(const std::filesystem::path& dir);

  std::vector<MethodProfile> methods_;
  std::vector<SourceDocument> documents_;
  std::map<std::pair<std::string, std::string>, TranslationVariant> variants_;
};

struct CorpusStats {
  std::size_t doc_count = 0;
  std::size_t char_min = 0;
  std::size_t char_max = 0;
  double char_mean = 0.0;
  std::map<std::string, std::size_t> words_per_method;
};

/// Throws Error(Errc::empty_input) for a corpus without documents.
CorpusStats corpus_stats(const Corpus& corpus);

/// Writes the bundle layout: sources/, variants/<method>/, methods.tsv, manifest.
void export_bundle(const Corpus& corpus, const std::filesystem::path& dir);

/// Reads a bundle, verifying hashes and recomputing counts.
Corpus load_bundle(const std::filesystem::path& dir);

/// Directory-backed corpus. Writers are serialized; readers take snapshots
/// that never observe a half-applied mutation.
class CorpusStore {
 public:
  /// Opens the bundle in `dir`, or starts an empty one registering `methods`.
  /// An empty path gives an in-memory store with no persistence.
  explicit CorpusStore(std::filesystem::path dir,
                       std::vector<MethodProfile> methods = default_methods());

  std::shared_ptr<const Corpus> snapshot() const;
  const std::filesystem::path& directory() const { return dir_; }

  void register_method(const MethodProfile& method);

  SourceDocument ingest_document(const std::filesystem::path& file, std::string language,
                                 std::optional<std::string> doc_id = std::nullopt);
  SourceDocument ingest_text(std::string_view content, std::string language,
                             std::optional<std::string> doc_id = std::nullopt);

  TranslationVariant add_variant(const std::string& doc_id, const std::string& method_id,
                                 std::string_view text, Provenance provenance,
                                 bool allow_revision = false);

 private:
  void commit(std::shared_ptr<const Corpus> next, const std::string& journal_line,
              const std::filesystem::path& text_file, std::string_view text);

  std::filesystem::path dir_;
  mutable std::mutex snapshot_mutex_;
  std::mutex write_mutex_;
  std::shared_ptr<const Corpus> current_;
};

/// True when `id` is usable as a document/method identifier and file name.
bool is_valid_id(std::string_view id);

}  // namespace specmt::corpus
