#include "specmt/corpus_store.hpp"

#include <algorithm>
#include <limits>

#include "specmt/error.hpp"
#include "specmt/hash.hpp"
#include "specmt/io.hpp"
#include "specmt/text.hpp"

namespace specmt::corpus {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kManifestHeader = "#specmt-corpus\t1";
constexpr std::string_view kMethodsHeader = "#method_id\tdisplay_name\tkind";

std::string clean_text(std::string_view content, std::string_view what) {
  if (const auto bad = text::first_invalid_utf8(content)) {
    throw Error(Errc::encoding, std::string(what) + " is not valid UTF-8 (byte offset " +
                                    std::to_string(*bad) + ")");
  }
  std::string normalized = text::normalize_line_endings(content);
  if (text::is_blank(normalized)) throw Error(Errc::empty_input, std::string(what) + " is empty");
  return normalized;
}

void require_id(std::string_view id, std::string_view what) {
  if (!is_valid_id(id)) {
    throw Error(Errc::invalid_argument, "invalid " + std::string(what) + " '" + std::string(id) + "'");
  }
}

fs::path source_path(const fs::path& dir, std::string_view doc_id) {
  return dir / "sources" / (std::string(doc_id) + ".txt");
}

fs::path variant_path(const fs::path& dir, std::string_view method_id, std::string_view doc_id) {
  return dir / "variants" / std::string(method_id) / (std::string(doc_id) + ".txt");
}

std::string methods_tsv(const std::vector<MethodProfile>& methods) {
  std::string out(kMethodsHeader);
  out += '\n';
  for (const auto& m : methods) {
    out += m.method_id + '\t' + io::tsv_escape(m.display_name) + '\t' +
           std::string(to_string(m.kind)) + '\n';
  }
  return out;
}

std::size_t parse_count(const std::string& s, std::size_t line) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw ParseError(line, "manifest", "bad count '" + s + "'");
  }
  return static_cast<std::size_t>(std::stoull(s));
}

}  // namespace

std::string_view to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::official_human: return "official-human";
    case MethodKind::raw_mt: return "raw-mt";
    case MethodKind::llm_basic: return "llm-basic";
    case MethodKind::llm_spec: return "llm-spec";
    case MethodKind::llm_pe_spec: return "llm-pe-spec";
    case MethodKind::other: return "other";
  }
  return "other";
}

MethodKind parse_method_kind(std::string_view s) {
  for (auto k : {MethodKind::official_human, MethodKind::raw_mt, MethodKind::llm_basic,
                 MethodKind::llm_spec, MethodKind::llm_pe_spec, MethodKind::other}) {
    if (to_string(k) == s) return k;
  }
  throw Error(Errc::parse, "unknown method kind '" + std::string(s) + "'");
}

std::vector<MethodProfile> default_methods() {
  return {
      {"official", "Official", MethodKind::official_human},
      {"google", "Google Translate", MethodKind::raw_mt},
      {"gpt_basic", "ChatGPT basic", MethodKind::llm_basic},
      {"gpt_spec", "ChatGPT + Spec", MethodKind::llm_spec},
      {"gpt_pe_spec", "ChatGPT PE + Spec", MethodKind::llm_pe_spec},
  };
}

bool is_valid_id(std::string_view id) {
  if (id.empty() || id.size() > 128 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.';
  });
}

const MethodProfile* Corpus::find_method(std::string_view method_id) const {
  const auto it = std::find_if(methods_.begin(), methods_.end(),
                               [&](const MethodProfile& m) { return m.method_id == method_id; });
  return it == methods_.end() ? nullptr : &*it;
}

const SourceDocument* Corpus::find_document(std::string_view doc_id) const {
  const auto it = std::find_if(documents_.begin(), documents_.end(),
                               [&](const SourceDocument& d) { return d.doc_id == doc_id; });
  return it == documents_.end() ? nullptr : &*it;
}

const TranslationVariant* Corpus::find_variant(std::string_view doc_id,
                                               std::string_view method_id) const {
  const auto it = variants_.find({std::string(doc_id), std::string(method_id)});
  return it == variants_.end() ? nullptr : &it->second;
}

std::vector<const TranslationVariant*> Corpus::variants_for(std::string_view doc_id) const {
  std::vector<const TranslationVariant*> out;
  for (const auto& m : methods_) {
    if (const auto* v = find_variant(doc_id, m.method_id)) out.push_back(v);
  }
  return out;
}

std::string Corpus::manifest() const {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& d : documents_) {
    out += "source\t" + d.doc_id + '\t' + d.language + '\t' + sha256_hex(d.text) + '\t' +
           std::to_string(d.char_count) + '\n';
  }
  for (const auto& d : documents_) {
    for (const auto* v : variants_for(d.doc_id)) {
      out += "variant\t" + v->doc_id + '\t' + v->method_id + '\t' + sha256_hex(v->text) + '\t' +
             std::to_string(v->word_count) + '\t' + io::tsv_escape(v->provenance.engine) + '\t' +
             io::tsv_escape(v->provenance.prompt_fingerprint) + '\t' +
             io::tsv_escape(v->provenance.timestamp) + '\n';
    }
  }
  return out;
}

std::string Corpus::content_hash() const {
  return sha256_hex(methods_tsv(methods_) + manifest());
}

CorpusStats corpus_stats(const Corpus& corpus) {
  if (corpus.documents().empty()) throw Error(Errc::empty_input, "corpus has no documents");
  CorpusStats stats;
  stats.doc_count = corpus.documents().size();
  stats.char_min = std::numeric_limits<std::size_t>::max();
  std::size_t total = 0;
  for (const auto& d : corpus.documents()) {
    stats.char_min = std::min(stats.char_min, d.char_count);
    stats.char_max = std::max(stats.char_max, d.char_count);
    total += d.char_count;
  }
  stats.char_mean = static_cast<double>(total) / static_cast<double>(stats.doc_count);
  for (const auto& m : corpus.methods()) stats.words_per_method[m.method_id] = 0;
  for (const auto& d : corpus.documents()) {
    for (const auto* v : corpus.variants_for(d.doc_id)) stats.words_per_method[v->method_id] += v->word_count;
  }
  return stats;
}

void export_bundle(const Corpus& corpus, const fs::path& dir) {
  for (const auto& d : corpus.documents()) {
    io::write_file_atomic(source_path(dir, d.doc_id), d.text);
    for (const auto* v : corpus.variants_for(d.doc_id)) {
      io::write_file_atomic(variant_path(dir, v->method_id, v->doc_id), v->text);
    }
  }
  io::write_file_atomic(dir / "methods.tsv", methods_tsv(corpus.methods()));
  io::write_file_atomic(dir / "manifest", corpus.manifest());
}

Corpus load_bundle(const fs::path& dir) {
  Corpus corpus;
  const auto method_lines = io::lines(io::read_file(dir / "methods.tsv"));
  for (std::size_t i = 0; i < method_lines.size(); ++i) {
    const auto& line = method_lines[i];
    if (line.empty() || line.front() == '#') continue;
    const auto f = text::split(line, '\t');
    if (f.size() != 3) throw ParseError(i + 1, "methods.tsv", "expected 3 tab-separated fields");
    MethodProfile m{f[0], io::tsv_unescape(f[1]), parse_method_kind(f[2])};
    require_id(m.method_id, "method id");
    if (corpus.find_method(m.method_id)) throw ParseError(i + 1, "methods.tsv", "duplicate method id");
    corpus.methods_.push_back(std::move(m));
  }

  const auto manifest_lines = io::lines(io::read_file(dir / "manifest"));
  for (std::size_t i = 0; i < manifest_lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const auto& line = manifest_lines[i];
    if (line.empty() || line.front() == '#') continue;
    const auto f = text::split(line, '\t');
    if (f[0] == "source" && f.size() == 5) {
      require_id(f[1], "document id");
      SourceDocument d{f[1], f[2], io::read_file(source_path(dir, f[1])), 0};
      if (sha256_hex(d.text) != f[3]) throw ParseError(lineno, "manifest", "hash mismatch for source " + f[1]);
      d.char_count = text::char_count(d.text);
      if (d.char_count != parse_count(f[4], lineno)) {
        throw ParseError(lineno, "manifest", "char_count mismatch for source " + f[1]);
      }
      if (corpus.find_document(d.doc_id)) throw ParseError(lineno, "manifest", "duplicate source " + f[1]);
      corpus.documents_.push_back(std::move(d));
    } else if (f[0] == "variant" && f.size() == 8) {
      if (!corpus.find_document(f[1])) throw ParseError(lineno, "manifest", "variant of unknown doc " + f[1]);
      if (!corpus.find_method(f[2])) throw ParseError(lineno, "manifest", "unregistered method " + f[2]);
      TranslationVariant v;
      v.doc_id = f[1];
      v.method_id = f[2];
      v.text = io::read_file(variant_path(dir, f[2], f[1]));
      if (sha256_hex(v.text) != f[3]) throw ParseError(lineno, "manifest", "hash mismatch for variant");
      v.word_count = text::word_count(v.text);
      if (v.word_count != parse_count(f[4], lineno)) {
        throw ParseError(lineno, "manifest", "word_count mismatch for " + f[1] + "/" + f[2]);
      }
      v.provenance = {io::tsv_unescape(f[5]), io::tsv_unescape(f[6]), io::tsv_unescape(f[7])};
      corpus.variants_[{v.doc_id, v.method_id}] = std::move(v);
    } else {
      throw ParseError(lineno, "manifest", "unrecognized record");
    }
  }
  return corpus;
}

CorpusStore::CorpusStore(fs::path dir, std::vector<MethodProfile> methods) : dir_(std::move(dir)) {
  if (!dir_.empty() && fs::exists(dir_ / "manifest")) {
    current_ = std::make_shared<const Corpus>(load_bundle(dir_));
    return;
  }
  auto corpus = std::make_shared<Corpus>();
  for (auto& m : methods) {
    require_id(m.method_id, "method id");
    if (corpus->find_method(m.method_id)) throw Error(Errc::duplicate, "duplicate method id " + m.method_id);
    corpus->methods_.push_back(std::move(m));
  }
  current_ = corpus;
  if (!dir_.empty()) {
    io::write_file_atomic(dir_ / "methods.tsv", methods_tsv(current_->methods()));
    io::write_file_atomic(dir_ / "manifest", current_->manifest());
  }
}

std::shared_ptr<const Corpus> CorpusStore::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return current_;
}

void CorpusStore::commit(std::shared_ptr<const Corpus> next, const std::string& journal_line,
                         const fs::path& text_file, std::string_view text) {
  if (!dir_.empty()) {
    if (!text_file.empty()) io::write_file_atomic(text_file, text);
    io::write_file_atomic(dir_ / "methods.tsv", methods_tsv(next->methods()));
    // The manifest rename is the commit point; the journal is an audit trail.
    io::write_file_atomic(dir_ / "manifest", next->manifest());
    io::append_line_durable(dir_ / "journal", journal_line);
  }
  std::lock_guard lock(snapshot_mutex_);
  current_ = std::move(next);
}

void CorpusStore::register_method(const MethodProfile& method) {
  require_id(method.method_id, "method id");
  std::lock_guard write(write_mutex_);
  const auto base = snapshot();
  if (const auto* existing = base->find_method(method.method_id)) {
    if (*existing == method) return;
    throw Error(Errc::duplicate, "method id already registered: " + method.method_id);
  }
  auto next = std::make_shared<Corpus>(*base);
  next->methods_.push_back(method);
  commit(next, "method\t" + method.method_id + '\t' + std::string(to_string(method.kind)), {}, {});
}

SourceDocument CorpusStore::ingest_document(const fs::path& file, std::string language,
                                            std::optional<std::string> doc_id) {
  return ingest_text(io::read_file(file), std::move(language), std::move(doc_id));
}

SourceDocument CorpusStore::ingest_text(std::string_view content, std::string language,
                                        std::optional<std::string> doc_id) {
  std::string normalized = clean_text(content, "source document");
  if (language.empty() || !is_valid_id(language)) {
    throw Error(Errc::invalid_argument, "invalid language tag '" + language + "'");
  }
  const std::string id =
      doc_id ? *doc_id : "doc-" + sha256_hex(language + '\n' + normalized).substr(0, 12);
  require_id(id, "document id");

  std::lock_guard write(write_mutex_);
  const auto base = snapshot();
  if (const auto* existing = base->find_document(id)) {
    if (existing->text == normalized && existing->language == language) return *existing;
    throw Error(Errc::duplicate, "document id " + id + " already holds different content");
  }
  SourceDocument doc{id, std::move(language), std::move(normalized), 0};
  doc.char_count = text::char_count(doc.text);

  auto next = std::make_shared<Corpus>(*base);
  next->documents_.push_back(doc);
  commit(next, "source\t" + id + '\t' + sha256_hex(doc.text),
         dir_.empty() ? fs::path{} : source_path(dir_, id), doc.text);
  return doc;
}

TranslationVariant CorpusStore::add_variant(const std::string& doc_id, const std::string& method_id,
                                            std::string_view text, Provenance provenance,
                                            bool allow_revision) {
  std::string normalized = clean_text(text, "translation variant");
  std::lock_guard write(write_mutex_);
  const auto base = snapshot();
  if (!base->find_document(doc_id)) throw Error(Errc::not_found, "unknown document " + doc_id);
  if (!base->find_method(method_id)) throw Error(Errc::not_found, "unregistered method " + method_id);
  const bool exists = base->find_variant(doc_id, method_id) != nullptr;
  if (exists && !allow_revision) {
    throw Error(Errc::duplicate, "variant " + doc_id + "/" + method_id +
                                     " already exists (use revision mode to replace it)");
  }
  TranslationVariant v{doc_id, method_id, std::move(normalized), 0, std::move(provenance)};
  v.word_count = text::word_count(v.text);

  auto next = std::make_shared<Corpus>(*base);
  next->variants_[{doc_id, method_id}] = v;
  commit(next, std::string(exists ? "revise" : "variant") + '\t' + doc_id + '\t' + method_id + '\t' +
                   sha256_hex(v.text),
         dir_.empty() ? fs::path{} : variant_path(dir_, method_id, doc_id), v.text);
  return v;
}

}  // namespace specmt::corpus
