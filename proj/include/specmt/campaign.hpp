#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "specmt/corpus_store.hpp"
#include "specmt/error.hpp"
#include "specmt/spec_model.hpp"

namespace specmt::campaign {

/// Error carrying a stable machine-readable code for API clients, e.g.
/// "duplicate_submission" or "span_out_of_bounds".
class ServiceError : public Error {
 public:
  ServiceError(Errc errc, std::string code, const std::string& message)
      : Error(errc, message), api_code_(std::move(code)) {}
  const std::string& api_code() const noexcept { return api_code_; }

 private:
  std::string api_code_;
};

enum class TaskKind { error_annotation, ranking };

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view s);

/// Labels A..Z for up to 26 variants.
std::string label_for(std::size_t index);

struct LabelAssignment {
  std::string label;
  std::string method_id;
};

/// Presentation order for one (campaign, doc, evaluator). The permutation is
/// a pure function of its arguments; with `shuffle` off, `methods` order is
/// kept.
std::vector<LabelAssignment> blinding_map(std::uint64_t seed, std::string_view campaign_id, std::string_view doc_id,
                                          std::string_view evaluator_id, const std::vector<std::string>& methods,
                                          bool shuffle = true);

struct CampaignConfig {
  std::string campaign_id;  // generated when empty
  TaskKind kind = TaskKind::ranking;
  std::vector<std::string> roster;
  std::uint64_t seed = 0;
  bool shuffle = true;
  bool severity_enabled = false;
  bool allow_revision = false;
  std::vector<std::string> docs;     // empty: every document
  std::vector<std::string> methods;  // empty: every registered method
};

nlohmann::json to_json(const CampaignConfig& config);
CampaignConfig config_from_json(const nlohmann::json& j);

struct Question {
  std::string id;
  std::string prompt;
};

/// Optional per-task questionnaire: Likert 1..5 and/or free text per question.
const std::vector<Question>& questionnaire();

struct TaskStatus {
  std::size_t pending = 0;
  std::size_t complete = 0;
};

struct ExportFiles {
  std::string annotations;    // error-annotation TSV with method ids
  std::string rankings;       // ranking TSV with method ids
  std::string questionnaire;  // evaluator, doc, question, likert, text
};

class Campaign;

/// Owns every campaign under one data directory, all over one corpus.
class CampaignService {
 public:
  /// Reopens campaigns found under `data_dir`. An empty path keeps
  /// everything in memory.
  CampaignService(std::filesystem::path data_dir, std::shared_ptr<const corpus::Corpus> corpus,
                  std::optional<spec::SpecDocument> spec = std::nullopt, std::uint64_t default_seed = 0);
  ~CampaignService();

  CampaignService(const CampaignService&) = delete;
  CampaignService& operator=(const CampaignService&) = delete;

  /// Returns the campaign summary (id, task count, hashes).
  nlohmann::json create_campaign(CampaignConfig config);

  /// Task payload for the evaluator's next pending task, or nullopt.
  std::optional<nlohmann::json> next_task(const std::string& campaign_id, const std::string& evaluator_id) const;

  /// Returns the acknowledgement. Resubmitting the identical payload is
  /// acknowledged again; a different payload for a completed task is
  /// rejected unless the campaign allows revisions.
  nlohmann::json submit_result(const std::string& campaign_id, const nlohmann::json& payload);

  nlohmann::json status(const std::string& campaign_id) const;
  ExportFiles export_campaign(const std::string& campaign_id) const;

  std::vector<std::string> campaign_ids() const;
  std::uint64_t default_seed() const { return default_seed_; }

 private:
  std::shared_ptr<Campaign> find(const std::string& campaign_id) const;

  std::filesystem::path data_dir_;
  std::shared_ptr<const corpus::Corpus> corpus_;
  std::optional<spec::SpecDocument> spec_;
  std::uint64_t default_seed_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Campaign>> campaigns_;
};

/// Writes export files into `dir` as annotations.tsv, rankings.tsv and
/// questionnaire.tsv.
void write_export(const ExportFiles& files, const std::filesystem::path& dir);

}  // namespace specmt::campaign
