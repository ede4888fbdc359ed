#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace specmt::ranks {

struct RankingRecord {
  std::string evaluator_id;
  std::string doc_id;
  std::map<std::string, int> ranking;  // method → rank, 1 = best

  friend bool operator==(const RankingRecord&, const RankingRecord&) = default;
};

/// Throws Error(Errc::invalid_argument) unless the ranks are exactly 1..K.
void validate_record(const RankingRecord& record);

/// `evaluator<TAB>doc<TAB>method=rank...` lines. '#' comments and blank lines
/// are skipped. A repeated (evaluator, doc) pair is an error.
std::vector<RankingRecord> parse_rankings(std::string_view content);
std::string serialize_rankings(std::span<const RankingRecord> records);

/// rank position → count.
std::map<int, std::size_t> rank_histogram(std::span<const RankingRecord> records, std::string_view method_id);

/// All records must rank the same method set.
std::map<std::string, double> mean_ranks(std::span<const RankingRecord> records);

enum class PMethod { normal_approx, exact };

struct WilcoxonOptions {
  bool continuity_correction = false;
  /// Exact enumeration is used when the nonzero-pair count is at most this.
  int exact_max = 12;
};

struct WilcoxonResult {
  double w = 0.0;  // W+, sum of ranks of positive differences
  double z = 0.0;  // signed, tie-uncorrected variance
  double p_normal = 1.0;
  double p_tie_corrected = 1.0;
  std::optional<double> p_exact;
  double p_two_sided = 1.0;  // p_exact when computed, else p_normal
  double r_effect = 0.0;     // |z| / sqrt(n_total)
  std::size_t n_pairs = 0;   // nonzero differences
  std::size_t n_total = 0;   // pairs before zero exclusion
  PMethod method = PMethod::normal_approx;
};

/// Test on per-pair differences. `n_total` defaults to the number of
/// differences.
WilcoxonResult wilcoxon_from_differences(std::span<const double> differences, const WilcoxonOptions& options = {},
                                         std::optional<std::size_t> n_total = std::nullopt);

/// Differences are rank(A) − rank(B) per record.
WilcoxonResult wilcoxon_signed_rank(std::span<const RankingRecord> records, std::string_view method_a,
                                    std::string_view method_b, const WilcoxonOptions& options = {});

/// Z for a given W+ and n without ties.
double z_from_w(double w, std::size_t n, bool continuity_correction = false);

/// Two-sided exact p by counting sign assignments whose |2S − T| reaches the
/// observed one. Ranks must be multiples of 0.5; n ≤ 62.
double exact_signed_rank_p(std::span<const double> abs_ranks, double w_plus);

double effect_size(double z, std::size_t n);

struct PairResult {
  std::string method_a;
  std::string method_b;
  WilcoxonResult result;
};

/// Every unordered pair of `methods`, in list order.
std::vector<PairResult> pairwise_wilcoxon(std::span<const RankingRecord> records,
                                          std::span<const std::string> methods, const WilcoxonOptions& options = {});

}  // namespace specmt::ranks
