#include "specmt/rank_stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "specmt/error.hpp"
#include "specmt/io.hpp"
#include "specmt/stats_math.hpp"
#include "specmt/text.hpp"

namespace specmt::ranks {
namespace {

constexpr std::size_t kMinNormalPairs = 6;
constexpr std::size_t kMaxExactPairs = 62;

int rank_in(const RankingRecord& record, std::string_view method) {
  const auto it = record.ranking.find(std::string(method));
  if (it == record.ranking.end()) {
    throw Error(Errc::not_found, "method '" + std::string(method) + "' is not ranked by evaluator '" +
                                     record.evaluator_id + "' on doc '" + record.doc_id + "'");
  }
  return it->second;
}

}  // namespace

void validate_record(const RankingRecord& record) {
  const auto& ranking = record.ranking;
  if (ranking.empty()) throw Error(Errc::invalid_argument, "empty ranking");
  std::vector<int> ranks;
  for (const auto& [m, r] : ranking) ranks.push_back(r);
  std::sort(ranks.begin(), ranks.end());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (ranks[i] != static_cast<int>(i + 1)) {
      throw Error(Errc::invalid_argument, "ranks of evaluator '" + record.evaluator_id + "' on doc '" +
                                              record.doc_id + "' are not a permutation of 1.." +
                                              std::to_string(ranks.size()));
    }
  }
}

std::vector<RankingRecord> parse_rankings(std::string_view content) {
  std::vector<RankingRecord> out;
  std::set<std::pair<std::string, std::string>> seen;
  const auto lines = io::lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (text::trim(lines[i]).empty() || lines[i].front() == '#') continue;
    const auto f = text::split(lines[i], '\t');
    if (f.size() < 3) throw ParseError(lineno, "", "expected evaluator, doc and at least one method=rank");
    RankingRecord r{f[0], f[1], {}};
    if (r.evaluator_id.empty()) throw ParseError(lineno, "evaluator", "empty");
    if (r.doc_id.empty()) throw ParseError(lineno, "doc", "empty");
    for (std::size_t k = 2; k < f.size(); ++k) {
      const auto eq = f[k].find('=');
      if (eq == std::string::npos || eq == 0) throw ParseError(lineno, f[k], "expected method=rank");
      const std::string method = f[k].substr(0, eq);
      const std::string_view value = std::string_view(f[k]).substr(eq + 1);
      int rank = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), rank);
      if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ParseError(lineno, method, "rank is not an integer");
      }
      if (!r.ranking.emplace(method, rank).second) throw ParseError(lineno, method, "method ranked twice");
    }
    try {
      validate_record(r);
    } catch (const Error& e) {
      throw ParseError(lineno, "ranking", e.what());
    }
    if (!seen.emplace(r.evaluator_id, r.doc_id).second) {
      throw ParseError(lineno, "", "duplicate ranking for evaluator '" + r.evaluator_id + "' and doc '" + r.doc_id + "'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string serialize_rankings(std::span<const RankingRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += r.evaluator_id + '\t' + r.doc_id;
    // Best rank first.
    std::vector<std::pair<int, std::string>> by_rank;
    for (const auto& [m, k] : r.ranking) by_rank.emplace_back(k, m);
    std::sort(by_rank.begin(), by_rank.end());
    for (const auto& [k, m] : by_rank) out += '\t' + m + '=' + std::to_string(k);
    out += '\n';
  }
  return out;
}

std::map<int, std::size_t> rank_histogram(std::span<const RankingRecord> records, std::string_view method_id) {
  if (records.empty()) throw Error(Errc::empty_input, "no ranking records");
  std::map<int, std::size_t> counts;
  for (const auto& r : records) ++counts[rank_in(r, method_id)];
  return counts;
}

std::map<std::string, double> mean_ranks(std::span<const RankingRecord> records) {
  if (records.empty()) throw Error(Errc::empty_input, "no ranking records");
  std::set<std::string> methods;
  for (const auto& [m, k] : records.front().ranking) methods.insert(m);
  std::map<std::string, long long> sums;
  for (const auto& r : records) {
    if (r.ranking.size() != methods.size() ||
        !std::all_of(r.ranking.begin(), r.ranking.end(), [&](const auto& e) { return methods.count(e.first) > 0; })) {
      throw Error(Errc::invalid_argument, "evaluator '" + r.evaluator_id + "' on doc '" + r.doc_id +
                                              "' ranks a different method set");
    }
    for (const auto& [m, k] : r.ranking) sums[m] += k;
  }
  std::map<std::string, double> out;
  for (const auto& [m, s] : sums) out[m] = static_cast<double>(s) / static_cast<double>(records.size());
  return out;
}

double z_from_w(double w, std::size_t n, bool continuity_correction) {
  if (n == 0) throw Error(Errc::invalid_argument, "no nonzero differences");
  const double nd = static_cast<double>(n);
  const double mu = nd * (nd + 1.0) / 4.0;
  const double sigma = std::sqrt(nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0);
  double num = w - mu;
  if (continuity_correction && num != 0.0) num -= num > 0 ? 0.5 : -0.5;
  return num / sigma;
}

double exact_signed_rank_p(std::span<const double> abs_ranks, double w_plus) {
  const std::size_t n = abs_ranks.size();
  if (n == 0) throw Error(Errc::invalid_argument, "no nonzero differences");
  if (n > kMaxExactPairs) throw Error(Errc::out_of_range, "exact enumeration is limited to 62 pairs");
  // Doubled ranks are integers when ties share half-integer averages.
  std::vector<std::int64_t> r2(n);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = abs_ranks[i] * 2.0;
    r2[i] = std::llround(d);
    if (std::fabs(d - static_cast<double>(r2[i])) > 1e-9) {
      throw Error(Errc::invalid_argument, "ranks must be multiples of 0.5");
    }
    total += r2[i];
  }
  const std::int64_t s_obs = std::llround(w_plus * 2.0);
  // count[s] = number of sign assignments whose positive doubled-rank sum is s.
  std::vector<std::uint64_t> count(static_cast<std::size_t>(total) + 1, 0);
  count[0] = 1;
  std::int64_t reach = 0;
  for (const auto r : r2) {
    for (std::int64_t s = reach; s >= 0; --s) {
      if (count[static_cast<std::size_t>(s)]) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
    }
    reach += r;
  }
  const std::int64_t dev = std::llabs(2 * s_obs - total);
  std::uint64_t extreme = 0;
  for (std::int64_t s = 0; s <= total; ++s) {
    if (std::llabs(2 * s - total) >= dev) extreme += count[static_cast<std::size_t>(s)];
  }
  return static_cast<double>(extreme) / std::ldexp(1.0, static_cast<int>(n));
}

double effect_size(double z, std::size_t n) {
  if (n == 0) throw Error(Errc::invalid_argument, "effect size needs N >= 1");
  return std::fabs(z) / std::sqrt(static_cast<double>(n));
}

WilcoxonResult wilcoxon_from_differences(std::span<const double> differences, const WilcoxonOptions& options,
                                         std::optional<std::size_t> n_total) {
  WilcoxonResult res;
  res.n_total = n_total.value_or(differences.size());
  std::vector<double> nonzero;
  for (const double d : differences) {
    if (d != 0.0) nonzero.push_back(d);
  }
  res.n_pairs = nonzero.size();
  if (nonzero.empty()) throw Error(Errc::invalid_argument, "all differences are zero");
  const bool exact = static_cast<int>(res.n_pairs) <= options.exact_max;
  if (res.n_pairs < kMinNormalPairs && !exact) {
    throw Error(Errc::precondition, "normal approximation needs at least 6 nonzero pairs");
  }

  std::vector<double> abs_d(nonzero.size());
  std::transform(nonzero.begin(), nonzero.end(), abs_d.begin(), [](double d) { return std::fabs(d); });
  const auto ranks = stats::average_ranks(abs_d);
  for (std::size_t i = 0; i < nonzero.size(); ++i) {
    if (nonzero[i] > 0) res.w += ranks[i];
  }

  const double n = static_cast<double>(res.n_pairs);
  res.z = z_from_w(res.w, res.n_pairs, options.continuity_correction);
  res.p_normal = stats::normal_two_sided_p(res.z);

  std::map<double, std::size_t> ties;
  for (const double a : abs_d) ++ties[a];
  double tie_term = 0.0;
  for (const auto& [v, t] : ties) {
    const double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  const double var_tie = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  res.p_tie_corrected = var_tie > 0 ? stats::normal_two_sided_p((res.w - n * (n + 1.0) / 4.0) / std::sqrt(var_tie)) : 1.0;

  res.p_two_sided = res.p_normal;
  if (exact) {
    res.p_exact = exact_signed_rank_p(ranks, res.w);
    res.p_two_sided = *res.p_exact;
    res.method = PMethod::exact;
  }
  res.r_effect = effect_size(res.z, res.n_total);
  return res;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const RankingRecord> records, std::string_view method_a,
                                    std::string_view method_b, const WilcoxonOptions& options) {
  if (method_a == method_b) throw Error(Errc::invalid_argument, "cannot compare a method with itself");
  if (records.empty()) throw Error(Errc::empty_input, "no ranking records");
  std::vector<double> d;
  d.reserve(records.size());
  for (const auto& r : records) d.push_back(static_cast<double>(rank_in(r, method_a) - rank_in(r, method_b)));
  return wilcoxon_from_differences(d, options);
}

std::vector<PairResult> pairwise_wilcoxon(std::span<const RankingRecord> records, std::span<const std::string> methods,
                                          const WilcoxonOptions& options) {
  std::vector<PairResult> out;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = i + 1; j < methods.size(); ++j) {
      out.push_back({methods[i], methods[j], wilcoxon_signed_rank(records, methods[i], methods[j], options)});
    }
  }
  return out;
}

}  // namespace specmt::ranks
