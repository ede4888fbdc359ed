#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "oracles/reference_tables.hpp"
#include "oracles/signed_rank_bruteforce.hpp"
#include "specmt/error.hpp"
#include "specmt/rank_stats.hpp"

using namespace specmt;
using namespace specmt::ranks;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::io;
}

double boost_two_sided(double z) {
  return 2 * boost::math::cdf(boost::math::complement(boost::math::normal(), std::fabs(z)));
}

}  // namespace

TEST_CASE("ranking file round trip and validation") {
  const std::string text =
      "# comment\n"
      "e1\td1\tofficial=5\tgoogle=4\tgpt_basic=3\tgpt_spec=2\tgpt_pe_spec=1\n"
      "e1\td2\tofficial=1\tgoogle=2\tgpt_basic=3\tgpt_spec=4\tgpt_pe_spec=5\n";
  const auto recs = parse_rankings(text);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].ranking.at("gpt_pe_spec") == 1);
  CHECK(parse_rankings(serialize_rankings(recs)) == recs);

  CHECK(code_of([] { parse_rankings("e1\td1\ta=1\tb=1\n"); }) == Errc::parse);
  CHECK(code_of([] { parse_rankings("e1\td1\ta=1\tb=3\n"); }) == Errc::parse);
  CHECK(code_of([] { parse_rankings("e1\td1\ta=1\tb=2\ne1\td1\ta=2\tb=1\n"); }) == Errc::parse);
  CHECK(code_of([] { parse_rankings("e1\td1\ta1\n"); }) == Errc::parse);
}

TEST_CASE("histogram and mean ranks") {
  const auto recs = parse_rankings("e1\td1\ta=1\tb=2\tc=3\ne1\td2\ta=2\tb=1\tc=3\ne2\td1\ta=1\tb=3\tc=2\n");
  const auto h = rank_histogram(recs, "a");
  CHECK(h.at(1) == 2);
  CHECK(h.at(2) == 1);
  const auto m = mean_ranks(recs);
  CHECK(m.at("a") == doctest::Approx(4.0 / 3));
  CHECK(m.at("a") + m.at("b") + m.at("c") == doctest::Approx(6.0));
  CHECK(code_of([&] { rank_histogram(recs, "zzz"); }) == Errc::not_found);
  const auto mixed = parse_rankings("e1\td1\ta=1\tb=2\ne1\td2\ta=1\tc=2\n");
  CHECK(code_of([&] { mean_ranks(mixed); }) == Errc::invalid_argument);
}

TEST_CASE("z from W on the printed pairs") {
  for (const auto& row : oracle::kRankTestRows) {
    const double z = z_from_w(row.w, oracle::kRankTestN);
    CHECK(std::fabs(std::fabs(z) - row.z) <= 0.001);
    CHECK(std::fabs(effect_size(z, oracle::kRankTestN) - row.r) <= 0.001);
  }
}

TEST_CASE("normal approximation against Boost") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> d(20 + rng() % 60);
    for (auto& x : d) x = std::round(u(rng) * 2) / 2;
    WilcoxonOptions opt;
    opt.exact_max = 0;
    if (std::count_if(d.begin(), d.end(), [](double x) { return x != 0; }) < 6) continue;
    const auto r = wilcoxon_from_differences(d, opt);
    CHECK(r.p_normal == doctest::Approx(boost_two_sided(r.z)).epsilon(1e-9));
    CHECK(r.p_two_sided == r.p_normal);
    CHECK(r.method == PMethod::normal_approx);
    CHECK(r.p_tie_corrected <= r.p_normal + 1e-12);  // ties only shrink the variance
  }
}

TEST_CASE("W+ Z and r on a hand example") {
  // |d| ranks: 1 → 1, 2 → 2, 3 → 3.5 (tied), 4 → 5, ...
  const std::vector<double> d = {1, -2, 3, -3, 4, 5, 6, 0};
  WilcoxonOptions opt;
  opt.exact_max = 0;
  const auto r = wilcoxon_from_differences(d, opt);
  CHECK(r.n_pairs == 7);
  CHECK(r.n_total == 8);
  CHECK(r.w == doctest::Approx(1 + 3.5 + 5 + 6 + 7));
  const double mu = 7 * 8 / 4.0;
  const double sigma = std::sqrt(7 * 8 * 15 / 24.0);
  CHECK(r.z == doctest::Approx((r.w - mu) / sigma));
  CHECK(r.r_effect == doctest::Approx(std::fabs(r.z) / std::sqrt(8.0)));

  WilcoxonOptions cc = opt;
  cc.continuity_correction = true;
  CHECK(std::fabs(wilcoxon_from_differences(d, cc).z) < std::fabs(r.z));
}

TEST_CASE("exact p matches brute force enumeration") {
  std::mt19937_64 rng(4242);
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng() % 10;
    std::vector<double> mags(n);
    for (std::size_t k = 0; k < n; ++k) mags[k] = static_cast<double>(k + 1) + 0.25 * static_cast<double>(rng() % 3);
    std::shuffle(mags.begin(), mags.end(), rng);
    std::vector<double> d(n);
    for (std::size_t k = 0; k < n; ++k) d[k] = (rng() & 1) ? mags[k] : -mags[k];
    const auto r = wilcoxon_from_differences(d);
    REQUIRE(r.p_exact.has_value());
    CHECK(*r.p_exact == oracle::signed_rank_exact_p(d));
    CHECK(r.p_two_sided == *r.p_exact);
    CHECK(r.method == PMethod::exact);
  }
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(10));
}

TEST_CASE("exact p with tied ranks") {
  // Ranks 1.5, 1.5, 3: sign patterns of W+ in {0, 1.5, 1.5, 3, 3, 4.5, 4.5, 6}.
  const std::vector<double> ranks_half = {1.5, 1.5, 3};
  CHECK(exact_signed_rank_p(ranks_half, 6) == doctest::Approx(2.0 / 8));
  CHECK(exact_signed_rank_p(ranks_half, 3) == doctest::Approx(1.0));
}

TEST_CASE("preconditions") {
  const std::vector<double> tiny = {1, 2, -1};
  WilcoxonOptions no_exact;
  no_exact.exact_max = 0;
  CHECK(code_of([&] { wilcoxon_from_differences(tiny, no_exact); }) == Errc::precondition);
  CHECK(wilcoxon_from_differences(tiny).method == PMethod::exact);
  const std::vector<double> zeros = {0, 0, 0};
  CHECK(code_of([&] { wilcoxon_from_differences(zeros); }) == Errc::invalid_argument);
}

TEST_CASE("signed rank over ranking records") {
  std::vector<RankingRecord> recs;
  for (int i = 0; i < 10; ++i) {
    const bool flip = i % 4 == 0;
    recs.push_back({"e1", "d" + std::to_string(i), {{"a", flip ? 2 : 1}, {"b", flip ? 1 : 2}}});
  }
  const auto r = wilcoxon_signed_rank(recs, "a", "b");
  CHECK(r.n_pairs == 10);
  CHECK(r.w == doctest::Approx(3 * 5.5));  // three positive differences, all tied at |1|
  const std::vector<std::string> methods = {"a", "b"};
  const auto pairs = pairwise_wilcoxon(recs, methods);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].result.w == r.w);
}
