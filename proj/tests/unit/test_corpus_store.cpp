#include <doctest.h>

#include <thread>

#include "specmt/corpus_store.hpp"
#include "specmt/error.hpp"
#include "support.hpp"

using namespace specmt;
using namespace specmt::corpus;

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

}  // namespace

TEST_CASE("five default methods") {
  const auto m = default_methods();
  REQUIRE(m.size() == 5);
  CHECK(m[0].kind == MethodKind::official_human);
  CHECK(m[1].kind == MethodKind::raw_mt);
  CHECK(m[4].method_id == "gpt_pe_spec");
}

TEST_CASE("in-memory ingest, variants and snapshots") {
  CorpusStore store("");
  const auto before = store.snapshot();
  const auto d = store.ingest_text("企業理念\r\n第二行", "ja", "anacorp");
  CHECK(d.char_count == 8);
  CHECK(d.text == "企業理念\n第二行");
  CHECK(before->documents().empty());  // snapshots are immutable

  const auto v = store.add_variant("anacorp", "google", "Our philosophy.\nSecond line.", {"google-v3", "", ""});
  CHECK(v.word_count == 4);
  const auto snap = store.snapshot();
  CHECK(snap->find_variant("anacorp", "google")->text == "Our philosophy.\nSecond line.");
  CHECK(snap->variants_for("anacorp").size() == 1);

  // Same content under the same id is idempotent.
  CHECK(store.ingest_text("企業理念\n第二行", "ja", "anacorp") == d);
}

TEST_CASE("ingest errors") {
  CorpusStore store("");
  store.ingest_text("本文", "ja", "d1");
  CHECK(code_of([&] { store.ingest_text("", "ja"); }) == Errc::empty_input);
  CHECK(code_of([&] { store.ingest_text(" \n　", "ja"); }) == Errc::empty_input);
  CHECK(code_of([&] { store.ingest_text("\xff", "ja"); }) == Errc::encoding);
  CHECK(code_of([&] { store.ingest_text("別", "ja", "d1"); }) == Errc::duplicate);
  CHECK(code_of([&] { store.ingest_text("x", "ja", "../evil"); }) == Errc::invalid_argument);
  CHECK(code_of([&] { store.add_variant("nope", "google", "x", {}); }) == Errc::not_found);
  CHECK(code_of([&] { store.add_variant("d1", "nope", "x", {}); }) == Errc::not_found);
  store.add_variant("d1", "google", "text", {});
  CHECK(code_of([&] { store.add_variant("d1", "google", "other", {}); }) == Errc::duplicate);
  CHECK(store.add_variant("d1", "google", "other", {}, true).text == "other");
  CHECK(code_of([&] { store.register_method({"google", "dup", MethodKind::other}); }) == Errc::duplicate);
}

TEST_CASE("content-hash document ids") {
  CorpusStore store("");
  const auto a = store.ingest_text("同じ", "ja");
  const auto b = store.ingest_text("同じ", "ja");
  CHECK(a.doc_id == b.doc_id);
  CHECK(a.doc_id.rfind("doc-", 0) == 0);
  CHECK(store.ingest_text("違う", "ja").doc_id != a.doc_id);
}

TEST_CASE("directory store persists and reloads") {
  test::TempDir dir;
  std::string hash;
  {
    CorpusStore store(dir.path());
    store.register_method({"human_pe", "Human post-edit", MethodKind::other});
    store.ingest_text("一つ目", "ja", "d1");
    store.ingest_text("二つ目", "ja", "d2");
    store.add_variant("d1", "official", "First.", {"human-official", "", ""});
    store.add_variant("d1", "human_pe", "The first.", {});
    hash = store.snapshot()->content_hash();
  }
  CorpusStore reopened(dir.path());
  const auto snap = reopened.snapshot();
  CHECK(snap->content_hash() == hash);
  CHECK(snap->documents().size() == 2);
  CHECK(snap->find_method("human_pe") != nullptr);
  CHECK(snap->find_variant("d1", "human_pe")->text == "The first.");

  const auto loaded = load_bundle(dir.path());
  CHECK(loaded == *snap);
}

TEST_CASE("bundle export round-trips and detects tampering") {
  CorpusStore store("");
  store.ingest_text("原文", "ja", "d1");
  store.add_variant("d1", "gpt_spec", "Source text.", {"gpt-4o", "abc", "2026-01-01T00:00:00Z"});
  test::TempDir dir;
  export_bundle(*store.snapshot(), dir.path());
  CHECK(load_bundle(dir.path()) == *store.snapshot());

  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir.path())) {
    if (entry.is_regular_file() && entry.path().parent_path().filename() == "gpt_spec") {
      std::ofstream(entry.path(), std::ios::binary) << "Tampered.";
    }
  }
  CHECK_THROWS_AS(load_bundle(dir.path()), ParseError);
}

TEST_CASE("corpus statistics") {
  CorpusStore store("");
  CHECK(code_of([&] { corpus_stats(*store.snapshot()); }) == Errc::empty_input);
  store.ingest_text("あいう", "ja", "a");
  store.ingest_text("あいうえおか", "ja", "b");
  store.add_variant("a", "google", "one two", {});
  store.add_variant("b", "google", "three four five", {});
  const auto s = corpus_stats(*store.snapshot());
  CHECK(s.doc_count == 2);
  CHECK(s.char_min == 3);
  CHECK(s.char_max == 6);
  CHECK(s.char_mean == doctest::Approx(4.5));
  CHECK(s.words_per_method.at("google") == 5);
}

TEST_CASE("concurrent writers never lose records") {
  CorpusStore store("");
  for (int i = 0; i < 8; ++i) store.ingest_text("doc " + std::to_string(i), "ja", "d" + std::to_string(i));
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      const auto method = default_methods()[static_cast<std::size_t>(t)].method_id;
      for (int i = 0; i < 8; ++i) store.add_variant("d" + std::to_string(i), method, "text " + method, {});
    });
  }
  for (auto& t : threads) t.join();
  CHECK(store.snapshot()->variant_count() == 32);
}
