// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>

#include "doctest.h"

#include "adfg/common/error.hpp"
#include "adfg/common/text_io.hpp"
#include "adfg/data/corpus.hpp"
#include "adfg/data/prompt.hpp"
#include "adfg/data/synth.hpp"
#include "adfg/data/tokenizer.hpp"

using namespace adfg;
using namespace adfg::data;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an adfg::Error");
    return ErrorKind::input;
}

fs::path temp_file(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / ("adfg_test_data_" + name);
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

std::vector<std::string> as_strings(const std::vector<std::string_view>& v) {
    return {v.begin(), v.end()};
}

}  // namespace

TEST_CASE("pre-tokenization attaches one leading space to a word") {
    CHECK(as_strings(pretokenize("Hello  world, 42!")) ==
          std::vector<std::string>{"Hello", " ", " world", ",", " 42", "!"});
    CHECK(as_strings(pretokenize("a\nb")) == std::vector<std::string>{"a", "\n", "b"});
    CHECK(pretokenize("").empty());
}

TEST_CASE("bpe training by hand") {
    // "abab" and " abab": (a,b) occurs 4 times, then (ab,ab) twice, then nothing repeats
    const Tokenizer t = Tokenizer::train({"abab abab"}, 300);
    const std::vector<std::pair<std::int32_t, std::int32_t>> want{{'a', 'b'}, {258, 258}};
    CHECK(t.merges() == want);
    CHECK(t.vocab_size() == 260);
    CHECK(t.encode("abab") == TokenIds{259});
    CHECK(t.encode("ab a") == TokenIds{258, ' ', 'a'});
    CHECK(t.piece(259) == "abab");
    // a vocabulary cap stops after the first merge
    CHECK(Tokenizer::train({"abab abab"}, 259).merges().size() == 1);
}

TEST_CASE("any byte string survives encode and decode") {
    const Tokenizer t = Tokenizer::train({"the cat sat on the mat", "the dog ran"}, 300);
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        std::string s;
        for (int i = 0; i < 40; ++i) s.push_back(static_cast<char>(rng() & 0xff));
        CHECK(t.decode(t.encode(s)) == s);
    }
    CHECK(t.decode({Tokenizer::kBos, 't', Tokenizer::kEos}) == "t");
    CHECK(kind_of([&] { (void)t.decode({t.vocab_size()}); }) == ErrorKind::decode);
}

TEST_CASE("tokenizer files round-trip and reject damage") {
    const Tokenizer t = Tokenizer::train({"the cat sat on the mat", "the cat ran"}, 280);
    const fs::path p = fs::temp_directory_path() / "adfg_test_data_tok.bpe";
    t.save(p, "# adfg 0.3.0 seed=1 manifest=abc");
    CHECK(Tokenizer::load(p) == t);
    CHECK(read_text_file(p).rfind("# adfg", 0) == 0);
    CHECK(kind_of([] { (void)Tokenizer::parse("nothing here"); }) == ErrorKind::parse);
    CHECK(kind_of([] { (void)Tokenizer::parse("# adfg-bpe v1\nbytes 256\nspecial 256 <bos>\nspecial 257 <eos>\nmerges 1\n999 1\n"); }) ==
          ErrorKind::parse);
    fs::remove(p);
}

TEST_CASE("corpus loader skips comments and incomplete records") {
    const fs::path p = temp_file("corpus.jsonl",
                                 "# header\n"
                                 "{\"article\": \"A  body\\n text\", \"summary\": \"gist\", \"id\": \"x1\"}\n"
                                 "{\"article\": \"no summary\"}\n"
                                 "{\"article\": \"empty\", \"summary\": \"\"}\n"
                                 "\n"
                                 "{\"article\": \"second\", \"summary\": \"two\"}\n");
    const Corpus c = load_corpus(p, Split::train, "toy", "news");
    REQUIRE(c.size() == 2);
    CHECK(c.skipped() == 2);
    CHECK(c[0].article == "A body text");
    CHECK(c[0].id == "x1");
    CHECK_FALSE(c[1].id.empty());
    CHECK(c[0].dataset == "toy");
    CHECK(c.stats().mean_summary_tokens == doctest::Approx(1.0));
    CHECK(c.stats().mean_article_tokens == doctest::Approx(2.0));

    const fs::path bad = temp_file("bad.jsonl", "{\"article\": \"a\", \"summary\": \"b\"}\n{oops\n");
    try {
        (void)load_corpus(bad, Split::train);
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::parse);
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
    const fs::path none = temp_file("none.jsonl", "# only a comment\n");
    CHECK(kind_of([&] { (void)load_corpus(none, Split::train); }) == ErrorKind::data);
    CHECK(kind_of([&] { (void)load_corpus(fs::temp_directory_path() / "adfg_missing.jsonl", Split::train); }) ==
          ErrorKind::data);

    const fs::path out = fs::temp_directory_path() / "adfg_test_data_saved.jsonl";
    save_corpus(out, c, "# provenance");
    CHECK(load_corpus(out, Split::train, "toy", "news") == c);
    for (const auto& f : {p, bad, none, out}) fs::remove(f);
}

TEST_CASE("selection caps, shuffles deterministically and can prefer short articles") {
    Corpus c(Split::train, "toy", "news");
    for (int i = 0; i < 10; ++i) c.add({std::string(std::size_t(10 - i), 'w'), "s", std::to_string(i), "toy", "news"});
    const Corpus a = c.select(4, 9), b = c.select(4, 9);
    CHECK(a.size() == 4);
    CHECK(a == b);
    const Corpus s = c.select(3, 0, true);
    CHECK(s[0].id == "9");
    CHECK(s[2].id == "7");
    CHECK(c.select(0, 1).size() == 10);
}

TEST_CASE("prompt layout matches the golden file") {
    PromptSpec spec;
    spec.instruction = "Condense the report.";
    spec.k = 2;
    const std::vector<Example> shots{{"first body", "first gist", "1", "", ""}, {"second body", "second gist", "2", "", ""}};
    const std::string golden = read_text_file(fs::path(ADFG_FIXTURE_DIR) / "prompt_two_shot.txt");
    CHECK(build_prompt(spec, "target body", shots) == golden);
    CHECK(kind_of([&] { (void)build_prompt(spec, "x", {}); }) == ErrorKind::input);
}

TEST_CASE("builtin prompts cover the four reference domains") {
    for (const char* d : {"medical", "scientific", "legal", "news"}) {
        const auto p = builtin_prompt(d);
        REQUIRE(p.has_value());
        CHECK_FALSE(p->instruction.empty());
        CHECK(p->k == 0);
    }
    CHECK_FALSE(builtin_prompt("poetry").has_value());
}

TEST_CASE("few-shot exemplars are seeded, distinct and never the target") {
    Corpus pool(Split::train, "toy", "news");
    for (int i = 0; i < 6; ++i) pool.add({"a" + std::to_string(i), "s", std::to_string(i), "toy", "news"});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto shots = pick_shots(pool, 5, seed, "3");
        CHECK(shots.size() == 5);
        for (const Example& e : shots) CHECK(e.id != "3");
        std::set<std::string> ids;
        for (const Example& e : shots) ids.insert(e.id);
        CHECK(ids.size() == 5);
        CHECK(pick_shots(pool, 5, seed, "3") == shots);
    }
    CHECK(kind_of([&] { (void)pick_shots(pool, 6, 0, "3"); }) == ErrorKind::data);
    Corpus held(Split::holdout, "toy", "news");
    held.add({"a", "b", "1", "toy", "news"});
    CHECK(kind_of([&] { (void)pick_shots(held, 1, 0); }) == ErrorKind::isolation);
    CHECK(kind_of([&] { require_not_holdout(held, "test"); }) == ErrorKind::isolation);
}

TEST_CASE("synthetic corpora are deterministic and their facts recoverable") {
    SynthConfig cfg;
    cfg.train_size = 30;
    cfg.validation_size = 5;
    cfg.test_size = 5;
    cfg.holdout_size = 10;
    const auto a = synth_domains(cfg), b = synth_domains(cfg);
    REQUIRE(a.size() == 3);
    for (std::size_t d = 0; d < a.size(); ++d) {
        CHECK(a[d].name == synth_domain_name(std::int32_t(d)));
        CHECK(a[d].train == b[d].train);
        CHECK(a[d].holdout == b[d].holdout);
        CHECK(a[d].holdout.split() == Split::holdout);
        for (const Example& e : a[d].train.examples()) {
            const auto facts = extract_facts(a[d].lexicon, e.article);
            REQUIRE(facts.has_value());
            CHECK(render_summary(*facts) == e.summary);
        }
    }
    cfg.seed = 8;
    CHECK_FALSE(synth_domains(cfg)[0].train == a[0].train);
    CHECK(synth_domain_name(5) == "domain5");
    cfg.domains = 1;
    CHECK(kind_of([&] { (void)synth_domains(cfg); }) == ErrorKind::config);
}
