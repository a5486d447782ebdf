// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <functional>
#include <sstream>

#include "doctest.h"

#include "adfg/adapters/io.hpp"
#include "adfg/cli/commands.hpp"
#include "adfg/cli/manifest.hpp"
#include "adfg/common/error.hpp"
#include "adfg/common/text_io.hpp"

using namespace adfg;
using namespace adfg::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "adfg");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an adfg::Error");
    return ErrorKind::input;
}

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

const fs::path kFixtures = fs::path(ADFG_DATA_DIR) / "fixtures" / "benchmark";

/// Small synthetic experiment on a tiny model, built once per process.
fs::path tiny_experiment() {
    static const fs::path manifest = [] {
        const fs::path dir = fs::temp_directory_path() / "adfg_test_cli_exp";
        fs::remove_all(dir);
        const Outcome s = invoke({"synth", "--out", dir.string(), "--domains", "2", "--train-size", "12",
                               "--validation-size", "4", "--test-size", "4", "--holdout-size", "4"});
        REQUIRE(s.code == 0);
        const fs::path m = dir / "manifest.ini";
        std::string text = read_text_file(m);
        text = replace_once(text, "[train]\nepochs = 5", "[train]\nepochs = 1");
        text = replace_once(text, "[pretrain]\nepochs = 2", "[pretrain]\nepochs = 1");
        text = replace_once(text, "[generation]\nmax_new_tokens = 32", "[generation]\nmax_new_tokens = 6");
        text = replace_once(text, "[train]",
                            "[model]\nn_layers = 1\nd_model = 16\nn_heads = 2\nn_kv_heads = 1\nd_head = 8\n"
                            "d_ff = 32\nvocab_size = 300\nmax_context = 384\n\n[train]");
        write_text_file(m, text);
        REQUIRE(invoke({"prepare", "--manifest", m.string()}).code == 0);
        return m;
    }();
    return manifest;
}

}  // namespace

TEST_CASE("help and version exit cleanly") {
    CHECK(invoke({"--help"}).code == 0);
    const Outcome v = invoke({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find("0.3.0") != std::string::npos);
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
}

TEST_CASE("error kinds map to exit codes") {
    CHECK(exit_code(ErrorKind::config) == 2);
    CHECK(exit_code(ErrorKind::composition) == 2);
    CHECK(exit_code(ErrorKind::data) == 3);
    CHECK(exit_code(ErrorKind::parse) == 3);
    CHECK(exit_code(ErrorKind::numeric) == 4);
    CHECK(exit_code(ErrorKind::singularity) == 4);
}

TEST_CASE("params prints counts with separators") {
    const Outcome r = invoke({"params", "--method", "lora", "--model-config", "reference"});
    CHECK(r.code == 0);
    CHECK(r.out.find("8,030,261,248") != std::string::npos);
    CHECK(r.out.find("54,525,952") != std::string::npos);
    CHECK(r.out.find("0.6744") != std::string::npos);
    const Outcome desk = invoke({"params", "--method", "lora", "--model-config", "desk"});
    CHECK(desk.out.find("28,672") != std::string::npos);
    const Outcome bad = invoke({"params", "--method", "prefix"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("lora") != std::string::npos);
}

TEST_CASE("setting tags") {
    CHECK(setting_tag({"news", "news"}, "news") == "WID");
    CHECK(setting_tag({"legal"}, "news") == "CD");
    CHECK(setting_tag({"legal", "news"}, "news") == "mixed");
}

TEST_CASE("replaying the published tables reproduces most top-1 picks") {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(kFixtures)) {
        const std::string n = e.path().filename().string();
        if (n != "reference.csv" && n != "zero_shot.csv") files.push_back(e.path());
    }
    const ReplayResult r = replay_benchmark(files, kFixtures / "reference.csv");
    CHECK(r.datasets == 14);
    CHECK(r.top1_matches >= 10);
    CHECK(r.text.find("# top-1 agreement") != std::string::npos);
    const Outcome o = invoke({"benchmark", "--replay", kFixtures.string(), "--reference", (kFixtures / "reference.csv").string()});
    CHECK(o.code == 0);
    CHECK(o.out.find("arxiv,lokr") != std::string::npos);
}

TEST_CASE("manifest validation") {
    const fs::path dir = fs::temp_directory_path() / "adfg_test_cli_manifest";
    fs::create_directories(dir);
    write_text_file(dir / "a.jsonl", "{\"article\": \"x\", \"summary\": \"y\"}\n");
    const std::string base = "[experiment]\nseed = 1\n\n[corpus.a]\ndomain = news\ntrain = a.jsonl\n";
    const ExperimentManifest m = ExperimentManifest::parse(base, dir);
    CHECK(m.corpus("a").domain == "news");
    CHECK(m.adapter_file("a-lora") == m.out / "adapters" / "a-lora.adpt");
    CHECK(ExperimentManifest::adapter_id("a", adapters::Method::ia3) == "a-ia3");
    CHECK(m.datasets_in("news") == std::vector<std::string>{"a"});
    CHECK(m.prompt_for(m.corpus("a")).instruction == data::builtin_prompt("news")->instruction);
    CHECK(kind_of([&] { (void)m.corpus("b"); }) == ErrorKind::config);
    CHECK(kind_of([&] { (void)ExperimentManifest::parse(base + "colour = red\n", dir); }) == ErrorKind::config);
    CHECK(kind_of([&] { (void)ExperimentManifest::parse(base + "\n[mystery]\nx = 1\n", dir); }) == ErrorKind::config);
    CHECK(kind_of([&] {
              (void)ExperimentManifest::parse("[corpus.z]\ndomain = news\ntrain = missing.jsonl\n", dir);
          }) == ErrorKind::data);
    CHECK(kind_of([&] { (void)ExperimentManifest::load(dir / "nope.ini"); }) == ErrorKind::data);
    CHECK(invoke({"train", "--manifest", (dir / "nope.ini").string(), "--method", "lora", "--dataset", "a"}).code == 3);
    fs::remove_all(dir);
}

TEST_CASE("end to end on a tiny synthetic experiment") {
    const fs::path m = tiny_experiment();
    const ExperimentManifest man = ExperimentManifest::load(m);

    for (const char* method : {"lora", "ia3"}) {
        const Outcome t = invoke({"train", "--manifest", m.string(), "--method", method, "--dataset", "synth-scientific"});
        REQUIRE(t.code == 0);
    }
    const auto state = adapters::load_adapter(man.adapter_file("synth-scientific-lora"));
    CHECK(state.provenance.dataset == "synth-scientific");
    CHECK(state.provenance.domain == "scientific");
    CHECK(fs::exists(man.out / "adapters" / "synth-scientific-lora.report.txt"));

    const Outcome unknown = invoke({"train", "--manifest", m.string(), "--method", "prefix", "--dataset", "synth-scientific"});
    CHECK(unknown.code == 2);
    const Outcome held = invoke({"train", "--manifest", m.string(), "--method", "lora", "--dataset", "synth-scientific-holdout"});
    CHECK(held.code != 0);

    const auto zs = invoke({"holdout", "--manifest", m.string(), "--holdout", "synth-medical-holdout", "--zero-shot"});
    REQUIRE(zs.code == 0);
    const std::string zs_file = read_text_file(man.out / "holdout" / "synth-medical-holdout.zero-shot.txt");
    const auto empty = invoke({"holdout", "--manifest", m.string(), "--holdout", "synth-medical-holdout", "--adapters", ""});
    REQUIRE(empty.code == 0);
    CHECK(read_text_file(man.out / "holdout" / "synth-medical-holdout.zero-shot.txt") == zs_file);
    CHECK(zs.out == empty.out);

    const auto cd = invoke({"holdout", "--manifest", m.string(), "--holdout", "synth-medical-holdout", "--adapters",
                         "synth-scientific-lora"});
    REQUIRE(cd.code == 0);
    CHECK(cd.out.find("setting CD") != std::string::npos);

    const auto b1 = invoke({"benchmark", "--manifest", m.string(), "--domain", "scientific", "--methods", "lora,ia3"});
    REQUIRE(b1.code == 0);
    const std::string ranks = read_text_file(man.out / "benchmark" / "scientific" / "synth-scientific.ranks.csv");
    const auto b2 = invoke({"benchmark", "--manifest", m.string(), "--domain", "scientific", "--methods", "lora,ia3"});
    REQUIRE(b2.code == 0);
    CHECK(read_text_file(man.out / "benchmark" / "scientific" / "synth-scientific.ranks.csv") == ranks);
    const auto missing = invoke({"benchmark", "--manifest", m.string(), "--domain", "scientific", "--methods", "oft"});
    CHECK(missing.code == 3);

    const auto sim = invoke({"similarity", "--manifest", m.string(), "--pairs",
                          "synth-scientific-holdout:synth-scientific,synth-scientific-holdout:synth-medical",
                          "--no-contextual"});
    REQUIRE(sim.code == 0);
    CHECK(fs::exists(man.out / "similarity.csv"));
}
