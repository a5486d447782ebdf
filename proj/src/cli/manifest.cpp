// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/cli/manifest.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "adfg/common/error.hpp"
#include "adfg/common/text_io.hpp"

namespace adfg::cli {

namespace pt = boost::property_tree;

namespace {

using Section = std::map<std::string, std::string>;

double to_double(const std::string& where, const std::string& v) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    ADFG_REQUIRE(!v.empty() && end != v.c_str() && *end == '\0' && std::isfinite(d), ErrorKind::config,
            "manifest: " + where + ": not a number: '" + v + "'");
    return d;
}

std::int64_t to_int(const std::string& where, const std::string& v) {
    const double d = to_double(where, v);
    ADFG_REQUIRE(d == std::floor(d), ErrorKind::config, "manifest: " + where + ": expected an integer");
    return static_cast<std::int64_t>(d);
}

bool to_bool(const std::string& where, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(ErrorKind::config, "manifest: " + where + ": expected a boolean, got '" + v + "'");
}

/// Calls `apply(key, value)` for every entry; `apply` returns false for unknown keys.
template <typename F>
void each(const std::string& section, const Section& kv, F apply) {
    for (const auto& [k, v] : kv) {
        ADFG_REQUIRE(apply(k, v), ErrorKind::config, "manifest: unknown key '" + k + "' in [" + section + "]");
    }
}

}  // namespace

ExperimentManifest ExperimentManifest::load(const fs::path& path) {
    ADFG_REQUIRE(fs::exists(path), ErrorKind::data, "manifest not found: " + path.string());
    ExperimentManifest m = parse(read_text_file(path), path.parent_path());
    m.path = path;
    return m;
}

ExperimentManifest ExperimentManifest::parse(const std::string& text, const fs::path& base_dir) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        fail(ErrorKind::config, std::string("manifest: ") + e.what());
    }
    ExperimentManifest m;
    m.base_dir = base_dir;
    m.hash = fnv1a64(text);
    auto resolve = [&base_dir](const std::string& p) {
        fs::path q(p);
        return q.is_absolute() ? q : base_dir / q;
    };
    m.out = resolve("out");

    std::map<std::string, Section> sections;
    for (const auto& [name, child] : tree) {
        ADFG_REQUIRE(!child.empty() || child.data().empty(), ErrorKind::config,
                "manifest: key '" + name + "' outside a section");
        Section s;
        for (const auto& [k, v] : child) s[k] = trim(v.data());
        sections[name] = std::move(s);
    }

    for (const auto& [name, kv] : sections) {
        if (name == "experiment") {
            each(name, kv, [&](const std::string& k, const std::string& v) {
                if (k == "seed") m.seed = static_cast<std::uint64_t>(to_int(k, v));
                else if (k == "model") m.model = resolve(v);
                else if (k == "tokenizer") m.tokenizer = resolve(v);
                else if (k == "out") m.out = resolve(v);
                else if (k == "adapter_preset") m.adapter_preset = v;
                else if (k == "metrics") {
                    for (const std::string& x : split(v, ',')) {
                        if (!trim(x).empty()) m.metrics.push_back(trim(x));
                    }
                } else if (k == "threads") m.threads = static_cast<std::int32_t>(to_int(k, v));
                else if (k == "tokenizer_vocab") m.tokenizer_vocab = static_cast<std::int32_t>(to_int(k, v));
                else return false;
                return true;
            });
        } else if (name == "model") {
            auto& c = m.model_config;
            each(name, kv, [&](const std::string& k, const std::string& v) {
                const auto x = static_cast<std::int32_t>(to_int(k, v));
                if (k == "n_layers") c.n_layers = x;
                else if (k == "d_model") c.d_model = x;
                else if (k == "n_heads") c.n_heads = x;
                else if (k == "n_kv_heads") c.n_kv_heads = x;
                else if (k == "d_head") c.d_head = x;
                else if (k == "d_ff") c.d_ff = x;
                else if (k == "vocab_size") c.vocab_size = x;
                else if (k == "max_context") c.max_context = x;
                else return false;
                return true;
            });
        } else if (name == "train") {
            auto& t = m.train;
            each(name, kv, [&](const std::string& k, const std::string& v) {
                if (k == "epochs") t.epochs = static_cast<std::int32_t>(to_int(k, v));
                else if (k == "learning_rate") t.learning_rate = to_double(k, v);
                else if (k == "batch_size") t.batch_size = static_cast<std::int32_t>(to_int(k, v));
                else if (k == "max_train_samples") t.max_train_samples = to_int(k, v);
                else if (k == "max_val_samples") t.max_val_samples = to_int(k, v);
                else if (k == "context_window") t.context_window = static_cast<std::int32_t>(to_int(k, v));
                else if (k == "overflow_overlap") t.overflow_overlap = static_cast<std::int32_t>(to_int(k, v));
                else if (k == "overflow") {
                    const auto p = training::parse_overflow(v);
                    ADFG_REQUIRE(p.has_value(), ErrorKind::config, "manifest: overflow must be split or truncate");
                    t.overflow = *p;
                } else if (k == "optimizer") {
                    const auto o = training::parse_optimizer(v);
                    ADFG_REQUIRE(o.has_value(), ErrorKind::config, "manifest: optimizer must be sgd or adamw");
                    t.optimizer.kind = *o;
                } else if (k == "weight_decay") t.optimizer.weight_decay = to_double(k, v);
                else if (k == "clip_norm") t.optimizer.clip_norm = to_double(k, v);
                else return false;
                return true;
            });
        } else if (name == "pretrain") {
            auto& p = m.pretrain;
            each(name, kv, [&](const std::string& k, const std::string& v) {
                if (k == "epochs") p.epochs = static_cast<std::int32_t>(to_int(k, v));
                else if (k == "learning_rate") p.learning_rate = to_double(k, v);
                else if (k == "batch_size") p.batch_size = static_cast<std::int32_t>(to_int(k, v));
                else if (k == "context_window") p.context_window = static_cast<std::int32_t>(to_int(k, v));
                else if (k == "max_texts") p.max_texts = to_int(k, v);
                else return false;
                return true;
            });
        } else if (name == "adapter") {
            m.adapter_overrides = kv;
        } else if (name == "generation") {
            each(name, kv, [&](const std::string& k, const std::string& v) {
                if (k == "max_new_tokens") m.max_new_tokens = static_cast<std::int32_t>(to_int(k, v));
                else if (k == "perplexity") m.perplexity = to_bool(k, v);
                else return false;
                return true;
            });
        } else if (name == "adapters") {
            for (const auto& [k, v] : kv) m.adapters[k] = resolve(v);
        } else if (name.rfind("corpus.", 0) == 0) {
            CorpusEntry e;
            e.id = name.substr(7);
            ADFG_REQUIRE(!e.id.empty(), ErrorKind::config, "manifest: corpus section without an id");
            each(name, kv, [&](const std::string& k, const std::string& v) {
                if (k == "domain") e.domain = v;
                else if (k == "prompt") e.prompt = v;
                else if (const auto s = data::parse_split(k)) e.files[*s] = resolve(v);
                else return false;
                return true;
            });
            ADFG_REQUIRE(!e.domain.empty(), ErrorKind::config, "manifest: corpus '" + e.id + "' needs a domain");
            ADFG_REQUIRE(!e.files.empty(), ErrorKind::config, "manifest: corpus '" + e.id + "' lists no files");
            for (const auto& [split, p] : e.files) {
                ADFG_REQUIRE(fs::exists(p), ErrorKind::data,
                        "manifest: corpus '" + e.id + "' " + std::string(data::to_string(split)) + " file not found: " +
                            p.string());
            }
            m.corpora[e.id] = std::move(e);
        } else if (name.rfind("prompt.", 0) == 0) {
            data::PromptSpec p;
            const std::string id = name.substr(7);
            each(name, kv, [&](const std::string& k, const std::string& v) {
                if (k == "domain") p.domain = v;
                else if (k == "instruction") p.instruction = v;
                else return false;
                return true;
            });
            ADFG_REQUIRE(!p.instruction.empty(), ErrorKind::config, "manifest: prompt '" + id + "' has no instruction");
            if (p.domain.empty()) p.domain = id;
            m.prompts[id] = std::move(p);
        } else {
            fail(ErrorKind::config, "manifest: unknown section [" + name + "]");
        }
    }

    ADFG_REQUIRE(m.adapter_preset == "desk" || m.adapter_preset == "reference", ErrorKind::config,
            "manifest: adapter_preset must be desk or reference");
    m.model_config.validate();
    m.train.validate();
    m.pretrain.validate();
    ADFG_REQUIRE(m.max_new_tokens >= 1, ErrorKind::config, "manifest: max_new_tokens must be at least 1");
    for (const auto& [id, e] : m.corpora) (void)m.prompt_for(e);
    for (adapters::Method method : adapters::kAllMethods) (void)m.adapter_config(method);
    return m;
}

std::string ExperimentManifest::header() const {
    return provenance_header(seed, hash);
}

const CorpusEntry& ExperimentManifest::corpus(const std::string& id) const {
    auto it = corpora.find(id);
    if (it == corpora.end()) {
        std::string known;
        for (const auto& [k, v] : corpora) known += (known.empty() ? "" : ", ") + k;
        fail(ErrorKind::config, "unknown corpus '" + id + "'; registered: " + known);
    }
    return it->second;
}

data::Corpus ExperimentManifest::load_split(const std::string& id, data::Split split) const {
    const CorpusEntry& e = corpus(id);
    auto it = e.files.find(split);
    ADFG_REQUIRE(it != e.files.end(), ErrorKind::data,
            "corpus '" + id + "' has no " + std::string(data::to_string(split)) + " split");
    return data::load_corpus(it->second, split, id, e.domain);
}

data::PromptSpec ExperimentManifest::prompt_for(const CorpusEntry& e) const {
    const std::string name = e.prompt.empty() ? e.domain : e.prompt;
    if (auto it = prompts.find(name); it != prompts.end()) return it->second;
    if (auto b = data::builtin_prompt(name)) return *b;
    fail(ErrorKind::config, "corpus '" + e.id + "': no prompt named '" + name + "'");
}

adapters::AdapterConfig ExperimentManifest::adapter_config(adapters::Method method) const {
    const adapters::AdapterConfig base =
        adapter_preset == "reference" ? adapters::AdapterConfig::reference(method) : adapters::AdapterConfig::desk(method);
    if (adapter_overrides.empty()) return base;
    auto kv = base.to_map();
    for (const auto& [k, v] : adapter_overrides) {
        ADFG_REQUIRE(k != "method", ErrorKind::config, "manifest: [adapter] may not set the method");
        kv[k] = v;
    }
    return adapters::AdapterConfig::from_map(kv);
}

fs::path ExperimentManifest::adapter_file(const std::string& id) const {
    if (auto it = adapters.find(id); it != adapters.end()) return it->second;
    if (id.find('/') != std::string::npos || fs::path(id).extension() == ".adpt") return fs::path(id);
    return out / "adapters" / (id + ".adpt");
}

std::string ExperimentManifest::adapter_id(const std::string& dataset, adapters::Method method) {
    return dataset + "-" + std::string(adapters::to_string(method));
}

std::vector<std::string> ExperimentManifest::datasets_in(const std::string& domain) const {
    std::vector<std::string> out;
    for (const auto& [id, e] : corpora) {
        if (e.domain == domain && e.has(data::Split::train)) out.push_back(id);
    }
    return out;
}

}  // namespace adfg::cli
