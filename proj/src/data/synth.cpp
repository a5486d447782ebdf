// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/data/synth.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "adfg/common/error.hpp"

namespace adfg::data {

const std::vector<std::string>& synth_core_vocabulary() {
    static const std::vector<std::string> words = {
        "the",   "of",     "and",    "in",    "a",      "was",    "with",   "for",   "to",     "on",
        "by",    "at",     "from",   "is",    "were",   "this",   "that",   "after", "during", "under",
        "new",   "early",  "later",  "major", "small",  "report", "review", "group", "record", "period",
        "noted", "showed", "linked", "found", "across", "within", "several", "each", "other",  "further"};
    return words;
}

std::string synth_domain_name(std::int32_t index) {
    static const char* names[] = {"scientific", "medical", "legal", "news"};
    if (index >= 0 && index < 4) return names[index];
    return "domain" + std::to_string(index);
}

namespace {

class WordForge {
public:
    explicit WordForge(std::uint64_t seed) : rng_(seed) {
        for (const std::string& w : synth_core_vocabulary()) used_.insert(w);
        used_.insert("level");
        used_.insert("reached");
    }

    std::vector<std::string> make(std::int32_t n) {
        static const std::string consonants = "bdfgklmnprstvz";
        static const std::string vowels = "aeiou";
        std::uniform_int_distribution<int> syllables(2, 3);
        std::uniform_int_distribution<std::size_t> c(0, consonants.size() - 1), v(0, vowels.size() - 1);
        std::vector<std::string> out;
        while (static_cast<std::int32_t>(out.size()) < n) {
            std::string w;
            const int k = syllables(rng_);
            for (int i = 0; i < k; ++i) {
                w += consonants[c(rng_)];
                w += vowels[v(rng_)];
            }
            if (used_.insert(w).second) out.push_back(w);
        }
        return out;
    }

private:
    std::mt19937_64 rng_;
    std::set<std::string> used_;
};

template <typename V>
const typename V::value_type& pick(const V& v, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
    return v[d(rng)];
}

struct ArticleMaker {
    const SynthConfig& config;
    const std::vector<SynthLexicon>& lexicons;
    std::size_t domain;
    std::mt19937_64& rng;

    const std::string& filler() {
        std::bernoulli_distribution borrow(config.mixing);
        if (lexicons.size() > 1 && borrow(rng)) {
            std::uniform_int_distribution<std::size_t> other(0, lexicons.size() - 2);
            std::size_t d = other(rng);
            if (d >= domain) ++d;
            return pick(lexicons[d].fillers, rng);
        }
        return pick(lexicons[domain].fillers, rng);
    }

    std::string filler_sentence() {
        const auto& core = synth_core_vocabulary();
        std::ostringstream s;
        s << pick(core, rng) << " the " << filler() << " " << filler() << " of the " << filler() << " "
          << pick(core, rng) << " " << filler() << " .";
        return s.str();
    }

    Example make(const std::string& id) {
        const SynthLexicon& lex = lexicons[domain];
        SynthFacts f;
        f.entity = pick(lex.entities, rng);
        f.verb = pick(lex.verbs, rng);
        f.object = pick(lex.objects, rng);
        f.quantity = std::uniform_int_distribution<std::int32_t>(2, 99)(rng);
        f.unit = pick(lex.units, rng);
        f.setting = pick(lex.settings, rng);

        std::vector<std::string> sentences;
        for (std::int32_t i = 0; i < config.filler_sentences; ++i) sentences.push_back(filler_sentence());
        const std::string key_a = "the " + f.entity + " " + f.verb + " the " + f.object + " .";
        const std::string key_b =
            "the level reached " + std::to_string(f.quantity) + " " + f.unit + " in the " + f.setting + " .";
        std::uniform_int_distribution<std::size_t> pos_a(0, sentences.size());
        const std::size_t a = pos_a(rng);
        sentences.insert(sentences.begin() + static_cast<std::ptrdiff_t>(a), key_a);
        std::uniform_int_distribution<std::size_t> pos_b(a + 1, sentences.size());
        sentences.insert(sentences.begin() + static_cast<std::ptrdiff_t>(pos_b(rng)), key_b);

        Example e;
        for (const std::string& s : sentences) e.article += (e.article.empty() ? "" : " ") + s;
        e.summary = render_summary(f);
        e.id = id;
        return e;
    }
};

}  // namespace

std::string render_summary(const SynthFacts& f) {
    return f.entity + " " + f.verb + " " + f.object + " with " + std::to_string(f.quantity) + " " + f.unit + " in " +
           f.setting + " .";
}

std::optional<SynthFacts> extract_facts(const SynthLexicon& lex, const std::string& article) {
    std::vector<std::string> w;
    std::istringstream ss(article);
    for (std::string t; ss >> t;) w.push_back(t);
    auto in = [](const std::vector<std::string>& list, const std::string& x) {
        return std::find(list.begin(), list.end(), x) != list.end();
    };
    SynthFacts f;
    bool got_a = false, got_b = false;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!got_a && i + 4 < w.size() && w[i] == "the" && in(lex.entities, w[i + 1]) && in(lex.verbs, w[i + 2]) &&
            w[i + 3] == "the" && in(lex.objects, w[i + 4])) {
            f.entity = w[i + 1];
            f.verb = w[i + 2];
            f.object = w[i + 4];
            got_a = true;
        }
        if (!got_b && i + 5 < w.size() && w[i] == "reached" && in(lex.units, w[i + 2]) && w[i + 3] == "in" &&
            w[i + 4] == "the" && in(lex.settings, w[i + 5])) {
            try {
                f.quantity = std::stoi(w[i + 1]);
            } catch (const std::exception&) {
                continue;
            }
            f.unit = w[i + 2];
            f.setting = w[i + 5];
            got_b = true;
        }
    }
    if (!got_a || !got_b) return std::nullopt;
    return f;
}

std::vector<SynthDomain> synth_domains(const SynthConfig& config) {
    ADFG_REQUIRE(config.domains >= 2, ErrorKind::config, "synthetic generator needs at least two domains");
    ADFG_REQUIRE(config.mixing >= 0.0 && config.mixing <= 1.0, ErrorKind::config, "mixing must lie in [0, 1]");
    const SynthVocabSpec& v = config.vocab;
    ADFG_REQUIRE(v.entities > 0 && v.verbs > 0 && v.objects > 0 && v.units > 0 && v.settings > 0 && v.fillers > 0,
            ErrorKind::config, "every synthetic word list needs at least one entry");

    WordForge forge(config.seed);
    std::vector<SynthLexicon> lexicons;
    for (std::int32_t d = 0; d < config.domains; ++d) {
        SynthLexicon lex;
        lex.entities = forge.make(v.entities);
        lex.verbs = forge.make(v.verbs);
        lex.objects = forge.make(v.objects);
        lex.units = forge.make(v.units);
        lex.settings = forge.make(v.settings);
        lex.fillers = forge.make(v.fillers);
        lexicons.push_back(std::move(lex));
    }

    std::vector<SynthDomain> out;
    for (std::int32_t d = 0; d < config.domains; ++d) {
        SynthDomain dom;
        dom.name = synth_domain_name(d);
        dom.lexicon = lexicons[static_cast<std::size_t>(d)];
        dom.prompt.domain = dom.name;
        dom.prompt.instruction = "Summarize the " + dom.name + " article.";
        std::mt19937_64 rng(config.seed * 1000003ULL + static_cast<std::uint64_t>(d) * 7919ULL + 1);
        ArticleMaker maker{config, lexicons, static_cast<std::size_t>(d), rng};
        auto fill = [&](Corpus& c, Split split, const std::string& dataset, std::int32_t n) {
            c = Corpus(split, dataset, dom.name);
            for (std::int32_t i = 0; i < n; ++i) {
                c.add(maker.make(dataset + "-" + std::string(to_string(split)) + "-" + std::to_string(i)));
            }
        };
        const std::string base = "synth-" + dom.name;
        fill(dom.train, Split::train, base, config.train_size);
        fill(dom.validation, Split::validation, base, config.validation_size);
        fill(dom.test, Split::test, base, config.test_size);
        fill(dom.holdout, Split::holdout, base + "-holdout", config.holdout_size);
        out.push_back(std::move(dom));
    }
    return out;
}

}  // namespace adfg::data
