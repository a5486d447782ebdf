// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 on any failure.
//   adfg_acceptance --work <dir> [--only 1,2,...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "adfg/adapters/adalora.hpp"
#include "adfg/adapters/attach.hpp"
#include "adfg/adapters/merge.hpp"
#include "adfg/adapters/param_count.hpp"
#include "adfg/adapters/state.hpp"
#include "adfg/cli/commands.hpp"
#include "adfg/common/text_io.hpp"
#include "adfg/data/synth.hpp"
#include "adfg/data/tokenizer.hpp"
#include "adfg/evalmetrics/bleu.hpp"
#include "adfg/evalmetrics/meteor.hpp"
#include "adfg/evalmetrics/report.hpp"
#include "adfg/evalmetrics/rouge.hpp"
#include "adfg/evalmetrics/tokenize.hpp"
#include "adfg/model/transformer.hpp"
#include "adfg/numerics/ops.hpp"
#include "adfg/ranking/borda.hpp"
#include "adfg/ranking/score_csv.hpp"
#include "adfg/similarity/similarity.hpp"
#include "adfg/training/train.hpp"

using namespace adfg;
using adapters::AdapterConfig;
using adapters::AdapterState;
using adapters::Method;
using model::ModelConfig;
using model::Projection;
using model::SiteId;
using numerics::Tensor;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(ADFG_DATA_DIR) / "fixtures" / "benchmark";

struct Outcome {
    bool pass = false;
    std::string detail;
    /// Numbers that must repeat across runs, with the tolerance allowed for each.
    std::vector<std::pair<double, double>> numbers;
};

void record(Outcome& o, double value, double tol) { o.numbers.emplace_back(value, tol); }

std::string fmt(double v, const char* spec = "%.3g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

template <typename T>
double largest_gap(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape()) return std::numeric_limits<double>::infinity();
    double m = 0;
    for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(double(a[i]) - double(b[i])));
    return m;
}

std::vector<std::int32_t> random_tokens(std::mt19937_64& rng, std::int32_t vocab, std::int32_t len) {
    std::uniform_int_distribution<std::int32_t> d(0, vocab - 1);
    std::vector<std::int32_t> t(static_cast<std::size_t>(len));
    for (auto& x : t) x = d(rng);
    return t;
}

/// Moves every trainable tensor away from its (often zero) initialization.
template <typename T>
void randomize(AdapterState<T>& s, std::uint64_t seed, double spread) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, spread);
    for (auto& [site, tensors] : s.sites) {
        for (auto& [name, t] : tensors) {
            if (!adapters::is_trainable_name(name)) continue;
            for (T& v : t.values()) v = static_cast<T>((name == "l" ? 1.0 : 0.0) + d(rng));
        }
    }
}

int invoke(std::vector<std::string> args, std::string* out_text = nullptr) {
    args.insert(args.begin(), "adfg");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (code != 0) std::cerr << "adfg " << args.at(1) << " failed (" << code << "): " << err.str();
    return code;
}

// ---------------------------------------------------------------- 1

Outcome params_reproduction() {
    Outcome o;
    const ModelConfig ref = ModelConfig::reference();
    const std::int64_t lora = adapters::trainable_param_count(AdapterConfig::reference(Method::lora), ref).trainable;
    const std::int64_t loha = adapters::trainable_param_count(AdapterConfig::reference(Method::loha), ref).trainable;
    const std::int64_t ada = adapters::trainable_param_count(AdapterConfig::reference(Method::adalora), ref).trainable;
    const double pct = adapters::trainable_param_count(AdapterConfig::reference(Method::lora), ref).percent;
    std::string table;
    const int code = invoke({"params", "--method", "lora,loha,adalora", "--model-config", "reference"}, &table);
    const bool printed = code == 0 && table.find("54,525,952") != std::string::npos &&
                         table.find("109,051,904") != std::string::npos &&
                         table.find("54,534,144") != std::string::npos && table.find("0.6744") != std::string::npos;
    o.pass = lora == 54525952 && loha == 109051904 && ada == 54534144 && std::round(pct * 1e4) / 1e4 == 0.6744 &&
             printed;
    o.detail = "lora " + std::to_string(lora) + ", loha " + std::to_string(loha) + ", adalora " + std::to_string(ada) +
               ", lora " + fmt(pct, "%.4f") + "%";
    return o;
}

// ---------------------------------------------------------------- 2

Outcome borda_replay() {
    Outcome o;
    const ranking::RankTable arxiv = ranking::borda_rank(ranking::parse_score_csv(read_text_file(kFixtures / "arxiv.csv")));
    const std::map<std::string, int> want{{"adalora", 4}, {"ia3", 6}, {"loha", 2}, {"lokr", 1}, {"lora", 3}, {"oft", 5}};
    bool arxiv_ok = true;
    for (const auto& [c, r] : want) arxiv_ok = arxiv_ok && arxiv.rank_of(c) == r;

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(kFixtures)) {
        const std::string n = e.path().filename().string();
        if (n != "reference.csv" && n != "zero_shot.csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    const cli::ReplayResult r = cli::replay_benchmark(files, kFixtures / "reference.csv");
    std::istringstream lines(r.text);
    for (std::string line; std::getline(lines, line);) {
        if (line.rfind("# top1", 0) == 0 && line.find("mismatch") != std::string::npos)
            std::cout << "  logged " << line.substr(2) << '\n';
    }
    o.pass = arxiv_ok && r.datasets == 14 && r.top1_matches >= 10;
    o.detail = std::string("arxiv ranks ") + (arxiv_ok ? "exact" : "differ") + ", top-1 agreement " +
               std::to_string(r.top1_matches) + "/" + std::to_string(r.datasets);
    return o;
}

// ---------------------------------------------------------------- 3

Outcome zero_at_init() {
    Outcome o;
    const ModelConfig cfg = ModelConfig::desk();
    const model::Transformer<float> base(cfg, 31);
    std::mt19937_64 rng(32);
    const auto tokens = random_tokens(rng, cfg.vocab_size, 48);
    const Tensor<float> plain = base.logits(tokens);
    double worst = 0;
    for (Method m : adapters::kAllMethods) {
        const AdapterState<float> s = adapters::init_adapter<float>(AdapterConfig::desk(m), cfg, 33);
        adapters::InferenceHooks<float> hooks(adapters::compose<float>({&s}), cfg);
        const double d = largest_gap(base.logits(tokens, &hooks), plain);
        worst = std::max(worst, d);
        record(o, d, 1e-6);
    }
    o.pass = worst <= 1e-6;
    o.detail = "max |attached - base| " + fmt(worst) + " over 6 methods";
    return o;
}

// ---------------------------------------------------------------- 4

double loss_of(const model::Transformer<double>& base, const AdapterState<double>& s,
               const std::vector<std::int32_t>& tokens, const std::vector<std::int32_t>& targets) {
    adapters::InferenceHooks<double> hooks(adapters::compose<double>({&s}), base.config());
    numerics::Graph<double> g;
    const auto logits = base.forward(g, tokens, &hooks);
    const std::vector<double> w(targets.size(), 1.0);
    return g.value(numerics::cross_entropy<double>(g, logits, targets, w, double(targets.size())))[0];
}

Outcome gradient_check() {
    Outcome o;
    ModelConfig cfg = ModelConfig::desk();
    cfg.n_layers = 2;
    const model::Transformer<double> base = model::Transformer<float>(cfg, 41).cast<double>();
    std::mt19937_64 rng(42);
    const auto seq = random_tokens(rng, cfg.vocab_size, 13);
    const std::vector<std::int32_t> tokens(seq.begin(), seq.end() - 1), targets(seq.begin() + 1, seq.end());
    const double eps = 1e-4;
    double worst = 0;
    std::int64_t checked = 0;
    std::string per_method;
    for (Method m : adapters::kAllMethods) {
        AdapterConfig ac = AdapterConfig::desk(m);
        ac.dropout = 0.0;
        ac.rank_dropout = 0.0;
        AdapterState<double> s = adapters::init_adapter<double>(ac, cfg, 43);
        randomize(s, 44, m == Method::oft ? 0.05 : 0.1);
        numerics::Graph<double> g;
        const adapters::Composite<double> comp = adapters::compose<double>({&s});
        adapters::BoundComposite<double> bound(g, comp, cfg, adapters::AttachOptions{false, 0});
        const auto logits = base.forward(g, tokens, &bound);
        const std::vector<double> w(targets.size(), 1.0);
        g.backward(numerics::cross_entropy<double>(g, logits, targets, w, double(targets.size())));

        double method_worst = 0;
        for (auto& [site, named] : s.sites) {
            for (auto& [name, t] : named) {
                if (!adapters::is_trainable_name(name)) continue;
                const Tensor<double> grad = g.grad(bound.vars(0).at(site).at(name));
                for (int k = 0; k < 2; ++k) {
                    const std::size_t i = std::uniform_int_distribution<std::size_t>(0, t.numel() - 1)(rng);
                    const double saved = t[i];
                    auto at = [&](double h) {
                        t[i] = saved + h;
                        return loss_of(base, s, tokens, targets);
                    };
                    // fourth-order central difference
                    const double fd = (8 * (at(eps) - at(-eps)) - (at(2 * eps) - at(-2 * eps))) / (12 * eps);
                    t[i] = saved;
                    const double rel = std::abs(fd - grad[i]) / std::max(1e-6, std::abs(fd) + std::abs(grad[i]));
                    method_worst = std::max(method_worst, rel);
                    record(o, grad[i], 0.0);
                    ++checked;
                }
            }
        }
        worst = std::max(worst, method_worst);
        per_method += std::string(per_method.empty() ? "" : ", ") + std::string(adapters::to_string(m)) + " " +
                      fmt(method_worst, "%.1e");
    }
    o.pass = worst <= 1e-4 && checked > 0;
    o.detail = "max relative error " + fmt(worst, "%.2e") + " over " + std::to_string(checked) + " entries (" +
               per_method + ")";
    return o;
}

// ---------------------------------------------------------------- 5 and 7

/// A small synthetic training setup on a freshly initialized desk model.
data::SynthDomain bench_domain() {
    data::SynthConfig sc;
    sc.seed = 51;
    sc.domains = 2;
    sc.train_size = 10;
    sc.validation_size = 2;
    sc.test_size = 1;
    sc.holdout_size = 1;
    return data::synth_domains(sc).front();
}

data::Tokenizer bench_tokenizer(const data::SynthDomain& d, std::int32_t vocab) {
    std::vector<std::string> texts;
    for (const auto& e : d.train.examples()) {
        texts.push_back(e.article);
        texts.push_back(e.summary);
    }
    return data::Tokenizer::train(texts, vocab);
}

struct TrainBench {
    ModelConfig cfg = ModelConfig::desk();
    data::SynthDomain domain = bench_domain();
    data::Tokenizer tokenizer = bench_tokenizer(domain, cfg.vocab_size);
    model::Transformer<float> model{cfg, 52};

    /// Batch size 1 over ten sequences for twenty epochs: 200 optimizer steps.
    training::TrainResult run(const AdapterConfig& ac, double lr) const {
        training::TrainConfig tc;
        tc.epochs = 20;
        tc.batch_size = 1;
        tc.learning_rate = lr;
        tc.seed = 53;
        return training::train_adapter(model, ac, domain.train, domain.validation, domain.prompt, tokenizer, tc);
    }
};

const TrainBench& bench() {
    static const TrainBench b;
    return b;
}

Outcome oft_orthogonality() {
    Outcome o;
    const TrainBench& b = bench();
    const training::TrainResult r = b.run(AdapterConfig::desk(Method::oft), 1e-2);
    const AdapterState<float>& s = r.state;

    double ortho = 0, moved = 0;
    std::int64_t blocks = 0;
    for (const auto& [site, named] : s.sites) {
        for (std::int64_t blk = 0; named.count("U" + std::to_string(blk)); ++blk) {
            for (float u : named.at("U" + std::to_string(blk)).values()) moved = std::max(moved, std::abs(double(u)));
            const Tensor<float> rot = adapters::oft_block_rotation(s, site, blk);
            const std::int64_t n = rot.rows();
            for (std::int64_t i = 0; i < n; ++i) {
                double row = 0;
                for (std::int64_t j = 0; j < n; ++j) {
                    double rtr = 0;
                    for (std::int64_t k = 0; k < n; ++k) rtr += double(rot(k, i)) * double(rot(k, j));
                    row += std::abs(rtr - (i == j ? 1.0 : 0.0));
                }
                ortho = std::max(ortho, row);
            }
            ++blocks;
        }
    }

    const model::Transformer<float> merged = adapters::merge_into_base(b.model, s);
    std::mt19937_64 rng(54);
    std::normal_distribution<double> d(0.0, 1.0);
    double norm_err = 0;
    for (const auto& [site, named] : s.sites) {
        const Tensor<float>& w = b.model.projection(site);
        const Tensor<float>& rw = merged.projection(site);
        for (int trial = 0; trial < 8; ++trial) {
            std::vector<double> x(static_cast<std::size_t>(w.cols()));
            for (double& v : x) v = d(rng);
            double n0 = 0, n1 = 0;
            for (std::int64_t i = 0; i < w.rows(); ++i) {
                double a = 0, c = 0;
                for (std::int64_t j = 0; j < w.cols(); ++j) {
                    a += double(w(i, j)) * x[std::size_t(j)];
                    c += double(rw(i, j)) * x[std::size_t(j)];
                }
                n0 += a * a;
                n1 += c * c;
            }
            norm_err = std::max(norm_err, std::abs(std::sqrt(n1) - std::sqrt(n0)) / std::sqrt(n0));
        }
    }
    record(o, ortho, 1e-6);
    record(o, norm_err, 1e-6);
    record(o, moved, 1e-6);
    record(o, r.report.best_val_loss(), 1e-6);
    o.pass = r.report.steps == 200 && blocks > 0 && moved > 0 && ortho <= 1e-5 && norm_err <= 1e-4;
    o.detail = std::to_string(r.report.steps) + " steps, " + std::to_string(blocks) + " blocks, max ||R^T R - I||inf " +
               fmt(ortho, "%.2e") + ", max norm change " + fmt(norm_err, "%.2e") + ", max |U| " + fmt(moved);
    return o;
}

Outcome adalora_schedule() {
    Outcome o;
    const TrainBench& b = bench();
    const AdapterConfig ac = AdapterConfig::desk(Method::adalora);
    const training::TrainResult r = b.run(ac, 5e-3);
    const std::vector<std::int64_t>& trace = r.report.budget_trace;
    const std::int64_t total = r.report.steps;
    const std::int64_t b_init = ac.adalora_initial_budget(b.cfg), b_final = ac.adalora_final_budget(b.cfg);
    bool monotone = true, warm = true;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (i > 0 && trace[i] > trace[i - 1]) monotone = false;
        // trace[i] follows optimizer step i + 1
        if (double(i + 1) < ac.adalora_warmup * double(total) && trace[i] != b_init) warm = false;
        record(o, double(trace[i]), 0.0);
    }
    record(o, r.report.best_val_loss(), 1e-6);
    const bool final_ok = !trace.empty() && trace.back() == b_final;
    o.pass = total == 200 && std::int64_t(trace.size()) == total && monotone && warm && final_ok;
    o.detail = std::to_string(total) + " steps, budget " + std::to_string(trace.empty() ? 0 : trace.front()) + " -> " +
               std::to_string(trace.empty() ? 0 : trace.back()) + " (b_init " + std::to_string(b_init) + ", b_final " +
               std::to_string(b_final) + ")" + (monotone ? ", monotone" : ", NOT monotone") +
               (warm ? "" : ", warmup violated");
    return o;
}

// ---------------------------------------------------------------- 6

Outcome merge_equivalence() {
    Outcome o;
    const ModelConfig cfg = ModelConfig::desk();
    const model::Transformer<float> base(cfg, 61);
    std::mt19937_64 rng(62);
    double worst = 0;
    std::string per_method;
    for (Method m : {Method::lora, Method::adalora, Method::loha, Method::lokr, Method::oft, Method::ia3}) {
        AdapterConfig ac = AdapterConfig::desk(m);
        if (m == Method::ia3) ac.targets = {Projection::k, Projection::v};
        AdapterState<float> s = adapters::init_adapter<float>(ac, cfg, 63);
        randomize(s, 64, m == Method::oft ? 0.05 : 0.1);
        const model::Transformer<float> merged = adapters::merge_into_base(base, s);
        adapters::InferenceHooks<float> hooks(adapters::compose<float>({&s}), cfg);
        double method_worst = 0, moved = 0;
        for (int p = 0; p < 16; ++p) {
            const auto len = std::uniform_int_distribution<std::int32_t>(4, 64)(rng);
            const auto tokens = random_tokens(rng, cfg.vocab_size, len);
            const Tensor<float> attached = base.logits(tokens, &hooks);
            method_worst = std::max(method_worst, largest_gap(attached, merged.logits(tokens)));
            moved = std::max(moved, largest_gap(attached, base.logits(tokens)));
        }
        if (moved <= 1e-4) method_worst = std::numeric_limits<double>::infinity();  // adapter had no effect
        worst = std::max(worst, method_worst);
        record(o, method_worst, 1e-6);
        per_method += std::string(per_method.empty() ? "" : ", ") + std::string(adapters::to_string(m)) + " " +
                      fmt(method_worst, "%.1e");
    }
    o.pass = worst <= 1e-4;
    o.detail = "max |merged - attached| " + fmt(worst, "%.2e") + " (" + per_method + ")";
    return o;
}

// ---------------------------------------------------------------- 8

using evalmetrics::Tokens;

Tokens words(const std::string& s) {
    Tokens t;
    std::istringstream in(s);
    for (std::string w; in >> w;) t.push_back(w);
    return t;
}

/// Clipped n-gram matches by greedy position pairing; also the n-gram totals.
double naive_matches(const Tokens& c, const Tokens& r, int n, double* c_total, double* r_total) {
    auto gram = [n](const Tokens& t, std::size_t i) { return Tokens(t.begin() + long(i), t.begin() + long(i) + n); };
    const std::size_t cn = c.size() >= std::size_t(n) ? c.size() - n + 1 : 0;
    const std::size_t rn = r.size() >= std::size_t(n) ? r.size() - n + 1 : 0;
    std::vector<bool> used(rn, false);
    double m = 0;
    for (std::size_t i = 0; i < cn; ++i) {
        for (std::size_t j = 0; j < rn; ++j) {
            if (!used[j] && gram(c, i) == gram(r, j)) {
                used[j] = true;
                ++m;
                break;
            }
        }
    }
    *c_total = double(cn);
    *r_total = double(rn);
    return m;
}

double naive_f1(double p, double r) { return p + r == 0 ? 0 : 2 * p * r / (p + r); }

/// Longest common subsequence by trying every subsequence of `a`.
double brute_lcs(const Tokens& a, const Tokens& b) {
    std::size_t best = 0;
    for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
        Tokens sub;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (mask & (1u << i)) sub.push_back(a[i]);
        std::size_t k = 0;
        for (std::size_t j = 0; j < b.size() && k < sub.size(); ++j)
            if (b[j] == sub[k]) ++k;
        if (k == sub.size()) best = std::max(best, sub.size());
    }
    return double(best);
}

/// Suffix rules of the light stemmer, written out independently: a stem keeps at least three characters.
std::string stem(const std::string& w) {
    auto strip = [&w](const std::string& suf) -> std::optional<std::string> {
        if (w.size() < 3 + suf.size() || w.compare(w.size() - suf.size(), suf.size(), suf) != 0) return std::nullopt;
        return w.substr(0, w.size() - suf.size());
    };
    if (auto s = strip("ies")) return *s + "y";
    for (const char* suf : {"ingly", "edly", "ing", "ed", "ly", "es"})
        if (auto s = strip(suf)) return *s;
    if (w.size() >= 2 && w.compare(w.size() - 2, 2, "ss") == 0) return w;
    if (auto s = strip("s")) return *s;
    return w;
}

/// Best one-to-one alignment by (exact, matches, fewest chunks) over every alignment.
double brute_meteor(const Tokens& c, const Tokens& r) {
    std::int64_t best_exact = -1, best_matches = 0, best_chunks = 0;
    std::vector<int> to(c.size(), -1);
    std::vector<bool> used(r.size(), false);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == c.size()) {
            std::int64_t exact = 0, matches = 0, chunks = 0;
            int pc = -2, pr = -2;
            for (std::size_t k = 0; k < c.size(); ++k) {
                if (to[k] < 0) continue;
                ++matches;
                if (c[k] == r[std::size_t(to[k])]) ++exact;
                if (!(int(k) == pc + 1 && to[k] == pr + 1)) ++chunks;
                pc = int(k);
                pr = to[k];
            }
            if (exact > best_exact || (exact == best_exact && matches > best_matches) ||
                (exact == best_exact && matches == best_matches && chunks < best_chunks)) {
                best_exact = exact;
                best_matches = matches;
                best_chunks = chunks;
            }
            return;
        }
        rec(i + 1);
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (used[j] || (c[i] != r[j] && stem(c[i]) != stem(r[j]))) continue;
            used[j] = true;
            to[i] = int(j);
            rec(i + 1);
            to[i] = -1;
            used[j] = false;
        }
    };
    rec(0);
    if (best_matches == 0) return 0.0;
    const double p = double(best_matches) / double(c.size());
    const double rc = double(best_matches) / double(r.size());
    const double fmean = 10 * p * rc / (rc + 9 * p);
    const double frag = double(best_chunks) / double(best_matches);
    return fmean * (1 - 0.5 * frag * frag * frag);
}

double brute_bleu(const std::vector<Tokens>& cands, const std::vector<Tokens>& refs) {
    double c_len = 0, r_len = 0, log_sum = 0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        c_len += double(cands[i].size());
        r_len += double(refs[i].size());
    }
    if (c_len == 0) return 0;
    for (int n = 1; n <= 4; ++n) {
        double m = 0, t = 0;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            double ct = 0, rt = 0;
            m += naive_matches(cands[i], refs[i], n, &ct, &rt);
            t += ct;
        }
        const double p = m > 0 ? m / t : 1.0 / (2.0 * std::max(1.0, t));
        log_sum += std::log(p) / 4.0;
    }
    const double bp = c_len < r_len ? std::exp(1 - r_len / c_len) : 1.0;
    return bp * std::exp(log_sum);
}

const std::vector<std::pair<std::string, std::string>> kMetricCases{
    {"the cat sat on the mat", "the cat sat on the mat"},
    {"the cats were running home", "a cat runs home quickly"},
    {"police arrested two men on friday", "two men were arrested by police"},
    {"the the the the", "the cat"},
    {"studies show running helps", "a study shows that runners run"},
    {"market prices jumped sharply", "prices jump in the market"},
    {"a b c d e", "e d c b a"},
    {"new vaccine trial begins", "vaccine trial results published"},
    {"court rejects the appeal of the company", "the company appeal was rejected by the court"},
    {"x", "completely different words here"},
};

Outcome metric_oracles(const std::vector<evalmetrics::MetricReport>& emitted) {
    Outcome o;
    double worst = 0;
    std::vector<std::string> cs, rs;
    std::vector<Tokens> ct, rt;
    for (const auto& [cand, ref] : kMetricCases) {
        const Tokens c = words(cand), r = words(ref);
        cs.push_back(cand);
        rs.push_back(ref);
        ct.push_back(c);
        rt.push_back(r);
        auto check = [&](double got, double want) {
            worst = std::max(worst, std::abs(got - want));
            record(o, got, 0.0);
        };
        for (int n : {1, 2}) {
            double cn = 0, rn = 0;
            const double m = naive_matches(c, r, n, &cn, &rn);
            check(evalmetrics::rouge_n(cand, ref, n).f1, naive_f1(cn > 0 ? m / cn : 0, rn > 0 ? m / rn : 0));
        }
        const double l = brute_lcs(c, r);
        check(evalmetrics::rouge_l(cand, ref).f1, naive_f1(l / double(c.size()), l / double(r.size())));
        check(evalmetrics::meteor(cand, ref), brute_meteor(c, r));
        check(evalmetrics::bleu({cand}, {ref}), brute_bleu({c}, {r}));
    }
    const double corpus = evalmetrics::bleu(cs, rs);
    worst = std::max(worst, std::abs(corpus - brute_bleu(ct, rt)));

    std::int64_t inconsistent = 0;
    for (const auto& rep : emitted) {
        const double geo = std::cbrt(rep.rouge1 * rep.rouge2 * rep.rougeL);
        if (std::abs(rep.rouge_geo - geo) > 1e-12 || !rep.rouge_geo_consistent()) ++inconsistent;
    }
    o.pass = worst <= 1e-9 && inconsistent == 0 && !emitted.empty();
    o.detail = "max oracle gap " + fmt(worst, "%.1e") + " over " + std::to_string(kMetricCases.size()) +
               " cases, rouge_geo consistent on " + std::to_string(emitted.size() - std::size_t(inconsistent)) + "/" +
               std::to_string(emitted.size()) + " emitted reports";
    return o;
}

// ---------------------------------------------------------------- 9

struct EndToEnd {
    Outcome outcome;
    std::vector<evalmetrics::MetricReport> reports;
};

EndToEnd synthetic_end_to_end(const fs::path& dir, std::int64_t holdout_limit) {
    EndToEnd e;
    Outcome& o = e.outcome;
    fs::remove_all(dir);
    data::SynthConfig sc;  // seeded, three domains, 200 training samples each
    const fs::path manifest = cli::write_synth_experiment(dir, sc);
    const std::string m = manifest.string();
    if (invoke({"prepare", "--manifest", m}) != 0) {
        o.detail = "prepare failed";
        return e;
    }
    const std::vector<data::SynthDomain> domains = data::synth_domains(sc);
    std::vector<std::string> names, adapters_ids;
    for (const auto& d : domains) {
        names.push_back(d.name);
        adapters_ids.push_back(d.train.dataset() + "-lora");
        if (invoke({"train", "--manifest", m, "--method", "lora", "--dataset", d.train.dataset()}) != 0) {
            o.detail = "training on " + d.train.dataset() + " failed";
            return e;
        }
    }

    auto evaluate = [&](const std::string& holdout, const std::vector<std::string>& ids) -> double {
        std::vector<std::string> args{"holdout", "--manifest", m, "--holdout", holdout, "--limit",
                                      std::to_string(holdout_limit)};
        std::string system = "zero-shot";
        if (ids.empty()) {
            args.push_back("--zero-shot");
        } else {
            std::string joined;
            for (const auto& id : ids) joined += (joined.empty() ? "" : ",") + id;
            args.insert(args.end(), {"--adapters", joined});
            system.clear();
            for (const auto& id : ids) system += (system.empty() ? "" : "+") + id;
        }
        if (invoke(args) != 0) return std::nan("");
        const auto reps =
            evalmetrics::parse_report_lines(read_text_file(dir / "out" / "holdout" / (holdout + "." + system + ".txt")));
        if (reps.size() != 1) return std::nan("");
        e.reports.push_back(reps.front());
        record(o, reps.front().rouge1, 1e-6);
        return reps.front().rouge1;
    };

    bool a_ok = true, c_any_nan = false;
    int c_holds = 0;
    std::string a_text, c_text;
    for (std::size_t h = 0; h < domains.size(); ++h) {
        const std::string hid = domains[h].holdout.dataset();
        const double zero = evaluate(hid, {});
        const double wid = evaluate(hid, {adapters_ids[h]});
        if (!(wid - zero >= 0.05)) a_ok = false;
        a_text += (a_text.empty() ? "" : ", ") + names[h] + " " + fmt(wid, "%.3f") + " vs " + fmt(zero, "%.3f");

        double best_pair = -1;
        for (std::size_t i = 0; i < adapters_ids.size(); ++i) {
            for (std::size_t j = i + 1; j < adapters_ids.size(); ++j)
                best_pair = std::max(best_pair, evaluate(hid, {adapters_ids[i], adapters_ids[j]}));
        }
        const double triple = evaluate(hid, adapters_ids);
        if (std::isnan(best_pair) || std::isnan(triple)) c_any_nan = true;
        if (triple <= best_pair + 0.02) ++c_holds;
        c_text += (c_text.empty() ? "" : ", ") + names[h] + " " + fmt(triple, "%.3f") + " vs " + fmt(best_pair, "%.3f");
    }

    bool b_ok = true;
    std::string b_text;
    for (std::size_t h = 0; h < domains.size(); ++h) {
        const similarity::Documents held = similarity::documents(domains[h].holdout);
        const similarity::Documents same = similarity::documents(domains[h].train);
        const double v_same = similarity::vocab_overlap(held, same), k_same = similarity::kl_divergence(held, same);
        record(o, v_same, 0.0);
        record(o, k_same, 0.0);
        double v_cross = 0, k_cross = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < domains.size(); ++t) {
            if (t == h) continue;
            const similarity::Documents other = similarity::documents(domains[t].train);
            v_cross = std::max(v_cross, similarity::vocab_overlap(held, other));
            k_cross = std::min(k_cross, similarity::kl_divergence(held, other));
        }
        if (!(v_same > v_cross && k_same < k_cross)) b_ok = false;
        b_text += (b_text.empty() ? "" : ", ") + names[h] + " overlap " + fmt(v_same, "%.1f") + ">" +
                  fmt(v_cross, "%.1f") + " kl " + fmt(k_same, "%.3f") + "<" + fmt(k_cross, "%.3f");
    }

    const bool c_ok = c_holds >= 2 && !c_any_nan;
    o.pass = a_ok && b_ok && c_ok;
    o.detail = std::string("(a) ") + (a_ok ? "ok" : "FAIL") + " [WID vs zero-shot ROUGE-1: " + a_text + "]; (b) " +
               (b_ok ? "ok" : "FAIL") + " [" + b_text + "]; (c) " + (c_ok ? "ok" : "FAIL") + " " +
               std::to_string(c_holds) + "/3 [3-adapter vs best 2-adapter: " + c_text + "]";
    return e;
}

// ---------------------------------------------------------------- runner

struct Suite {
    std::map<int, Outcome> results;
};

Suite run_suite(const fs::path& work, const std::set<int>& only, std::int64_t holdout_limit, bool verbose) {
    Suite s;
    auto timed = [&](int id, const std::function<Outcome()>& f) {
        if (!only.empty() && !only.count(id)) return;
        const auto t0 = std::chrono::steady_clock::now();
        s.results[id] = f();
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (verbose) std::cerr << "  criterion " << id << " took " << fmt(sec, "%.1f") << " s\n";
    };
    timed(1, params_reproduction);
    timed(2, borda_replay);
    timed(3, zero_at_init);
    timed(4, gradient_check);
    timed(5, oft_orthogonality);
    timed(6, merge_equivalence);
    timed(7, adalora_schedule);
    std::vector<evalmetrics::MetricReport> emitted;
    timed(9, [&] {
        EndToEnd e = synthetic_end_to_end(work / "synthetic", holdout_limit);
        emitted = std::move(e.reports);
        return e.outcome;
    });
    timed(8, [&] {
        if (emitted.empty()) {
            // criterion 9 skipped: check a few locally produced reports instead
            for (const auto& [c, r] : kMetricCases) {
                evalmetrics::MetricReport rep;
                rep.rouge1 = evalmetrics::rouge_n(c, r, 1).f1;
                rep.rouge2 = evalmetrics::rouge_n(c, r, 2).f1;
                rep.rougeL = evalmetrics::rouge_l(c, r).f1;
                rep.rouge_geo = evalmetrics::rouge_geo(rep.rouge1, rep.rouge2, rep.rougeL);
                emitted.push_back(rep);
            }
        }
        return metric_oracles(emitted);
    });
    return s;
}

const char* kNames[] = {"",
                        "parameter counts at the reference scale",
                        "borda replay of published scores",
                        "zero-at-init for every method",
                        "finite-difference gradient check",
                        "oft orthogonality after training",
                        "merged equals attached forward",
                        "adalora budget schedule",
                        "metric oracles and rouge_geo",
                        "synthetic end-to-end",
                        "determinism across reruns"};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adfg acceptance checks", "adfg_acceptance"};
    std::string work = (fs::temp_directory_path() / "adfg_acceptance").string();
    std::vector<int> only_list;
    std::int64_t holdout_limit = 40;
    app.add_option("--work", work, "Scratch directory for the synthetic experiment");
    app.add_option("--only", only_list, "Run only these criteria")->delimiter(',');
    app.add_option("--holdout-limit", holdout_limit, "Holdout examples evaluated per composition");
    CLI11_PARSE(app, argc, argv);
    const std::set<int> only(only_list.begin(), only_list.end());

    try {
        fs::create_directories(work);
        std::cerr << "first run\n";
        const Suite first = run_suite(fs::path(work) / "run1", only, holdout_limit, true);

        std::map<int, Outcome> results = first.results;
        if (only.empty() || only.count(10)) {
            std::set<int> repeat;
            for (int id = 3; id <= 9; ++id)
                if (only.empty() || only.count(id)) repeat.insert(id);
            if (!only.empty() && repeat.empty()) repeat = {3, 4, 5, 6, 7, 8, 9};
            std::cerr << "second run\n";
            const Suite second = run_suite(fs::path(work) / "run2", repeat, holdout_limit, true);
            Outcome det;
            det.pass = true;
            std::int64_t compared = 0;
            double worst = 0;
            std::string bad;
            for (int id : repeat) {
                const auto a = first.results.find(id);
                const auto b = second.results.find(id);
                const std::vector<std::pair<double, double>> none;
                const auto& na = a != first.results.end() ? a->second.numbers : none;
                const auto& nb = b->second.numbers;
                bool same = na.size() == nb.size() && !nb.empty();
                for (std::size_t i = 0; same && i < na.size(); ++i) {
                    const double gap = std::abs(na[i].first - nb[i].first);
                    const bool both_nan = std::isnan(na[i].first) && std::isnan(nb[i].first);
                    if (!both_nan && !(gap <= na[i].second)) same = false;
                    if (!both_nan && std::isfinite(gap)) worst = std::max(worst, gap);
                    ++compared;
                }
                if (!same) {
                    det.pass = false;
                    bad += " " + std::to_string(id);
                }
            }
            det.detail = std::to_string(compared) + " numbers from criteria 3-9 compared, max gap " +
                         fmt(worst, "%.1e") + (bad.empty() ? "" : ", differing:" + bad);
            results[10] = det;
        }

        bool all = true;
        for (int id = 1; id <= 10; ++id) {
            const auto it = results.find(id);
            if (it == results.end()) continue;
            all = all && it->second.pass;
            std::cout << (it->second.pass ? "PASS " : "FAIL ") << id << " " << kNames[id] << ": " << it->second.detail
                      << '\n';
        }
        return all ? 0 : 1;
    } catch (const std::exception& ex) {
        std::cout << "FAIL acceptance aborted: " << ex.what() << '\n';
        return 1;
    }
}
