// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/cli/commands.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "adfg/adapters/io.hpp"
#include "adfg/adapters/param_count.hpp"
#include "adfg/cli/manifest.hpp"
#include "adfg/common/text_io.hpp"
#include "adfg/data/tokenizer.hpp"
#include "adfg/evalmetrics/evaluate.hpp"
#include "adfg/model/checkpoint.hpp"
#include "adfg/ranking/score_csv.hpp"
#include "adfg/similarity/similarity.hpp"
#include "adfg/training/pretrain.hpp"
#include "adfg/training/train.hpp"

namespace adfg::cli {

using adapters::Method;
using data::Split;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::numeric:
        case ErrorKind::singularity: return 4;
        case ErrorKind::data:
        case ErrorKind::io:
        case ErrorKind::parse:
        case ErrorKind::decode: return 3;
        default: return 2;
    }
}

std::string setting_tag(const std::vector<std::string>& adapter_domains, const std::string& holdout_domain) {
    ADFG_REQUIRE(!adapter_domains.empty(), ErrorKind::input, "setting tag needs at least one adapter");
    const auto same = std::count(adapter_domains.begin(), adapter_domains.end(), holdout_domain);
    if (same == static_cast<std::ptrdiff_t>(adapter_domains.size())) return "WID";
    if (same == 0) return "CD";
    return "mixed";
}

namespace {

adapters::AdapterConfig preset_config(Method m, const std::string& preset) {
    if (preset == "reference") return adapters::AdapterConfig::reference(m);
    if (preset == "desk") return adapters::AdapterConfig::desk(m);
    fail(ErrorKind::config, "unknown preset '" + preset + "' (expected reference or desk)");
}

Method method_arg(const std::string& name) {
    const auto m = adapters::parse_method(name);
    ADFG_REQUIRE(m.has_value(), ErrorKind::config,
            "unknown method '" + name + "'; valid methods: " + adapters::valid_method_names());
    return *m;
}

std::vector<Method> methods_arg(const std::string& list) {
    if (list.empty() || list == "all") return {std::begin(adapters::kAllMethods), std::end(adapters::kAllMethods)};
    std::vector<Method> out;
    for (const std::string& s : split(list, ',')) {
        if (!trim(s).empty()) out.push_back(method_arg(trim(s)));
    }
    ADFG_REQUIRE(!out.empty(), ErrorKind::config, "no methods given");
    return out;
}

std::vector<std::string> list_arg(const std::string& list) {
    std::vector<std::string> out;
    for (const std::string& s : split(list, ',')) {
        if (!trim(s).empty()) out.push_back(trim(s));
    }
    return out;
}

}  // namespace

std::string params_table(const std::vector<Method>& methods, const model::ModelConfig& model,
                         const std::string& preset) {
    std::ostringstream s;
    const adapters::ParamCount base = adapters::trainable_param_count(preset_config(methods.front(), preset), model);
    s << "base parameters " << with_thousands(base.base) << '\n';
    s << std::left << std::setw(10) << "method" << std::right << std::setw(16) << "trainable" << std::setw(11)
      << "percent" << '\n';
    for (Method m : methods) {
        const adapters::ParamCount c = adapters::trainable_param_count(preset_config(m, preset), model);
        s << std::left << std::setw(10) << adapters::to_string(m) << std::right << std::setw(16)
          << with_thousands(c.trainable) << std::setw(10) << fixed(c.percent, 4) << "%\n";
    }
    return s.str();
}

namespace {

struct ReferenceRow {
    std::map<std::string, std::int32_t> ranks;
    std::string top1;
};

std::map<std::string, ReferenceRow> parse_reference(const std::string& text) {
    std::map<std::string, ReferenceRow> out;
    std::vector<std::string> header;
    for (const std::string& raw : split(text, '\n')) {
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const std::vector<std::string> cells = split(line, ',');
        if (header.empty()) {
            header = cells;
            ADFG_REQUIRE(header.size() >= 3 && header.front() == "dataset" && header.back() == "top1", ErrorKind::parse,
                    "reference table: header must start with 'dataset' and end with 'top1'");
            continue;
        }
        ADFG_REQUIRE(cells.size() == header.size(), ErrorKind::parse, "reference table: ragged row '" + line + "'");
        ReferenceRow row;
        row.top1 = trim(cells.back());
        for (std::size_t j = 1; j + 1 < cells.size(); ++j) {
            if (header[j] == "domain") continue;
            try {
                row.ranks[trim(header[j])] = std::stoi(cells[j]);
            } catch (const std::exception&) {
                fail(ErrorKind::parse, "reference table: bad rank '" + cells[j] + "'");
            }
        }
        out[trim(cells.front())] = std::move(row);
    }
    return out;
}

}  // namespace

ReplayResult replay_benchmark(const std::vector<fs::path>& score_files, const fs::path& reference) {
    ADFG_REQUIRE(!score_files.empty(), ErrorKind::data, "replay: no score files");
    std::map<std::string, ReferenceRow> ref;
    if (!reference.empty()) ref = parse_reference(read_text_file(reference));
    ReplayResult r;
    std::ostringstream s;
    s << "dataset,candidate,points,rank" << (ref.empty() ? "" : ",reference_rank") << '\n';
    std::ostringstream top;
    for (const fs::path& file : score_files) {
        const std::string dataset = file.stem().string();
        const ranking::RankTable table = ranking::borda_rank(ranking::parse_score_csv(read_text_file(file)));
        ++r.datasets;
        const auto rit = ref.find(dataset);
        for (const ranking::RankEntry& e : table.entries) {
            s << dataset << ',' << e.candidate << ',' << fixed(e.points, 2) << ',' << e.rank;
            if (!ref.empty()) {
                if (rit != ref.end() && rit->second.ranks.count(e.candidate)) {
                    const std::int32_t want = rit->second.ranks.at(e.candidate);
                    s << ',' << want;
                    ++r.compared;
                    if (want == e.rank) ++r.rank_matches;
                } else {
                    s << ",";
                }
            }
            s << '\n';
        }
        for (const std::string& note : table.tie_notes) s << "# " << dataset << " tie: " << note << '\n';
        if (rit != ref.end()) {
            const std::string& ours = table.entries.front().candidate;
            const bool match = ours == rit->second.top1;
            if (match) ++r.top1_matches;
            top << "# top1 " << dataset << " ours=" << ours << " reference=" << rit->second.top1 << ' '
                << (match ? "match" : "mismatch") << '\n';
        }
    }
    s << top.str();
    if (!ref.empty()) {
        s << "# top-1 agreement " << r.top1_matches << '/' << r.datasets << ", rank agreement " << r.rank_matches
          << '/' << r.compared << '\n';
    }
    r.text = s.str();
    return r;
}

std::string synth_manifest(const data::SynthConfig& config, const std::vector<data::SynthDomain>& domains) {
    std::ostringstream b;
    b << "[experiment]\n"
      << "seed = " << config.seed << '\n'
      << "model = out/base.ckpt\n"
      << "tokenizer = out/tokenizer.bpe\n"
      << "out = out\n"
      << "adapter_preset = desk\n"
      << "metrics = rouge1,rouge2,rougeL,contextual,bleu,meteor\n\n"
      << "[train]\n"
      << "epochs = 5\n"
      << "learning_rate = 0.003\n"
      << "batch_size = 8\n"
      << "optimizer = adamw\n"
      << "max_train_samples = " << config.train_size << '\n'
      << "max_val_samples = " << config.validation_size << "\n\n"
      << "[pretrain]\n"
      << "epochs = 2\n\n"
      << "[generation]\n"
      << "max_new_tokens = 32\n";
    for (const data::SynthDomain& d : domains) {
        const std::string id = d.train.dataset();
        const std::string hid = d.holdout.dataset();
        b << "\n[prompt." << id << "]\n"
          << "domain = " << d.name << '\n'
          << "instruction = " << d.prompt.instruction << '\n';
        b << "\n[corpus." << id << "]\n"
          << "domain = " << d.name << '\n'
          << "prompt = " << id << '\n'
          << "train = corpora/" << id << ".train.jsonl\n"
          << "validation = corpora/" << id << ".validation.jsonl\n"
          << "test = corpora/" << id << ".test.jsonl\n";
        b << "\n[corpus." << hid << "]\n"
          << "domain = " << d.name << '\n'
          << "prompt = " << id << '\n'
          << "holdout = corpora/" << hid << ".holdout.jsonl\n";
    }
    const std::string body = b.str();
    return provenance_header(config.seed, fnv1a64(body)) + "\n" + body;
}

fs::path write_synth_experiment(const fs::path& dir, const data::SynthConfig& config) {
    const std::vector<data::SynthDomain> domains = data::synth_domains(config);
    const std::string text = synth_manifest(config, domains);
    const std::string header = provenance_header(config.seed, fnv1a64(text));
    for (const data::SynthDomain& d : domains) {
        const std::string id = d.train.dataset();
        data::save_corpus(dir / "corpora" / (id + ".train.jsonl"), d.train, header);
        data::save_corpus(dir / "corpora" / (id + ".validation.jsonl"), d.validation, header);
        data::save_corpus(dir / "corpora" / (id + ".test.jsonl"), d.test, header);
        data::save_corpus(dir / "corpora" / (d.holdout.dataset() + ".holdout.jsonl"), d.holdout, header);
    }
    const fs::path path = dir / "manifest.ini";
    write_text_file(path, text);
    return path;
}

namespace {

const std::vector<std::string>& default_metrics() {
    static const std::vector<std::string> m = {"rouge1", "rouge2", "rougeL", "contextual", "bleu", "meteor"};
    return m;
}

std::vector<std::string> metric_selection(const ExperimentManifest& m) {
    static const std::set<std::string> known = {"rouge1", "rouge2",     "rougeL",    "rouge_geo",
                                                "bleu",   "meteor",     "perplexity", "contextual"};
    const std::vector<std::string>& sel = m.metrics.empty() ? default_metrics() : m.metrics;
    for (const std::string& name : sel) {
        ADFG_REQUIRE(known.count(name) != 0, ErrorKind::config, "unknown metric '" + name + "'");
        ADFG_REQUIRE(name != "perplexity" || m.perplexity, ErrorKind::config,
                "metric 'perplexity' needs [generation] perplexity = true");
    }
    return sel;
}

bool wants(const std::vector<std::string>& metrics, const std::string& name) {
    return std::find(metrics.begin(), metrics.end(), name) != metrics.end();
}

/// Base model and tokenizer of an experiment; checked at point of use since
/// `prepare` creates them.
struct Base {
    model::TransformerModel model;
    data::Tokenizer tokenizer;
};

Base load_base(const ExperimentManifest& m) {
    ADFG_REQUIRE(!m.model.empty() && fs::exists(m.model), ErrorKind::data,
            "base model not found: '" + m.model.string() + "' (run `adfg prepare` first)");
    ADFG_REQUIRE(!m.tokenizer.empty() && fs::exists(m.tokenizer), ErrorKind::data,
            "tokenizer not found: '" + m.tokenizer.string() + "' (run `adfg prepare` first)");
    Base b{model::load_model(m.model), data::Tokenizer::load(m.tokenizer)};
    ADFG_REQUIRE(b.tokenizer.vocab_size() <= b.model.config().vocab_size, ErrorKind::config,
            "tokenizer vocabulary (" + std::to_string(b.tokenizer.vocab_size()) + ") exceeds the model's (" +
                std::to_string(b.model.config().vocab_size) + ")");
    return b;
}

adapters::AdapterState<float> load_checked_adapter(const fs::path& path, const model::ModelConfig& model) {
    ADFG_REQUIRE(fs::exists(path), ErrorKind::data, "adapter not found: " + path.string());
    adapters::AdapterState<float> s = adapters::load_adapter(path);
    ADFG_REQUIRE(s.model_config == model, ErrorKind::config,
            "adapter " + path.string() + " was trained for a different model configuration");
    return s;
}

fs::path with_suffix(const fs::path& adapter, const std::string& suffix) {
    fs::path p = adapter;
    p.replace_extension();
    return fs::path(p.string() + suffix);
}

data::Corpus training_split(const ExperimentManifest& m, const std::string& id, Split split) {
    const CorpusEntry& e = m.corpus(id);
    if (!e.has(split)) {
        ADFG_REQUIRE(!e.has(Split::holdout), ErrorKind::isolation,
                "corpus '" + id + "' is a holdout corpus and may not be used for training");
        fail(ErrorKind::data, "corpus '" + id + "' has no " + std::string(data::to_string(split)) + " split");
    }
    data::Corpus c = m.load_split(id, split);
    data::require_not_holdout(c, "training");
    return c;
}

struct Plugins {
    std::unique_ptr<evalmetrics::ModelEmbedder> embedder;
    std::unique_ptr<evalmetrics::ContextualProxy> contextual;
    std::vector<const evalmetrics::MetricPlugin*> list;
};

Plugins make_plugins(const std::vector<std::string>& metrics, const Base& base) {
    Plugins p;
    if (wants(metrics, "contextual")) {
        p.embedder = std::make_unique<evalmetrics::ModelEmbedder>(base.model, base.tokenizer);
        p.contextual = std::make_unique<evalmetrics::ContextualProxy>(*p.embedder);
        p.list.push_back(p.contextual.get());
    }
    return p;
}

evalmetrics::GenerationConfig generation(const ExperimentManifest& m) {
    evalmetrics::GenerationConfig g;
    g.max_new_tokens = m.max_new_tokens;
    g.seed = m.seed;
    g.perplexity = m.perplexity;
    g.threads = m.threads;
    return g;
}

ranking::ScoreMatrix score_matrix(const std::vector<std::string>& candidates,
                                  const std::vector<evalmetrics::MetricReport>& reports,
                                  const std::vector<std::string>& metrics) {
    ranking::ScoreMatrix s;
    s.candidates = candidates;
    for (const std::string& name : metrics) s.metrics.push_back({name, reports.front().higher_better(name)});
    for (const evalmetrics::MetricReport& r : reports) {
        std::vector<double> row;
        for (const std::string& name : metrics) {
            const auto v = r.get(name);
            ADFG_REQUIRE(v.has_value(), ErrorKind::config, "metric '" + name + "' missing from report " + r.system);
            row.push_back(*v);
        }
        s.values.push_back(std::move(row));
    }
    if (s.candidates.size() > 1) s.validate();
    return s;
}

void emit(std::ostream& out, const fs::path& path, const std::string& header, const std::string& body) {
    write_text_file(path, header + "\n" + body);
    out << "wrote " << path.string() << '\n';
}

// ---- commands ----

int cmd_prepare(const ExperimentManifest& m, std::ostream& out) {
    std::vector<std::string> tok_texts, pre_texts;
    for (const auto& [id, e] : m.corpora) {
        if (!e.has(Split::train)) continue;
        const data::Corpus c = training_split(m, id, Split::train);
        for (const data::Example& x : c.examples()) {
            tok_texts.push_back(x.article);
            tok_texts.push_back(x.summary);
            pre_texts.push_back(x.article);
        }
    }
    ADFG_REQUIRE(!tok_texts.empty(), ErrorKind::data, "prepare: no corpus with a train split is registered");
    const std::int32_t target = m.tokenizer_vocab > 0 ? m.tokenizer_vocab : m.model_config.vocab_size;
    ADFG_REQUIRE(target <= m.model_config.vocab_size, ErrorKind::config,
            "tokenizer_vocab exceeds the model vocabulary size");
    const data::Tokenizer tok = data::Tokenizer::train(tok_texts, target);
    out << "tokenizer: " << tok.vocab_size() << " ids from " << tok_texts.size() << " texts\n";

    model::TransformerModel model(m.model_config, m.seed);
    training::PretrainConfig pc = m.pretrain;
    pc.seed = m.seed;
    const training::PretrainReport rep = training::pretrain(model, pre_texts, tok, pc);
    for (std::size_t i = 0; i < rep.epoch_loss.size(); ++i) {
        out << "pretrain epoch " << i + 1 << " loss " << fixed(rep.epoch_loss[i], 4) << '\n';
    }
    out << "pretrain: " << rep.steps << " steps over " << rep.chunks << " chunks in " << fixed(rep.wall_seconds, 1)
        << " s\n";
    tok.save(m.tokenizer, m.header());
    out << "wrote " << m.tokenizer.string() << '\n';
    if (m.model.has_parent_path()) fs::create_directories(m.model.parent_path());
    model::save_model(m.model, model, {{"header", m.header()}});
    out << "wrote " << m.model.string() << '\n';
    return 0;
}

int cmd_train(const ExperimentManifest& m, const std::string& method_name, const std::string& dataset,
              const std::string& out_path, std::ostream& out) {
    const Method method = method_arg(method_name);
    const data::Corpus train = training_split(m, dataset, Split::train);
    const data::Corpus val = training_split(m, dataset, Split::validation);
    const data::PromptSpec prompt = m.prompt_for(m.corpus(dataset));
    const Base base = load_base(m);
    training::TrainConfig cfg = m.train;
    cfg.seed = m.seed;
    const adapters::AdapterConfig acfg = m.adapter_config(method);
    acfg.validate(base.model.config());

    const training::TrainResult res = training::train_adapter(
        base.model, acfg, train, val, prompt, base.tokenizer, cfg, [&out](const training::EpochRecord& e) {
            out << "epoch " << e.epoch << " train_loss " << fixed(e.train_loss, 4) << " val_loss "
                << fixed(e.val_loss, 4) << " val_ppl " << fixed(e.val_ppl, 3) << '\n';
        });
    const fs::path path =
        out_path.empty() ? m.adapter_file(ExperimentManifest::adapter_id(dataset, method)) : fs::path(out_path);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    adapters::save_adapter(path, res.state, m.header());
    out << "wrote " << path.string() << '\n';
    emit(out, with_suffix(path, ".report.txt"), m.header(), training::report_text(res.report));
    emit(out, with_suffix(path, ".records.jsonl"), m.header(), training::report_records(res.report));
    return 0;
}

/// Borda ranking; a lone candidate simply ranks first.
ranking::RankTable rank_candidates(const ranking::ScoreMatrix& scores) {
    if (scores.candidates.size() != 1) return ranking::borda_rank(scores);
    ranking::RankTable t;
    t.entries.push_back({scores.candidates.front(), 0.0, 1});
    return t;
}

int cmd_benchmark(const ExperimentManifest& m, const std::string& domain, const std::string& method_list,
                  std::int64_t limit, std::ostream& out) {
    const std::vector<Method> methods = methods_arg(method_list);
    const std::vector<std::string> datasets = m.datasets_in(domain);
    ADFG_REQUIRE(!datasets.empty(), ErrorKind::config, "no training corpora registered for domain '" + domain + "'");
    std::vector<std::string> missing;
    for (const std::string& ds : datasets) {
        for (Method meth : methods) {
            const fs::path p = m.adapter_file(ExperimentManifest::adapter_id(ds, meth));
            if (!fs::exists(p)) missing.push_back(ExperimentManifest::adapter_id(ds, meth) + " (" + p.string() + ")");
        }
    }
    if (!missing.empty()) {
        std::string msg = "missing adapters:";
        for (const std::string& s : missing) msg += "\n  " + s;
        fail(ErrorKind::data, msg);
    }
    const std::vector<std::string> metrics = metric_selection(m);
    const Base base = load_base(m);
    const Plugins plugins = make_plugins(metrics, base);
    const fs::path dir = m.out / "benchmark" / domain;

    std::vector<std::string> reps;
    std::vector<evalmetrics::MetricReport> rep_reports;
    std::ostringstream summary;
    for (const std::string& ds : datasets) {
        const CorpusEntry& e = m.corpus(ds);
        ADFG_REQUIRE(e.has(Split::test), ErrorKind::data, "corpus '" + ds + "' has no test split");
        data::Corpus test = m.load_split(ds, Split::test);
        if (limit > 0) test = test.select(limit, m.seed);
        const data::PromptSpec prompt = m.prompt_for(e);
        std::vector<std::string> names;
        std::vector<evalmetrics::MetricReport> reports;
        for (Method meth : methods) {
            const adapters::AdapterState<float> state = load_checked_adapter(
                m.adapter_file(ExperimentManifest::adapter_id(ds, meth)), base.model.config());
            const adapters::Composite<float> comp = adapters::compose<float>({&state});
            const std::string name(adapters::to_string(meth));
            evalmetrics::Evaluation ev = evalmetrics::evaluate_corpus(base.model, comp, test, prompt, base.tokenizer,
                                                                      generation(m), name, plugins.list);
            out << evalmetrics::report_line(ev.report) << '\n';
            names.push_back(name);
            reports.push_back(std::move(ev.report));
        }
        const ranking::ScoreMatrix scores = score_matrix(names, reports, metrics);
        const ranking::RankTable table = rank_candidates(scores);
        emit(out, dir / (ds + ".scores.csv"), m.header(), ranking::score_csv(scores));
        emit(out, dir / (ds + ".ranks.csv"), m.header(), ranking::rank_csv(table));
        emit(out, dir / (ds + ".reports.txt"), m.header(), evalmetrics::report_lines(reports));
        const std::string& best = table.entries.front().candidate;
        summary << "representative " << ds << ' ' << best << '\n';
        reps.push_back(ds + "-" + best);
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == best) rep_reports.push_back(reports[i]);
        }
    }
    const ranking::ScoreMatrix dom = score_matrix(reps, rep_reports, metrics);
    const ranking::RankTable dom_table = rank_candidates(dom);
    std::string warning;
    const std::vector<std::string> top = ranking::top_k(dom_table, 3, &warning);
    summary << "domain " << domain << " top3";
    for (const std::string& t : top) summary << ' ' << t;
    summary << '\n';
    if (!warning.empty()) summary << "# " << warning << '\n';
    for (const std::string& note : dom_table.tie_notes) summary << "# tie: " << note << '\n';
    emit(out, dir / "summary.txt", m.header(), summary.str());
    out << summary.str();
    return 0;
}

std::vector<fs::path> replay_inputs(const std::vector<std::string>& args) {
    std::vector<fs::path> files;
    for (const std::string& a : args) {
        const fs::path p(a);
        ADFG_REQUIRE(fs::exists(p), ErrorKind::data, "replay input not found: " + a);
        if (!fs::is_directory(p)) {
            files.push_back(p);
            continue;
        }
        std::vector<fs::path> found;
        for (const auto& entry : fs::directory_iterator(p)) {
            const fs::path& f = entry.path();
            const std::string name = f.filename().string();
            if (f.extension() == ".csv" && name != "reference.csv" && name != "zero_shot.csv") found.push_back(f);
        }
        std::sort(found.begin(), found.end());
        files.insert(files.end(), found.begin(), found.end());
    }
    return files;
}

int cmd_replay(const std::vector<std::string>& inputs, const std::string& reference, const std::string& out_path,
               std::ostream& out) {
    const std::vector<fs::path> files = replay_inputs(inputs);
    const ReplayResult r = replay_benchmark(files, reference.empty() ? fs::path() : fs::path(reference));
    std::string all;
    for (const fs::path& f : files) all += read_text_file(f);
    const std::string header = provenance_header(0, fnv1a64(all));
    if (!out_path.empty()) emit(out, out_path, header, r.text);
    out << header << '\n' << r.text;
    return 0;
}

std::string outcomes_jsonl(const std::vector<evalmetrics::ExampleOutcome>& outcomes) {
    std::string s;
    for (const evalmetrics::ExampleOutcome& o : outcomes) {
        nlohmann::ordered_json j;
        j["id"] = o.id;
        j["ok"] = o.ok;
        if (!o.ok) j["error"] = o.error;
        j["candidate"] = o.candidate;
        j["reference"] = o.reference;
        j["prompt_tokens"] = o.prompt_tokens;
        j["truncated"] = o.truncated;
        s += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
    }
    return s;
}

struct HoldoutArgs {
    std::string holdout;
    std::string adapters;
    bool zero_shot = false;
    std::int32_t few_shot = -1;
    std::string weights;
    std::string shots_from;
    std::int64_t limit = 0;
};

int cmd_holdout(const ExperimentManifest& m, const HoldoutArgs& a, bool adapters_given, std::ostream& out) {
    const int modes = (adapters_given ? 1 : 0) + (a.zero_shot ? 1 : 0) + (a.few_shot >= 0 ? 1 : 0);
    ADFG_REQUIRE(modes == 1, ErrorKind::config, "choose exactly one of --adapters, --zero-shot, --few-shot");
    const CorpusEntry& e = m.corpus(a.holdout);
    ADFG_REQUIRE(e.has(Split::holdout), ErrorKind::data, "corpus '" + a.holdout + "' has no holdout split");
    data::Corpus holdout = m.load_split(a.holdout, Split::holdout);
    if (a.limit > 0) holdout = holdout.select(a.limit, m.seed);
    const std::vector<std::string> metrics = metric_selection(m);
    const Base base = load_base(m);
    const Plugins plugins = make_plugins(metrics, base);

    const std::vector<std::string> ids = list_arg(a.adapters);
    ADFG_REQUIRE(ids.size() <= 3, ErrorKind::config, "at most three adapters may be composed");
    std::vector<adapters::AdapterState<float>> states;
    for (const std::string& id : ids) states.push_back(load_checked_adapter(m.adapter_file(id), base.model.config()));
    std::vector<float> weights;
    for (const std::string& w : list_arg(a.weights)) {
        try {
            weights.push_back(std::stof(w));
        } catch (const std::exception&) {
            fail(ErrorKind::config, "bad weight '" + w + "'");
        }
    }
    ADFG_REQUIRE(weights.empty() || weights.size() == ids.size(), ErrorKind::config,
            "--weights needs one value per adapter");
    std::vector<const adapters::AdapterState<float>*> ptrs;
    for (const auto& s : states) ptrs.push_back(&s);
    const adapters::Composite<float> comp =
        ptrs.empty() ? adapters::Composite<float>{} : adapters::compose<float>(ptrs, weights);

    evalmetrics::GenerationConfig g = generation(m);
    std::string system = "zero-shot", setting = "zero-shot";
    data::Corpus pool;
    if (a.few_shot >= 0) {
        std::string src = a.shots_from;
        if (src.empty()) {
            const std::vector<std::string> same = m.datasets_in(e.domain);
            ADFG_REQUIRE(!same.empty(), ErrorKind::config,
                    "no training corpus in domain '" + e.domain + "' to draw exemplars from; pass --shots-from");
            src = same.front();
        }
        pool = training_split(m, src, Split::train);
        g.k = a.few_shot;
        g.shot_pool = &pool;
        system = setting = "few-shot-" + std::to_string(a.few_shot);
    } else if (!ids.empty()) {
        system.clear();
        for (const std::string& id : ids) {
            const bool is_path = id.find('/') != std::string::npos || fs::path(id).extension() == ".adpt";
            system += (system.empty() ? "" : "+") + (is_path ? fs::path(id).stem().string() : id);
        }
        std::vector<std::string> domains;
        for (const auto& s : states) domains.push_back(s.provenance.domain);
        setting = setting_tag(domains, e.domain);
    }
    const evalmetrics::Evaluation ev = evalmetrics::evaluate_corpus(base.model, comp, holdout, m.prompt_for(e),
                                                                    base.tokenizer, g, system, plugins.list);
    std::ostringstream body;
    body << "# holdout " << a.holdout << " domain " << e.domain << " setting " << setting << '\n'
         << evalmetrics::report_line(ev.report) << '\n';
    const fs::path stem = m.out / "holdout" / (a.holdout + "." + system);
    emit(out, stem.string() + ".txt", m.header(), body.str());
    emit(out, stem.string() + ".outcomes.jsonl", m.header(), outcomes_jsonl(ev.outcomes));
    out << "setting " << setting << '\n' << evalmetrics::report_table({ev.report});
    return 0;
}

int cmd_similarity(const ExperimentManifest& m, const std::string& pairs, bool contextual, std::int32_t sample,
                   std::ostream& out) {
    std::vector<std::pair<std::string, std::string>> list;
    if (pairs.empty() || pairs == "all") {
        for (const auto& [h, he] : m.corpora) {
            if (!he.has(Split::holdout)) continue;
            for (const auto& [t, te] : m.corpora) {
                if (te.has(Split::train)) list.emplace_back(h, t);
            }
        }
        ADFG_REQUIRE(!list.empty(), ErrorKind::config, "no (holdout, training) corpus pairs registered");
    } else {
        for (const std::string& p : list_arg(pairs)) {
            const auto colon = p.find(':');
            ADFG_REQUIRE(colon != std::string::npos, ErrorKind::config, "pair '" + p + "' must look like holdout:training");
            list.emplace_back(trim(p.substr(0, colon)), trim(p.substr(colon + 1)));
        }
    }
    auto side = [&m](const std::string& id, bool holdout_side) {
        const CorpusEntry& e = m.corpus(id);
        const Split order[2] = {holdout_side ? Split::holdout : Split::train,
                                holdout_side ? Split::train : Split::holdout};
        for (Split s : order) {
            if (e.has(s)) return m.load_split(id, s);
        }
        const Split any = e.files.begin()->first;
        return m.load_split(id, any);
    };
    std::unique_ptr<Base> base;
    std::unique_ptr<evalmetrics::ModelEmbedder> embedder;
    if (contextual) {
        base = std::make_unique<Base>(load_base(m));
        embedder = std::make_unique<evalmetrics::ModelEmbedder>(base->model, base->tokenizer);
    }
    similarity::SimilarityConfig cfg;
    cfg.sample = sample;
    cfg.seed = m.seed;
    cfg.threads = m.threads;
    std::vector<similarity::SimilarityReport> rows;
    for (const auto& [h, t] : list) {
        (void)m.corpus(h);
        (void)m.corpus(t);
    }
    for (const auto& [h, t] : list) rows.push_back(similarity::compare(side(h, true), side(t, false), embedder.get(), cfg));
    const std::string csv = similarity::similarity_matrix(rows);
    emit(out, m.out / "similarity.csv", m.header() + "\n# " + cfg.describe(), csv);
    out << csv;
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"adfg: adapter training, benchmarking, composition and corpus similarity", "adfg"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::string manifest;
    auto add_manifest = [&manifest](CLI::App* sub) {
        sub->add_option("--manifest,-m", manifest, "Experiment manifest (INI)")->required();
    };

    CLI::App* prepare = app.add_subcommand("prepare", "Train the tokenizer and pretrain the base model");
    add_manifest(prepare);

    std::string method, dataset, out_path;
    CLI::App* train = app.add_subcommand("train", "Train one adapter on a registered corpus");
    add_manifest(train);
    train->add_option("--method", method, "lora, adalora, loha, lokr, ia3 or oft")->required();
    train->add_option("--dataset", dataset, "Registered corpus id")->required();
    train->add_option("--out", out_path, "Adapter file (default <out>/adapters/<dataset>-<method>.adpt)");

    std::string domain, methods, reference;
    std::vector<std::string> replay;
    std::int64_t limit = 0;
    CLI::App* bench = app.add_subcommand("benchmark", "Evaluate and rank trained adapters per dataset");
    bench->add_option("--manifest,-m", manifest, "Experiment manifest (INI)");
    bench->add_option("--domain", domain, "Domain whose datasets are benchmarked");
    bench->add_option("--methods", methods, "Comma-separated subset of methods (default all)");
    bench->add_option("--limit", limit, "Evaluate at most this many test examples per dataset");
    bench->add_option("--replay", replay, "Score CSV files or directories to rank instead of evaluating");
    bench->add_option("--reference", reference, "Reference rank table to compare a replay against");
    bench->add_option("--out", out_path, "Write the replay report here");

    HoldoutArgs ha;
    CLI::App* hold = app.add_subcommand("holdout", "Evaluate a composition or a baseline on a holdout corpus");
    add_manifest(hold);
    hold->add_option("--holdout", ha.holdout, "Holdout corpus id")->required();
    CLI::Option* adapters_opt = hold->add_option("--adapters", ha.adapters, "One to three adapter ids or files");
    hold->add_flag("--zero-shot", ha.zero_shot, "Frozen base without adapters");
    hold->add_option("--few-shot", ha.few_shot, "Frozen base with k exemplars in the prompt");
    hold->add_option("--weights", ha.weights, "Comma-separated composition weights");
    hold->add_option("--shots-from", ha.shots_from, "Training corpus to draw exemplars from");
    hold->add_option("--limit", ha.limit, "Evaluate at most this many holdout examples");

    std::string pairs = "all";
    bool no_contextual = false;
    std::int32_t sample = 32;
    CLI::App* sim = app.add_subcommand("similarity", "Corpus similarity between holdout and training corpora");
    add_manifest(sim);
    sim->add_option("--pairs", pairs, "'all' or holdout:training pairs, comma-separated");
    sim->add_flag("--no-contextual", no_contextual, "Skip the embedding-based overlap");
    sim->add_option("--sample", sample, "Documents sampled per side for the embedding overlap");

    std::string model_cfg = "reference", preset;
    std::string param_methods = "all";
    CLI::App* params = app.add_subcommand("params", "Trainable parameter counts per method");
    params->add_option("--method", param_methods, "A method name or 'all'");
    params->add_option("--model-config", model_cfg, "reference or desk");
    params->add_option("--preset", preset, "Adapter hyperparameters: reference or desk (default by model config)");

    std::string synth_dir;
    data::SynthConfig sc;
    CLI::App* synth = app.add_subcommand("synth", "Generate synthetic domain corpora and a manifest");
    synth->add_option("--out", synth_dir, "Output directory")->required();
    synth->add_option("--seed", sc.seed, "Generator seed");
    synth->add_option("--domains", sc.domains, "Number of domains");
    synth->add_option("--train-size", sc.train_size, "Training examples per domain");
    synth->add_option("--validation-size", sc.validation_size, "Validation examples per domain");
    synth->add_option("--test-size", sc.test_size, "Test examples per domain");
    synth->add_option("--holdout-size", sc.holdout_size, "Holdout examples per domain");
    synth->add_option("--mixing", sc.mixing, "Cross-domain filler borrowing probability");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (params->parsed()) {
            model::ModelConfig mc;
            if (model_cfg == "reference") mc = model::ModelConfig::reference();
            else if (model_cfg == "desk") mc = model::ModelConfig::desk();
            else fail(ErrorKind::config, "unknown model config '" + model_cfg + "' (expected reference or desk)");
            if (preset.empty()) preset = model_cfg == "reference" ? "reference" : "desk";
            out << params_table(methods_arg(param_methods), mc, preset);
            return 0;
        }
        if (synth->parsed()) {
            const fs::path p = write_synth_experiment(synth_dir, sc);
            out << "wrote " << p.string() << '\n';
            return 0;
        }
        if (bench->parsed() && !replay.empty()) return cmd_replay(replay, reference, out_path, out);
        if (bench->parsed()) {
            ADFG_REQUIRE(!manifest.empty(), ErrorKind::config, "benchmark needs --manifest (or --replay)");
            ADFG_REQUIRE(!domain.empty(), ErrorKind::config, "benchmark needs --domain");
        }
        const ExperimentManifest m = ExperimentManifest::load(manifest);
        if (prepare->parsed()) return cmd_prepare(m, out);
        if (train->parsed()) return cmd_train(m, method, dataset, out_path, out);
        if (bench->parsed()) return cmd_benchmark(m, domain, methods, limit, out);
        if (hold->parsed()) return cmd_holdout(m, ha, adapters_opt->count() > 0, out);
        if (sim->parsed()) return cmd_similarity(m, pairs, !no_contextual, sample, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        err << "error (io): " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace adfg::cli
