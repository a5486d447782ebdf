// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/adapters/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "adfg/common/error.hpp"
#include "adfg/common/text_io.hpp"

namespace adfg::adapters {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::lora: return "lora";
        case Method::adalora: return "adalora";
        case Method::loha: return "loha";
        case Method::lokr: return "lokr";
        case Method::ia3: return "ia3";
        case Method::oft: return "oft";
    }
    return "?";
}

std::optional<Method> parse_method(std::string_view name) {
    for (Method m : kAllMethods) {
        if (to_string(m) == name) return m;
    }
    return std::nullopt;
}

std::string valid_method_names() {
    std::string out;
    for (Method m : kAllMethods) {
        if (!out.empty()) out += ", ";
        out += to_string(m);
    }
    return out;
}

bool is_delta_method(Method m) {
    return m == Method::lora || m == Method::adalora || m == Method::loha || m == Method::lokr;
}

AdapterConfig AdapterConfig::reference(Method m) {
    AdapterConfig c;
    c.method = m;
    c.rank = 64;
    c.alpha = 8.0;
    switch (m) {
        case Method::lora: c.dropout = 0.1; break;
        case Method::adalora: c.dropout = 0.01; break;
        case Method::loha:
        case Method::lokr: c.rank_dropout = 0.1; break;
        case Method::oft:
            c.oft_block = 64;
            c.oft_block_mode = OftBlockMode::size;
            break;
        case Method::ia3:
            c.targets = {Projection::k, Projection::v, Projection::ffn_act};
            c.ia3_init = Ia3Init::random;
            break;
    }
    return c;
}

AdapterConfig AdapterConfig::desk(Method m) {
    AdapterConfig c = reference(m);
    c.rank = 8;
    c.alpha = 8.0;
    c.oft_block = 16;
    if (m == Method::ia3) c.ia3_init = Ia3Init::ones;
    return c;
}

bool AdapterConfig::targets_site(Projection p) const {
    return std::find(targets.begin(), targets.end(), p) != targets.end();
}

std::int64_t AdapterConfig::adalora_initial_budget(const ModelConfig& model) const {
    if (adalora_b_init > 0) return adalora_b_init;
    return std::int64_t{rank} * static_cast<std::int64_t>(targets.size()) * model.n_layers;
}

std::int64_t AdapterConfig::adalora_final_budget(const ModelConfig& model) const {
    if (adalora_b_final > 0) return adalora_b_final;
    return std::max<std::int64_t>(1, adalora_initial_budget(model) / 2);
}

std::int64_t AdapterConfig::oft_block_size(std::int64_t d_out) const {
    if (oft_block_mode == OftBlockMode::size) return oft_block;
    return oft_block > 0 && d_out % oft_block == 0 ? d_out / oft_block : 0;
}

std::int64_t lokr_auto_factor(std::int64_t d) {
    const double root = std::sqrt(static_cast<double>(d));
    std::int64_t best = 1;
    for (std::int64_t u = 1; u <= d; ++u) {
        if (d % u != 0) continue;
        if (std::abs(static_cast<double>(u) - root) < std::abs(static_cast<double>(best) - root)) best = u;
    }
    return best;
}

std::pair<std::int64_t, std::int64_t> lokr_factors(const AdapterConfig& c, std::int64_t d_out, std::int64_t d_in) {
    if (c.lokr_factor > 0) return {c.lokr_factor, c.lokr_factor};
    return {lokr_auto_factor(d_out), lokr_auto_factor(d_in)};
}

void AdapterConfig::validate(const ModelConfig& model) const {
    auto check = [this](bool ok, const std::string& what) {
        ADFG_REQUIRE(ok, ErrorKind::config, std::string(to_string(method)) + " config: " + what);
    };
    check(!targets.empty(), "no target sites");
    for (Projection p : targets) {
        check(method == Method::ia3 || p != Projection::ffn_act, "ffn_act is only a target for ia3");
    }
    check(std::count_if(targets.begin(), targets.end(),
                        [&](Projection p) { return std::count(targets.begin(), targets.end(), p) > 1; }) == 0,
          "duplicate target site");
    for (double p : {dropout, rank_dropout, module_dropout}) check(p >= 0.0 && p < 1.0, "dropout must lie in [0, 1)");
    if (method != Method::ia3) {
        check(rank >= 1, "rank must be >= 1");
        check(alpha > 0.0, "alpha must be > 0");
    }
    for (Projection p : targets) {
        const model::SiteShape s = model::site_shape(model, p);
        if (method == Method::lora || method == Method::adalora || method == Method::loha) {
            check(rank <= std::min(s.d_out, s.d_in), "rank exceeds the site dimensions");
        }
        if (method == Method::lokr) {
            const auto [u_out, u_in] = lokr_factors(*this, s.d_out, s.d_in);
            check(s.d_out % u_out == 0 && s.d_in % u_in == 0, "lokr factor must divide the site dimensions");
        }
        if (method == Method::oft) {
            const std::int64_t b = oft_block_size(s.d_out);
            check(b >= 1 && s.d_out % b == 0, "oft block size must divide the target dimension");
        }
    }
    if (method == Method::adalora) {
        const std::int64_t b0 = adalora_initial_budget(model);
        const std::int64_t b1 = adalora_final_budget(model);
        const std::int64_t cap = std::int64_t{rank} * static_cast<std::int64_t>(targets.size()) * model.n_layers;
        check(b1 > 0 && b1 <= b0 && b0 <= cap, "budgets must satisfy 0 < b_final <= b_init <= rank * sites");
        check(adalora_warmup >= 0.0 && adalora_final >= 0.0 && adalora_warmup + adalora_final < 1.0,
              "warmup and final fractions must sum below 1");
        check(adalora_beta1 >= 0.0 && adalora_beta1 < 1.0 && adalora_beta2 >= 0.0 && adalora_beta2 < 1.0,
              "smoothing factors must lie in [0, 1)");
        check(adalora_gamma >= 0.0, "orthogonality weight must be >= 0");
    }
    if (method == Method::ia3) check(ia3_noise >= 0.0 && ia3_noise < 1.0, "ia3 noise must lie in [0, 1)");
}

std::vector<SiteId> target_sites(const AdapterConfig& c, const ModelConfig& model) {
    std::vector<SiteId> out;
    for (std::int32_t l = 0; l < model.n_layers; ++l) {
        for (Projection p : {Projection::q, Projection::k, Projection::v, Projection::o, Projection::ffn_act}) {
            if (c.targets_site(p)) out.push_back({l, p});
        }
    }
    return out;
}

namespace {

std::string num(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

std::string_view to_string(Ia3Init i) {
    switch (i) {
        case Ia3Init::ones: return "ones";
        case Ia3Init::ones_noise: return "ones_noise";
        case Ia3Init::random: return "random";
    }
    return "?";
}

}  // namespace

std::map<std::string, std::string> AdapterConfig::to_map() const {
    std::string t;
    for (Projection p : targets) {
        if (!t.empty()) t += ",";
        t += model::to_string(p);
    }
    return {
        {"method", std::string(to_string(method))},
        {"rank", std::to_string(rank)},
        {"alpha", num(alpha)},
        {"dropout", num(dropout)},
        {"rank_dropout", num(rank_dropout)},
        {"module_dropout", num(module_dropout)},
        {"targets", t},
        {"train_bias", train_bias ? "true" : "false"},
        {"adalora_b_init", std::to_string(adalora_b_init)},
        {"adalora_b_final", std::to_string(adalora_b_final)},
        {"adalora_warmup", num(adalora_warmup)},
        {"adalora_final", num(adalora_final)},
        {"adalora_gamma", num(adalora_gamma)},
        {"adalora_beta1", num(adalora_beta1)},
        {"adalora_beta2", num(adalora_beta2)},
        {"lokr_factor", lokr_factor == 0 ? "auto" : std::to_string(lokr_factor)},
        {"oft_block", std::to_string(oft_block)},
        {"oft_block_mode", oft_block_mode == OftBlockMode::size ? "size" : "count"},
        {"ia3_init", std::string(to_string(ia3_init))},
        {"ia3_noise", num(ia3_noise)},
    };
}

AdapterConfig AdapterConfig::from_map(const std::map<std::string, std::string>& kv) {
    auto get = [&kv](const std::string& k) -> const std::string* {
        auto it = kv.find(k);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto as_double = [](const std::string& k, const std::string& v) {
        char* end = nullptr;
        const double d = std::strtod(v.c_str(), &end);
        ADFG_REQUIRE(end != v.c_str() && *end == '\0', ErrorKind::config, "adapter config: bad number for " + k + ": " + v);
        return d;
    };
    auto as_int = [&](const std::string& k, const std::string& v) {
        const double d = as_double(k, v);
        ADFG_REQUIRE(d == std::floor(d), ErrorKind::config, "adapter config: expected an integer for " + k);
        return static_cast<std::int64_t>(d);
    };

    const std::string* m = get("method");
    ADFG_REQUIRE(m != nullptr, ErrorKind::config, "adapter config: missing method");
    const auto method = parse_method(trim(*m));
    ADFG_REQUIRE(method.has_value(), ErrorKind::config,
            "unknown method '" + *m + "'; valid methods: " + valid_method_names());
    AdapterConfig c = desk(*method);
    for (const auto& [key, raw] : kv) {
        const std::string v = trim(raw);
        if (key == "method") continue;
        if (key == "rank") c.rank = static_cast<std::int32_t>(as_int(key, v));
        else if (key == "alpha") c.alpha = as_double(key, v);
        else if (key == "dropout") c.dropout = as_double(key, v);
        else if (key == "rank_dropout") c.rank_dropout = as_double(key, v);
        else if (key == "module_dropout") c.module_dropout = as_double(key, v);
        else if (key == "train_bias") c.train_bias = (v == "true" || v == "1");
        else if (key == "adalora_b_init") c.adalora_b_init = as_int(key, v);
        else if (key == "adalora_b_final") c.adalora_b_final = as_int(key, v);
        else if (key == "adalora_warmup") c.adalora_warmup = as_double(key, v);
        else if (key == "adalora_final") c.adalora_final = as_double(key, v);
        else if (key == "adalora_gamma") c.adalora_gamma = as_double(key, v);
        else if (key == "adalora_beta1") c.adalora_beta1 = as_double(key, v);
        else if (key == "adalora_beta2") c.adalora_beta2 = as_double(key, v);
        else if (key == "lokr_factor") c.lokr_factor = v == "auto" ? 0 : static_cast<std::int32_t>(as_int(key, v));
        else if (key == "oft_block") c.oft_block = static_cast<std::int32_t>(as_int(key, v));
        else if (key == "ia3_noise") c.ia3_noise = as_double(key, v);
        else if (key == "oft_block_mode") {
            ADFG_REQUIRE(v == "size" || v == "count", ErrorKind::config, "oft_block_mode must be size or count");
            c.oft_block_mode = v == "size" ? OftBlockMode::size : OftBlockMode::count;
        } else if (key == "ia3_init") {
            if (v == "ones") c.ia3_init = Ia3Init::ones;
            else if (v == "ones_noise") c.ia3_init = Ia3Init::ones_noise;
            else if (v == "random") c.ia3_init = Ia3Init::random;
            else fail(ErrorKind::config, "ia3_init must be ones, ones_noise or random");
        } else if (key == "targets") {
            c.targets.clear();
            for (const std::string& part : split(v, ',')) {
                const auto p = model::parse_projection(trim(part));
                ADFG_REQUIRE(p.has_value(), ErrorKind::config, "unknown target site '" + part + "'");
                c.targets.push_back(*p);
            }
        } else {
            fail(ErrorKind::config, "unknown adapter config key '" + key + "'");
        }
    }
    return c;
}

}  // namespace adfg::adapters
