// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/adapters/io.hpp"

#include "adfg/common/error.hpp"
#include "adfg/model/checkpoint.hpp"

namespace adfg::adapters {

void save_adapter(const std::filesystem::path& path, const AdapterState<float>& state, const std::string& header) {
    model::TensorContainer c;
    c.config = state.model_config;
    c.metadata.emplace_back("kind", "adapter");
    if (!header.empty()) c.metadata.emplace_back("header", header);
    for (const auto& [k, v] : state.config.to_map()) c.metadata.emplace_back("config." + k, v);
    c.metadata.emplace_back("provenance.dataset", state.provenance.dataset);
    c.metadata.emplace_back("provenance.domain", state.provenance.domain);
    c.metadata.emplace_back("provenance.run_id", state.provenance.run_id);
    c.metadata.emplace_back("adalora_budget", std::to_string(state.adalora_budget));
    c.metadata.emplace_back("steps_taken", std::to_string(state.steps_taken));
    for (const auto& [site, tensors] : state.sites) {
        for (const auto& [name, t] : tensors) c.tensors.emplace_back(model::to_string(site) + "/" + name, t);
    }
    model::write_container(path, c);
}

AdapterState<float> load_adapter(const std::filesystem::path& path) {
    const model::TensorContainer c = model::read_container(path);
    const std::string* kind = c.find_meta("kind");
    ADFG_REQUIRE(kind != nullptr && *kind == "adapter", ErrorKind::parse, "not an adapter file: " + path.string());
    AdapterState<float> s;
    s.model_config = c.config;
    s.model_config.validate();
    std::map<std::string, std::string> cfg;
    for (const auto& [k, v] : c.metadata) {
        if (k.rfind("config.", 0) == 0) cfg[k.substr(7)] = v;
        else if (k == "provenance.dataset") s.provenance.dataset = v;
        else if (k == "provenance.domain") s.provenance.domain = v;
        else if (k == "provenance.run_id") s.provenance.run_id = v;
        else if (k == "adalora_budget") s.adalora_budget = std::stoll(v);
        else if (k == "steps_taken") s.steps_taken = std::stoll(v);
    }
    s.config = AdapterConfig::from_map(cfg);
    s.config.validate(s.model_config);

    // start from a fresh init so the set of sites and tensor shapes is checked
    const AdapterState<float> shape = init_adapter<float>(s.config, s.model_config, 0);
    s.sites = shape.sites;
    std::size_t seen = 0;
    for (const auto& [name, t] : c.tensors) {
        const auto slash = name.find('/');
        ADFG_REQUIRE(slash != std::string::npos, ErrorKind::parse, "bad adapter tensor name: " + name);
        const std::string site_name = name.substr(0, slash);
        bool matched = false;
        for (auto& [site, tensors] : s.sites) {
            if (model::to_string(site) != site_name) continue;
            auto it = tensors.find(name.substr(slash + 1));
            ADFG_REQUIRE(it != tensors.end(), ErrorKind::parse, "unexpected adapter tensor: " + name);
            ADFG_REQUIRE(it->second.shape() == t.shape(), ErrorKind::parse, "shape mismatch for adapter tensor " + name);
            it->second = t;
            matched = true;
            ++seen;
        }
        ADFG_REQUIRE(matched, ErrorKind::parse, "adapter tensor for an untargeted site: " + name);
    }
    std::size_t expected = 0;
    for (const auto& [site, tensors] : s.sites) expected += tensors.size();
    ADFG_REQUIRE(seen == expected, ErrorKind::parse, "adapter file is missing tensors: " + path.string());
    return s;
}

}  // namespace adfg::adapters
