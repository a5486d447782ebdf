// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/evalmetrics/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "adfg/common/error.hpp"
#include "adfg/common/text_io.hpp"

namespace adfg::evalmetrics {

double rouge_geo(double rouge1, double rouge2, double rougeL) {
    if (rouge1 <= 0.0 || rouge2 <= 0.0 || rougeL <= 0.0) return 0.0;
    return std::cbrt(rouge1 * rouge2 * rougeL);
}

bool higher_is_better(std::string_view metric) {
    return metric != kPerplexity;
}

std::vector<std::pair<std::string, double>> MetricReport::values() const {
    std::vector<std::pair<std::string, double>> out{{std::string(kRouge1), rouge1},     {std::string(kRouge2), rouge2},
                                                    {std::string(kRougeL), rougeL},     {std::string(kRougeGeo), rouge_geo},
                                                    {std::string(kBleu), bleu},         {std::string(kMeteor), meteor}};
    if (perplexity) out.emplace_back(std::string(kPerplexity), *perplexity);
    for (const auto& [k, v] : plugins) out.emplace_back(k, v);
    return out;
}

std::optional<double> MetricReport::get(std::string_view name) const {
    for (const auto& [k, v] : values()) {
        if (k == name) return v;
    }
    return std::nullopt;
}

bool MetricReport::higher_better(std::string_view name) const {
    auto it = plugin_orientation.find(std::string(name));
    if (it != plugin_orientation.end()) return it->second;
    return higher_is_better(name);
}

bool MetricReport::rouge_geo_consistent(double tol) const {
    return std::abs(rouge_geo - evalmetrics::rouge_geo(rouge1, rouge2, rougeL)) <= tol;
}

std::string report_line(const MetricReport& r) {
    std::ostringstream s;
    s << r.system;
    char buf[64];
    for (const auto& [k, v] : r.values()) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        s << '\t' << k;
        if (r.plugins.count(k) && !r.higher_better(k)) s << "(-)";
        s << '=' << buf;
    }
    s << "\texamples=" << r.examples << "\tfailures=" << r.failures;
    return s.str();
}

std::string report_lines(const std::vector<MetricReport>& reports) {
    std::string out;
    for (const MetricReport& r : reports) out += report_line(r) + "\n";
    return out;
}

std::vector<MetricReport> parse_report_lines(std::string_view text) {
    std::vector<MetricReport> out;
    for (const std::string& raw : split(text, '\n')) {
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split(line, '\t');
        MetricReport r;
        r.system = fields.at(0);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            const auto eq = fields[i].find('=');
            ADFG_REQUIRE(eq != std::string::npos, ErrorKind::parse, "metric report: field without '=': " + fields[i]);
            std::string key = fields[i].substr(0, eq);
            const std::string val = fields[i].substr(eq + 1);
            bool lower = false;
            if (key.size() > 3 && key.compare(key.size() - 3, 3, "(-)") == 0) {
                key.resize(key.size() - 3);
                lower = true;
            }
            double v = 0.0;
            try {
                v = std::stod(val);
            } catch (const std::exception&) {
                fail(ErrorKind::parse, "metric report: bad value for " + key + ": " + val);
            }
            if (key == kRouge1) r.rouge1 = v;
            else if (key == kRouge2) r.rouge2 = v;
            else if (key == kRougeL) r.rougeL = v;
            else if (key == kRougeGeo) r.rouge_geo = v;
            else if (key == kBleu) r.bleu = v;
            else if (key == kMeteor) r.meteor = v;
            else if (key == kPerplexity) r.perplexity = v;
            else if (key == "examples") r.examples = static_cast<std::int64_t>(v);
            else if (key == "failures") r.failures = static_cast<std::int64_t>(v);
            else {
                r.plugins[key] = v;
                if (lower) r.plugin_orientation[key] = false;
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::string report_table(const std::vector<MetricReport>& reports) {
    if (reports.empty()) return {};
    std::vector<std::string> names;
    for (const MetricReport& r : reports) {
        for (const auto& [k, v] : r.values()) {
            if (std::find(names.begin(), names.end(), k) == names.end()) names.push_back(k);
        }
    }
    std::size_t sys_w = 6;
    for (const MetricReport& r : reports) sys_w = std::max(sys_w, r.system.size());
    std::vector<std::string> headers;
    for (const std::string& n : names) headers.push_back(reports.front().higher_better(n) ? n : n + "(-)");
    std::ostringstream s;
    auto pad = [](const std::string& x, std::size_t w, bool left) {
        const std::string fill(w > x.size() ? w - x.size() : 0, ' ');
        return left ? x + fill : fill + x;
    };
    s << pad("system", sys_w, true);
    for (const std::string& h : headers) s << "  " << pad(h, std::max<std::size_t>(h.size(), 10), false);
    s << "  " << pad("failures", 8, false) << '\n';
    for (const MetricReport& r : reports) {
        s << pad(r.system, sys_w, true);
        for (std::size_t i = 0; i < names.size(); ++i) {
            const auto v = r.get(names[i]);
            s << "  " << pad(v ? fixed(*v, 4) : "-", std::max<std::size_t>(headers[i].size(), 10), false);
        }
        s << "  " << pad(std::to_string(r.failures), 8, false) << '\n';
    }
    return s.str();
}

}  // namespace adfg::evalmetrics
