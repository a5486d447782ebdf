// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/ranking/score_csv.hpp"

#include <cstdio>
#include <sstream>

#include "adfg/common/error.hpp"
#include "adfg/common/text_io.hpp"

namespace adfg::ranking {

namespace {

std::vector<std::vector<std::string>> csv_rows(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    for (const std::string& raw : split(text, '\n')) {
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        for (const std::string& c : split(line, ',')) cells.push_back(trim(c));
        rows.push_back(std::move(cells));
    }
    return rows;
}

double parse_cell(const std::string& s, const std::string& where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    ADFG_REQUIRE(used == s.size() && !s.empty(), ErrorKind::parse, where + ": not a number: '" + s + "'");
    return v;
}

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ScoreMatrix parse_score_csv(std::string_view text) {
    const auto rows = csv_rows(text);
    ADFG_REQUIRE(!rows.empty(), ErrorKind::parse, "score table is empty");
    ScoreMatrix m;
    const auto& head = rows.front();
    ADFG_REQUIRE(head.size() >= 2, ErrorKind::parse, "score table header needs a metric column");
    for (std::size_t c = 1; c < head.size(); ++c) {
        std::string name = head[c];
        bool higher = true;
        if (!name.empty() && (name.back() == '+' || name.back() == '-')) {
            higher = name.back() == '+';
            name.pop_back();
        }
        ADFG_REQUIRE(!name.empty(), ErrorKind::parse, "score table: empty metric name");
        m.metrics.push_back({name, higher});
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
        ADFG_REQUIRE(rows[r].size() == head.size(), ErrorKind::parse,
                "score table row " + std::to_string(r) + ": expected " + std::to_string(head.size()) + " cells");
        m.candidates.push_back(rows[r][0]);
        std::vector<double> vals;
        for (std::size_t c = 1; c < rows[r].size(); ++c) {
            vals.push_back(parse_cell(rows[r][c], "score table row '" + rows[r][0] + "'"));
        }
        m.values.push_back(std::move(vals));
    }
    m.validate();
    return m;
}

std::string score_csv(const ScoreMatrix& m) {
    std::ostringstream s;
    s << "candidate";
    for (const MetricColumn& c : m.metrics) s << ',' << c.name << (c.higher_is_better ? '+' : '-');
    s << '\n';
    for (std::size_t i = 0; i < m.candidates.size(); ++i) {
        s << m.candidates[i];
        for (double v : m.values[i]) s << ',' << number(v);
        s << '\n';
    }
    return s.str();
}

std::string rank_csv(const RankTable& t) {
    std::ostringstream s;
    s << "candidate,points+,rank-\n";
    for (const RankEntry& e : t.entries) s << e.candidate << ',' << number(e.points) << ',' << e.rank << '\n';
    for (const std::string& n : t.tie_notes) s << "# tie: " << n << '\n';
    return s.str();
}

RankTable parse_rank_csv(std::string_view text) {
    RankTable t;
    for (const std::string& raw : split(text, '\n')) {
        const std::string line = trim(raw);
        if (line.rfind("# tie: ", 0) == 0) t.tie_notes.push_back(line.substr(7));
    }
    const auto rows = csv_rows(text);
    ADFG_REQUIRE(!rows.empty() && rows.front().size() == 3, ErrorKind::parse, "rank table: bad header");
    for (std::size_t r = 1; r < rows.size(); ++r) {
        ADFG_REQUIRE(rows[r].size() == 3, ErrorKind::parse, "rank table row " + std::to_string(r) + ": expected 3 cells");
        t.entries.push_back({rows[r][0], parse_cell(rows[r][1], "rank table"),
                             static_cast<std::int32_t>(parse_cell(rows[r][2], "rank table"))});
    }
    return t;
}

}  // namespace adfg::ranking
