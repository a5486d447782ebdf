// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "adfg/common/text_io.hpp"
#include "adfg/training/train.hpp"

namespace adfg::training {

std::string report_text(const TrainReport& r) {
    std::ostringstream s;
    s << "# " << r.optimizer_note << '\n';
    s << "method: " << r.method << '\n';
    s << "dataset: " << r.dataset << '\n';
    s << "domain: " << r.domain << '\n';
    s << "trainable parameters: " << with_thousands(r.params.trainable) << " (" << fixed(r.params.percent, 4)
      << "%)\n";
    s << "steps: " << r.steps << '\n';
    s << "train chunks: " << r.train_chunks << "  validation chunks: " << r.val_chunks
      << "  dropped chunks: " << r.dropped_chunks << '\n';
    if (!r.train_selection.empty()) s << "train selection: " << r.train_selection << '\n';
    if (!r.val_selection.empty()) s << "validation selection: " << r.val_selection << '\n';
    s << "base hash: " << hex64(r.base_hash_before) << " -> " << hex64(r.base_hash_after)
      << (r.base_hash_before == r.base_hash_after ? " (unchanged)" : " (CHANGED)") << '\n';
    if (!r.budget_trace.empty()) {
        s << "adalora budget: " << r.budget_trace.front() << " -> " << r.budget_trace.back() << '\n';
    }
    char line[128];
    std::snprintf(line, sizeof line, "%5s  %12s  %12s  %12s\n", "epoch", "train_loss", "val_loss", "val_ppl");
    s << line;
    for (const EpochRecord& e : r.epochs) {
        std::snprintf(line, sizeof line, "%5d  %12.6f  %12.6f  %12.6f\n", e.epoch, e.train_loss, e.val_loss,
                      e.val_ppl);
        s << line;
    }
    s << "best epoch: " << r.best_epoch << " (val_loss " << fixed(r.best_val_loss(), 6) << ")\n";
    s << "wall seconds: " << fixed(r.wall_seconds, 2) << '\n';
    return s.str();
}

std::string report_records(const TrainReport& r) {
    std::ostringstream s;
    for (const EpochRecord& e : r.epochs) {
        nlohmann::ordered_json j;
        j["epoch"] = e.epoch;
        j["train_loss"] = e.train_loss;
        j["val_loss"] = e.val_loss;
        j["val_ppl"] = e.val_ppl;
        s << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    }
    return s.str();
}

}  // namespace adfg::training
