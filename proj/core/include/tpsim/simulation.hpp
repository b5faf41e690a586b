// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tpsim/report.hpp"
#include "tpsim/scenario.hpp"
#include "tpsim/trace.hpp"

namespace tpsim {

struct RunArtifacts {
    Report report;
    Trace trace;
};

// Executes one scenario: builds the desktop, server, control and actors,
// runs the tick loop (adversaries, user, raw dispatch, control, channel
// delivery, frame presentation) and evaluates the property matrix.
// Deterministic under a fixed (config, seed) pair.
RunArtifacts run_scenario_with_trace(const ScenarioConfig& config);
Report run_scenario(const ScenarioConfig& config);

struct MatrixRow {
    std::string name;
    Outcome outcome = Outcome::DeniedService;
    PropertyMatrix properties;
    bool matched = true;
};

struct MatrixResult {
    std::vector<MatrixRow> rows;

    bool all_matched() const;
    std::string to_text() const;
};

// Runs every "*.scenario" file in the directory (sorted by name) and
// compares outcome and verdicts against the files' expectations.
MatrixResult run_matrix(const std::string& dir);

struct BatchResult {
    std::uint64_t runs = 0;
    std::uint64_t seed_base = 0;
    // Indexed by Outcome enumerator order.
    std::array<std::uint64_t, 5> outcome_counts{};
    std::uint64_t stripped_collected_total = 0;

    std::uint64_t count(Outcome o) const {
        return outcome_counts[static_cast<std::size_t>(o)];
    }
    double compromised_frequency() const;
    std::string to_text() const;
};

// Statistical mode: `runs` independent simulations seeded seed_base+i,
// executed on a small thread pool and merged by run index.
BatchResult run_batch(const ScenarioConfig& base, std::uint64_t runs, std::uint64_t seed_base,
                      unsigned threads = 0);

} // namespace tpsim
