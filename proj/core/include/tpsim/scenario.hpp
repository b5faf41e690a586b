// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tpsim/actors.hpp"
#include "tpsim/env.hpp"
#include "tpsim/report.hpp"
#include "tpsim/transport.hpp"
#include "tpsim/types.hpp"

namespace tpsim {

// Attack configuration ingested by the harness. Scenario files are UTF-8
// "key=value" lines with '#' comments; unknown keys are rejected. The seed
// fully determines a run given the config.
struct ScenarioConfig {
    std::vector<AdversaryKind> attacks; // empty = no attack

    ReadVariant input_variant = ReadVariant::DirectInput;
    std::optional<Tick> hook_renewal_period = 100;
    bool hooks_enabled = true;
    bool code_injection_enabled = false;
    bool directx_developer_mode = false;
    bool challenge_enabled = false;
    int tan_table_size = 100;
    int hologram_frames = 3;
    std::uint64_t seed = 1;
    Tick duration = 2000;
    TransportKind transport = TransportKind::InProcess;
    std::string intent = "AMT=100;TO=X";
    int transactions = 1;
    bool permute_regions = false;
    Tick control_start_delay = 0; // ticks before the control starts running

    Tick adversary_start = 12;
    Tick adversary_period = 5;
    int adversary_count = 3;
    std::string adversary_keys = "9";
    AdversaryFidelity adversary_fidelity = AdversaryFidelity::LayoutAware;
    bool adversary_guess_tan = false;
    bool adversary_knows_tan_list = false;
    bool adversary_replay_tan = false;
    Tick stripper_period = 150;

    double user_negligence = 0.0;
    Tick user_reaction = 10;
    Tick user_cadence = 1;
    Tick user_start_delay = 5;

    // Expected verdicts for matrix mode; absent fields are not checked.
    std::optional<Outcome> expect_outcome;
    std::optional<Verdict> expect_p1;
    std::optional<Verdict> expect_p2;
    std::optional<Verdict> expect_p3;
    std::optional<Verdict> expect_p4;
    std::optional<Verdict> expect_p5;
};

// Parses and validates scenario text. ParseError carries the line number;
// cross-field violations raise Error{ConstraintError}.
ScenarioConfig load_scenario(const std::string& text);

ScenarioConfig load_scenario_file(const std::string& path);

} // namespace tpsim
