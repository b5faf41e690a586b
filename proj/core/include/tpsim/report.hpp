// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tpsim/types.hpp"

namespace tpsim {

enum class Outcome {
    CommittedGenuine,
    AbortedByUser,
    RejectedByServer,
    DeniedService,
    CompromisedCommit,
};

// P5 is the property the design explicitly does not provide; a denial of
// service is recorded as NotPrevented rather than as a violation.
enum class Verdict { Holds, Violated, NotPrevented };

const char* outcome_name(Outcome o);
const char* verdict_name(Verdict v);
std::optional<Outcome> outcome_from_name(const std::string& name);
std::optional<Verdict> verdict_from_name(const std::string& name);

// Verdict matrix for the five security properties:
//   p1  user-interface modification prevented
//   p2  user-interface spoofing detected
//   p3  output confidentiality preserved
//   p4  input remote control detected after the fact
//   p5  denial of service (the one thing this design does not stop)
struct PropertyMatrix {
    Verdict p1 = Verdict::Holds;
    Verdict p2 = Verdict::Holds;
    Verdict p3 = Verdict::Holds;
    Verdict p4 = Verdict::Holds;
    Verdict p5 = Verdict::Holds;

    bool operator==(const PropertyMatrix&) const = default;
};

struct Diagnostics {
    std::uint64_t forged_messages_dropped = 0;
    std::uint64_t injected_flagged_excluded = 0;
    std::uint64_t flag_strips = 0;
    std::uint64_t stripped_collected = 0;
    std::uint64_t capture_attempts_blocked = 0;
    std::uint64_t primary_tampers_repaired = 0;
    std::uint64_t cert_mismatches = 0;
    std::uint64_t challenges_failed = 0;
};

struct SessionSummary {
    Outcome outcome = Outcome::DeniedService;
    std::string staged_data;
    std::optional<std::string> committed_data;
};

// Outcome of one simulation run. Rendered text and JSON have stable field
// order, so identical (config, seed) pairs produce byte-identical reports.
struct Report {
    Outcome outcome = Outcome::DeniedService;
    PropertyMatrix properties;
    std::uint64_t seed = 0;
    std::string intent;
    std::vector<SessionSummary> sessions;
    Diagnostics diagnostics;
    std::uint64_t trace_events = 0;

    std::string to_text() const;
    std::string to_json() const;
};

} // namespace tpsim
