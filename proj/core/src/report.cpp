// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include "tpsim/report.hpp"

#include <sstream>

#include <json.hpp>

namespace tpsim {

const char* outcome_name(Outcome o) {
    switch (o) {
    case Outcome::CommittedGenuine: return "CommittedGenuine";
    case Outcome::AbortedByUser: return "AbortedByUser";
    case Outcome::RejectedByServer: return "RejectedByServer";
    case Outcome::DeniedService: return "DeniedService";
    case Outcome::CompromisedCommit: return "CompromisedCommit";
    }
    return "?";
}

const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Violated: return "violated";
    case Verdict::NotPrevented: return "not_prevented";
    }
    return "?";
}

std::optional<Outcome> outcome_from_name(const std::string& name) {
    for (Outcome o : {Outcome::CommittedGenuine, Outcome::AbortedByUser,
                      Outcome::RejectedByServer, Outcome::DeniedService,
                      Outcome::CompromisedCommit}) {
        if (name == outcome_name(o)) {
            return o;
        }
    }
    return std::nullopt;
}

std::optional<Verdict> verdict_from_name(const std::string& name) {
    for (Verdict v : {Verdict::Holds, Verdict::Violated, Verdict::NotPrevented}) {
        if (name == verdict_name(v)) {
            return v;
        }
    }
    return std::nullopt;
}

std::string Report::to_text() const {
    std::ostringstream os;
    os << "outcome=" << outcome_name(outcome) << '\n';
    os << "p1_modification_prevented=" << verdict_name(properties.p1) << '\n';
    os << "p2_spoofing_detected=" << verdict_name(properties.p2) << '\n';
    os << "p3_output_confidential=" << verdict_name(properties.p3) << '\n';
    os << "p4_remote_control_detected=" << verdict_name(properties.p4) << '\n';
    os << "p5_denial_of_service=" << verdict_name(properties.p5) << '\n';
    os << "seed=" << seed << '\n';
    os << "intent=" << intent << '\n';
    os << "sessions=" << sessions.size() << '\n';
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        const SessionSummary& s = sessions[i];
        os << "session." << (i + 1) << ".outcome=" << outcome_name(s.outcome) << '\n';
        os << "session." << (i + 1) << ".staged_data=" << s.staged_data << '\n';
        os << "session." << (i + 1) << ".committed_data=" << s.committed_data.value_or("-")
           << '\n';
    }
    os << "diag.forged_messages_dropped=" << diagnostics.forged_messages_dropped << '\n';
    os << "diag.injected_flagged_excluded=" << diagnostics.injected_flagged_excluded << '\n';
    os << "diag.flag_strips=" << diagnostics.flag_strips << '\n';
    os << "diag.stripped_collected=" << diagnostics.stripped_collected << '\n';
    os << "diag.capture_attempts_blocked=" << diagnostics.capture_attempts_blocked << '\n';
    os << "diag.primary_tampers_repaired=" << diagnostics.primary_tampers_repaired << '\n';
    os << "diag.cert_mismatches=" << diagnostics.cert_mismatches << '\n';
    os << "diag.challenges_failed=" << diagnostics.challenges_failed << '\n';
    os << "trace_events=" << trace_events << '\n';
    return os.str();
}

std::string Report::to_json() const {
    nlohmann::ordered_json j;
    j["outcome"] = outcome_name(outcome);
    j["properties"] = {
        {"p1_modification_prevented", verdict_name(properties.p1)},
        {"p2_spoofing_detected", verdict_name(properties.p2)},
        {"p3_output_confidential", verdict_name(properties.p3)},
        {"p4_remote_control_detected", verdict_name(properties.p4)},
        {"p5_denial_of_service", verdict_name(properties.p5)},
    };
    j["seed"] = seed;
    j["intent"] = intent;
    j["sessions"] = nlohmann::ordered_json::array();
    for (const SessionSummary& s : sessions) {
        nlohmann::ordered_json js;
        js["outcome"] = outcome_name(s.outcome);
        js["staged_data"] = s.staged_data;
        if (s.committed_data) {
            js["committed_data"] = *s.committed_data;
        } else {
            js["committed_data"] = nullptr;
        }
        j["sessions"].push_back(js);
    }
    j["diagnostics"] = {
        {"forged_messages_dropped", diagnostics.forged_messages_dropped},
        {"injected_flagged_excluded", diagnostics.injected_flagged_excluded},
        {"flag_strips", diagnostics.flag_strips},
        {"stripped_collected", diagnostics.stripped_collected},
        {"capture_attempts_blocked", diagnostics.capture_attempts_blocked},
        {"primary_tampers_repaired", diagnostics.primary_tampers_repaired},
        {"cert_mismatches", diagnostics.cert_mismatches},
        {"challenges_failed", diagnostics.challenges_failed},
    };
    j["trace_events"] = trace_events;
    return j.dump(2) + "\n";
}

} // namespace tpsim
