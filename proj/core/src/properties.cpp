// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include "tpsim/properties.hpp"

#include <set>
#include <string>

namespace tpsim {

PropertyMatrix evaluate_properties(const Trace& trace) {
    PropertyMatrix matrix;

    // Secret tokens: hologram frames declared at setup plus everything the
    // server staged or echoed, which the control renders only on the overlay.
    std::set<std::string> secrets;
    std::string intent;
    for (const TraceEvent& ev : trace.events()) {
        if (ev.actor == "harness" && ev.op == "secret") {
            secrets.insert(ev.field("token"));
        } else if (ev.actor == "harness" && ev.op == "intent") {
            intent = ev.field("value");
        } else if (ev.actor == "server" && ev.op == "stage") {
            secrets.insert("DATA:" + ev.field("data"));
            secrets.insert("NONCE:" + ev.field("nonce"));
        }
    }

    bool denial = false;
    for (const TraceEvent& ev : trace.events()) {
        // P1: whenever the control owns the screen, the composed frame the
        // user sees must equal the overlay content.
        if (ev.actor == "env" && ev.op == "present") {
            if (ev.field("match") == "0") {
                matrix.p1 = Verdict::Violated;
            }
        }
        // P2: a TAN entered against a screen the control did not render
        // means the spoof went undetected.
        if (ev.actor == "user" && ev.op == "decide") {
            if (ev.field("screen") == "spoof" && ev.field("choice") == "tan") {
                matrix.p2 = Verdict::Violated;
            }
        }
        // P3: no adversary may ever hold a hologram frame or any token the
        // control rendered on the overlay.
        if (ev.actor.rfind("adv:", 0) == 0 && (ev.op == "learn" || ev.op == "knowledge")) {
            if (secrets.count(ev.field("token")) != 0) {
                matrix.p3 = Verdict::Violated;
            }
        }
        // P4: manipulated staged data must never commit.
        if (ev.actor == "server" && ev.op == "finalize") {
            if (ev.field("outcome") == "commit" && ev.field("data") != intent) {
                matrix.p4 = Verdict::Violated;
            }
        }
        // P5: exclusivity or service denied.
        if (ev.actor == "control" && ev.op == "abort") {
            const std::string reason = ev.field("reason");
            if (reason == "already_owned" || reason == "cert_mismatch" ||
                reason == "channel_error") {
                denial = true;
            }
        }
        if (ev.actor == "harness" && ev.op == "timeout") {
            denial = true;
        }
    }
    matrix.p5 = denial ? Verdict::NotPrevented : Verdict::Holds;
    return matrix;
}

} // namespace tpsim
