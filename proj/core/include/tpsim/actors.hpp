// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tpsim/control.hpp"
#include "tpsim/env.hpp"
#include "tpsim/rng.hpp"
#include "tpsim/server.hpp"
#include "tpsim/trace.hpp"
#include "tpsim/types.hpp"

namespace tpsim {

// Behavioral models: the human user and the adversary catalog. Actors are
// deterministic policies over observable state; the harness drives them one
// step per tick. The user observes only composed screen output and produces
// only hardware-origin key events.

struct UserConfig {
    std::string intent = "AMT=100;TO=X";
    Tick start_delay = 5;   // ticks between seeing the input screen and typing
    Tick key_cadence = 1;   // ticks between keystrokes
    Tick reaction = 10;     // ticks between seeing a confirmation and deciding
    double negligence = 0.0; // probability of skipping the checks
};

class UserActor {
public:
    UserActor(const UserConfig& config, TanTable table, Hologram hologram_reference,
              ChallengeSolver solver, Rng rng);

    // Checks the displayed data against the intent and the hologram against
    // the registered reference; returns the nonce-bound TAN or the abort bit.
    Decision user_decide(const UserView& view, std::uint32_t nonce);

    std::string solve_challenge(const std::string& challenge) const;

    // One tick: emit any due keystroke, then react to the presented frame.
    // `screen_genuine` is the harness's ground-truth note of whether the
    // frame came from the control's overlay; it is recorded in the trace and
    // never consulted by the policy itself.
    void step(Desktop& desktop, const UserView& presented, bool screen_genuine, Trace& trace);

    // Re-arms the actor for a follow-up transaction.
    void begin_transaction();

    bool aborted() const { return phase_ == Phase::Aborting; }
    bool decided() const { return decided_; }
    const std::vector<std::pair<Tick, KeyToken>>& typing_schedule() const { return schedule_; }

private:
    enum class Phase { Watching, Responding, Aborting };

    static std::optional<PixelToken> value_right_of(const UserView& view,
                                                    const PixelToken& label);
    void queue_keys(const std::string& chars, bool terminator);
    void emit_due_key(Desktop& desktop, Trace& trace);

    UserConfig config_;
    TanTable table_;
    Hologram hologram_reference_;
    ChallengeSolver solver_;
    Rng rng_;

    Phase phase_ = Phase::Watching;
    bool typed_intent_ = false;
    bool decided_ = false;
    std::optional<Tick> input_first_seen_;
    std::optional<Tick> confirmation_first_seen_;
    std::string pending_keys_watched_; // confirmation signature being timed
    std::vector<KeyToken> key_queue_;
    Tick next_key_tick_ = 0;
    Tick last_abort_key_ = -1;
    std::vector<std::pair<Tick, KeyToken>> schedule_;
    std::set<std::string> responded_;
};

enum class AdversaryKind {
    MessageForger,
    SendInputInjector,
    FlagStripper,
    Keylogger,
    ScreenGrabber,
    UiSpoofer,
    Mitm,
    DosGrabber,
};

enum class AdversaryFidelity { Blind, LayoutAware };

const char* adversary_kind_name(AdversaryKind kind);

struct AdversaryParams {
    AdversaryKind kind = AdversaryKind::MessageForger;
    AdversaryFidelity fidelity = AdversaryFidelity::LayoutAware;
    Tick start = 12;
    Tick period = 5;
    int count = 3;              // scheduled manipulation actions
    std::string keys = "9";     // manipulation payload per action
    Tick stripper_period = 150;
    bool guess_tan = false;
    bool knows_tan_list = false;
    bool replay_tan = false;
    int act_in_transaction = 1; // manipulation/guess armed in this transaction
    Tick horizon = 2000;        // blind schedules draw from [0, horizon)
};

class Adversary {
public:
    Adversary(const AdversaryParams& params, Rng rng,
              std::vector<std::string> leaked_tans = {});

    AdversaryKind kind() const { return params_.kind; }
    const AdversaryParams& params() const { return params_; }

    void attach(Desktop& desktop);
    ProcessId pid() const { return pid_; }

    // Scripted per-tick behavior; environment errors are recorded, never
    // propagated.
    void step(Desktop& desktop, Trace& trace);

    void begin_transaction(Desktop& desktop);

    void learn(const std::string& token) { knowledge_.insert(token); }
    const std::set<std::string>& knowledge() const { return knowledge_; }
    const std::vector<Err>& error_log() const { return errors_; }
    std::uint64_t captures_blocked() const { return captures_blocked_; }

private:
    std::string trace_name() const;
    void scan_own_hook_log(Desktop& desktop);
    void step_forger(Desktop& desktop, Trace& trace);
    void step_injector(Desktop& desktop, Trace& trace);
    void step_stripper(Desktop& desktop, Trace& trace);
    void step_keylogger(Desktop& desktop, Trace& trace);
    void step_grabber(Desktop& desktop, Trace& trace);
    void step_spoofer(Desktop& desktop, Trace& trace);
    void step_dos(Desktop& desktop, Trace& trace);
    std::optional<ProcessId> find_control(const Desktop& desktop) const;
    bool scheduled_now(Tick now) const;
    void record_error(const Error& e, Desktop& desktop, Trace& trace);

    AdversaryParams params_;
    Rng rng_;
    std::vector<std::string> leaked_tans_;
    ProcessId pid_{0};
    std::set<std::string> knowledge_;
    std::vector<Err> errors_;
    std::uint64_t captures_blocked_ = 0;

    std::vector<Tick> schedule_;
    int transaction_ = 1;
    Tick transaction_start_ = 0;
    bool hook_installed_ = false;
    bool holds_screen_ = false;
    bool spoof_traced_ = false;
    std::size_t log_scanned_ = 0;
    std::vector<KeyToken> keys_seen_;        // own observe-hook key log
    std::optional<Tick> term_seen_;          // first terminator this transaction
    std::optional<std::string> replay_token_;
    std::vector<KeyToken> inject_queue_;
    Tick next_inject_tick_ = 0;
    bool tan_injection_armed_ = false;
};

} // namespace tpsim
