// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include "tpsim/actors.hpp"

#include <algorithm>

namespace tpsim {

// ---------------------------------------------------------------------------
// UserActor

UserActor::UserActor(const UserConfig& config, TanTable table, Hologram hologram_reference,
                     ChallengeSolver solver, Rng rng)
    : config_(config), table_(std::move(table)),
      hologram_reference_(std::move(hologram_reference)), solver_(std::move(solver)),
      rng_(std::move(rng)) {}

std::optional<PixelToken> UserActor::value_right_of(const UserView& view,
                                                    const PixelToken& label) {
    for (int y = 0; y < view.height; ++y) {
        for (int x = 0; x + 1 < view.width; ++x) {
            if (view.at(x, y) == label) {
                return view.at(x + 1, y);
            }
        }
    }
    return std::nullopt;
}

std::string UserActor::solve_challenge(const std::string& challenge) const {
    return solver_.solve(challenge);
}

Decision UserActor::user_decide(const UserView& view, std::uint32_t nonce) {
    const auto holo = value_right_of(view, kLabelHologram);
    const bool holo_ok =
        holo && !hologram_reference_.empty() &&
        std::find(hologram_reference_.begin(), hologram_reference_.end(), *holo) !=
            hologram_reference_.end();
    const auto data = value_right_of(view, kLabelData);
    const bool data_ok = data && *data == "DATA:" + config_.intent;
    if (!holo_ok || !data_ok) {
        return Decision::abort_bit();
    }
    return Decision::make_tan(table_.lookup(nonce));
}

void UserActor::queue_keys(const std::string& chars, bool terminator) {
    for (char c : chars) {
        key_queue_.push_back(std::string(1, c));
    }
    if (terminator) {
        key_queue_.push_back(kTerminatorKey);
    }
}

void UserActor::emit_due_key(Desktop& desktop, Trace& trace) {
    if (key_queue_.empty() || desktop.now() < next_key_tick_) {
        return;
    }
    const KeyToken key = key_queue_.front();
    key_queue_.erase(key_queue_.begin());
    desktop.inject_input(InputSource::Hardware, key);
    schedule_.emplace_back(desktop.now(), key);
    trace.add(desktop.now(), "user", "type", "key=" + escape_value(key));
    next_key_tick_ = desktop.now() + config_.key_cadence;
}

void UserActor::begin_transaction() {
    phase_ = Phase::Watching;
    typed_intent_ = false;
    decided_ = false;
    input_first_seen_.reset();
    confirmation_first_seen_.reset();
    pending_keys_watched_.clear();
    key_queue_.clear();
}

void UserActor::step(Desktop& desktop, const UserView& presented, bool screen_genuine,
                     Trace& trace) {
    const Tick now = desktop.now();

    // A user who has resolved to walk away keeps signalling the abort until
    // the session actually dies.
    if (phase_ == Phase::Aborting) {
        if (last_abort_key_ < 0 || now - last_abort_key_ >= config_.reaction) {
            desktop.inject_input(InputSource::Hardware, kAbortKey);
            schedule_.emplace_back(now, kAbortKey);
            trace.add(now, "user", "type", "key=" + escape_value(kAbortKey));
            last_abort_key_ = now;
        }
        return;
    }

    emit_due_key(desktop, trace);

    const bool input_screen = value_right_of(presented, kLabelInput).has_value();
    const bool confirmation_screen = value_right_of(presented, kLabelData).has_value() &&
                                     value_right_of(presented, kLabelNonce).has_value();

    if (confirmation_screen) {
        const std::string data = value_right_of(presented, kLabelData).value_or("");
        const std::string nonce_token = value_right_of(presented, kLabelNonce).value_or("");
        const std::string signature = data + "#" + nonce_token;
        if (responded_.count(signature) != 0) {
            return;
        }
        if (pending_keys_watched_ != signature) {
            pending_keys_watched_ = signature;
            confirmation_first_seen_ = now;
            return;
        }
        if (now - *confirmation_first_seen_ < config_.reaction) {
            return;
        }
        responded_.insert(signature);
        decided_ = true;

        std::uint32_t nonce = 0;
        if (nonce_token.rfind("NONCE:", 0) == 0) {
            nonce = static_cast<std::uint32_t>(std::stoul(nonce_token.substr(6)));
        }
        const bool negligent = rng_.chance(config_.negligence);
        Decision decision = user_decide(presented, nonce);
        if (negligent && decision.kind == Decision::Kind::AbortBit) {
            // Skipped the checks entirely; answers whatever is on screen.
            decision = Decision::make_tan(table_.lookup(nonce));
        }
        const char* screen = screen_genuine ? "genuine" : "spoof";
        if (decision.kind == Decision::Kind::Tan) {
            trace.add(now, "user", "decide",
                      std::string("screen=") + screen + ";choice=tan;nonce=" + nonce_token);
            const auto challenge = value_right_of(presented, kLabelChallenge);
            if (challenge) {
                queue_keys(solve_challenge(*challenge), true);
            }
            queue_keys(decision.tan, true);
            phase_ = Phase::Responding;
        } else {
            trace.add(now, "user", "decide",
                      std::string("screen=") + screen + ";choice=abort;nonce=" + nonce_token);
            phase_ = Phase::Aborting;
        }
        return;
    }

    if (input_screen && !typed_intent_) {
        if (!input_first_seen_) {
            input_first_seen_ = now;
            return;
        }
        if (now - *input_first_seen_ >= config_.start_delay) {
            queue_keys(config_.intent, true);
            typed_intent_ = true;
            trace.add(now, "user", "typing_started", "");
        }
    }
}

// ---------------------------------------------------------------------------
// Adversary

const char* adversary_kind_name(AdversaryKind kind) {
    switch (kind) {
    case AdversaryKind::MessageForger: return "message_forger";
    case AdversaryKind::SendInputInjector: return "sendinput_injector";
    case AdversaryKind::FlagStripper: return "flag_stripper";
    case AdversaryKind::Keylogger: return "keylogger";
    case AdversaryKind::ScreenGrabber: return "screen_grabber";
    case AdversaryKind::UiSpoofer: return "ui_spoofer";
    case AdversaryKind::Mitm: return "mitm";
    case AdversaryKind::DosGrabber: return "dos_grabber";
    }
    return "?";
}

Adversary::Adversary(const AdversaryParams& params, Rng rng, std::vector<std::string> leaked_tans)
    : params_(params), rng_(std::move(rng)), leaked_tans_(std::move(leaked_tans)) {
    if (params_.kind == AdversaryKind::MessageForger ||
        params_.kind == AdversaryKind::SendInputInjector) {
        if (params_.fidelity == AdversaryFidelity::LayoutAware) {
            const Tick jitter = params_.period > 0
                                    ? static_cast<Tick>(rng_.below(
                                          static_cast<std::uint64_t>(params_.period)))
                                    : 0;
            for (int k = 0; k < params_.count; ++k) {
                schedule_.push_back(params_.start + jitter + k * params_.period);
            }
        } else {
            for (int k = 0; k < params_.count; ++k) {
                schedule_.push_back(static_cast<Tick>(
                    rng_.below(static_cast<std::uint64_t>(params_.horizon))));
            }
            std::sort(schedule_.begin(), schedule_.end());
        }
    }
    if (params_.kind == AdversaryKind::FlagStripper) {
        schedule_.push_back(params_.stripper_period > 0
                                ? static_cast<Tick>(rng_.below(
                                      static_cast<std::uint64_t>(params_.stripper_period)))
                                : 0);
    }
}

void Adversary::attach(Desktop& desktop) { pid_ = desktop.spawn_process(ProcessRole::Adversary); }

std::string Adversary::trace_name() const {
    return std::string("adv:") + adversary_kind_name(params_.kind);
}

std::optional<ProcessId> Adversary::find_control(const Desktop& desktop) const {
    std::optional<ProcessId> found;
    for (ProcessId pid : desktop.processes()) {
        if (desktop.role_of(pid) == ProcessRole::Control) {
            found = pid; // latest spawned wins
        }
    }
    return found;
}

bool Adversary::scheduled_now(Tick now) const {
    // Manipulation schedules are relative to the transaction the adversary
    // is armed for, so a second transaction sees the same typing-window
    // timing as the first.
    const Tick relative = now - transaction_start_;
    return std::find(schedule_.begin(), schedule_.end(), relative) != schedule_.end();
}

void Adversary::record_error(const Error& e, Desktop& desktop, Trace& trace) {
    errors_.push_back(e.code());
    trace.add(desktop.now(), trace_name(), "env_error", std::string("code=") + err_name(e.code()));
}

void Adversary::begin_transaction(Desktop& desktop) {
    ++transaction_;
    // Reconstruct the TAN typed in the previous transaction: the last
    // terminator-delimited group of single-character keys in the key log.
    if (params_.replay_tan && !keys_seen_.empty()) {
        std::vector<std::string> groups(1);
        for (const KeyToken& k : keys_seen_) {
            if (k == kTerminatorKey) {
                groups.emplace_back();
            } else if (k.size() == 1) {
                groups.back() += k;
            }
        }
        for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
            if (!it->empty()) {
                replay_token_ = *it;
                break;
            }
        }
    }
    keys_seen_.clear();
    term_seen_.reset();
    inject_queue_.clear();
    tan_injection_armed_ = false;
    transaction_start_ = desktop.now();
}

void Adversary::scan_own_hook_log(Desktop& desktop) {
    const auto& log = desktop.capture_log(pid_);
    for (; log_scanned_ < log.size(); ++log_scanned_) {
        const HookCapture& cap = log[log_scanned_];
        keys_seen_.push_back(cap.key);
        knowledge_.insert(cap.key);
        if (cap.key == kTerminatorKey && !term_seen_) {
            term_seen_ = desktop.now();
        }
    }
}

void Adversary::step_forger(Desktop& desktop, Trace& trace) {
    if (transaction_ != params_.act_in_transaction || !scheduled_now(desktop.now())) {
        return;
    }
    const auto target = find_control(desktop);
    if (!target) {
        return;
    }
    try {
        for (char c : params_.keys) {
            desktop.post_window_message(pid_, *target, std::string(1, c));
        }
        trace.add(desktop.now(), trace_name(), "forge_message",
                  "keys=" + escape_value(params_.keys));
    } catch (const Error& e) {
        record_error(e, desktop, trace);
    }
}

void Adversary::step_injector(Desktop& desktop, Trace& trace) {
    const bool needs_hook = params_.guess_tan || params_.replay_tan;
    if (needs_hook && !hook_installed_) {
        try {
            desktop.install_hook(pid_, HookBehavior::Observe, HookMode::Install);
            hook_installed_ = true;
            trace.add(desktop.now(), trace_name(), "hook_installed", "behavior=observe");
        } catch (const Error& e) {
            record_error(e, desktop, trace);
        }
    }
    if (hook_installed_) {
        scan_own_hook_log(desktop);
    }

    const bool armed = transaction_ == params_.act_in_transaction;

    // Scheduled data manipulation during the typing window. Once the hook
    // has seen the terminator the collection is over and further digits
    // would only corrupt the upcoming TAN race.
    if (armed && !term_seen_ && scheduled_now(desktop.now())) {
        try {
            for (char c : params_.keys) {
                desktop.inject_input(InputSource::SendInput, std::string(1, c), pid_);
            }
            trace.add(desktop.now(), trace_name(), "inject_input",
                      "keys=" + escape_value(params_.keys));
        } catch (const Error& e) {
            record_error(e, desktop, trace);
        }
    }

    // Premature confirmation: once the victim finished typing, race the
    // human and push a TAN through the same input path.
    if (armed && (params_.guess_tan || params_.replay_tan) && term_seen_ &&
        !tan_injection_armed_ && desktop.now() >= *term_seen_ + 2) {
        std::string tan;
        if (params_.replay_tan && replay_token_) {
            tan = *replay_token_;
        } else if (params_.guess_tan) {
            tan = !leaked_tans_.empty() && params_.knows_tan_list
                      ? leaked_tans_[rng_.below(leaked_tans_.size())]
                      : rng_.hex_token(4);
        }
        if (!tan.empty()) {
            for (char c : tan) {
                inject_queue_.push_back(std::string(1, c));
            }
            inject_queue_.push_back(kTerminatorKey);
            tan_injection_armed_ = true;
            next_inject_tick_ = desktop.now();
            trace.add(desktop.now(), trace_name(), "tan_injection_armed",
                      "tan=" + escape_value(tan));
        }
    }
    if (!inject_queue_.empty() && desktop.now() >= next_inject_tick_) {
        try {
            desktop.inject_input(InputSource::SendInput, inject_queue_.front(), pid_);
            inject_queue_.erase(inject_queue_.begin());
            next_inject_tick_ = desktop.now() + 1;
        } catch (const Error& e) {
            record_error(e, desktop, trace);
        }
    }
}

void Adversary::step_stripper(Desktop& desktop, Trace& trace) {
    const Tick phase = schedule_.empty() ? 0 : schedule_.front();
    const Tick now = desktop.now();
    if (now < phase || (now - phase) % params_.stripper_period != 0) {
        return;
    }
    try {
        if (!hook_installed_) {
            desktop.install_hook(pid_, HookBehavior::Strip, HookMode::Install);
            hook_installed_ = true;
            trace.add(now, trace_name(), "hook_installed", "behavior=strip");
        } else {
            desktop.install_hook(pid_, HookBehavior::Strip, HookMode::Renew);
            trace.add(now, trace_name(), "hook_renewed", "behavior=strip");
        }
    } catch (const Error& e) {
        record_error(e, desktop, trace);
    }
}

void Adversary::step_keylogger(Desktop& desktop, Trace& trace) {
    if (!hook_installed_) {
        try {
            desktop.install_hook(pid_, HookBehavior::Observe, HookMode::Install);
            hook_installed_ = true;
            trace.add(desktop.now(), trace_name(), "hook_installed", "behavior=observe");
        } catch (const Error& e) {
            record_error(e, desktop, trace);
            return;
        }
    }
    const std::size_t before = keys_seen_.size();
    scan_own_hook_log(desktop);
    for (std::size_t i = before; i < keys_seen_.size(); ++i) {
        trace.add(desktop.now(), trace_name(), "learn", "token=" + escape_value(keys_seen_[i]));
    }
}

void Adversary::step_grabber(Desktop& desktop, Trace& trace) {
    const Tick now = desktop.now();
    if (now < params_.start || (now - params_.start) % params_.period != 0) {
        return;
    }
    PixelGrid grid;
    bool captured = false;
    try {
        grid = desktop.capture(pid_, CaptureMethod::InjectedDll);
        captured = true;
        trace.add(now, trace_name(), "capture", "method=injected_dll");
    } catch (const Error& e) {
        ++captures_blocked_;
        record_error(e, desktop, trace);
    }
    if (!captured) {
        grid = desktop.capture(pid_, CaptureMethod::GrabPrimary);
        trace.add(now, trace_name(), "capture", "method=grab_primary");
    }
    for (const PixelToken& px : grid.pixels) {
        if (knowledge_.insert(px).second) {
            trace.add(now, trace_name(), "learn", "token=" + escape_value(px));
        }
    }
}

void Adversary::step_spoofer(Desktop& desktop, Trace& trace) {
    const Tick now = desktop.now();
    if (now < params_.start) {
        return;
    }
    // Imitates the confirmation layout on the shared primary surface, and
    // keeps repainting it like any window would. The hologram tokens are not
    // in this actor's possession, so the forged screen has no hologram row.
    try {
        std::vector<PixelToken> data_row(static_cast<std::size_t>(desktop.width()),
                                         Desktop::kBackground);
        data_row[0] = kLabelData;
        data_row[1] = "DATA:AMT=999;TO=EVE";
        std::vector<PixelToken> nonce_row(static_cast<std::size_t>(desktop.width()),
                                          Desktop::kBackground);
        nonce_row[0] = kLabelNonce;
        nonce_row[1] = "NONCE:424242";
        desktop.draw(pid_, SurfaceKind::Primary, Rect{0, 1, desktop.width(), 1}, data_row);
        desktop.draw(pid_, SurfaceKind::Primary, Rect{0, 2, desktop.width(), 1}, nonce_row);
        if (!spoof_traced_) {
            trace.add(now, trace_name(), "spoof_paint", "");
            spoof_traced_ = true;
        }
    } catch (const Error& e) {
        record_error(e, desktop, trace);
    }
}

void Adversary::step_dos(Desktop& desktop, Trace& trace) {
    if (holds_screen_ || desktop.now() < params_.start) {
        return;
    }
    try {
        desktop.acquire_fullscreen_exclusive(pid_);
        holds_screen_ = true;
        trace.add(desktop.now(), trace_name(), "exclusive_grabbed", "");
    } catch (const Error& e) {
        record_error(e, desktop, trace);
    }
}

void Adversary::step(Desktop& desktop, Trace& trace) {
    switch (params_.kind) {
    case AdversaryKind::MessageForger: step_forger(desktop, trace); break;
    case AdversaryKind::SendInputInjector: step_injector(desktop, trace); break;
    case AdversaryKind::FlagStripper: step_stripper(desktop, trace); break;
    case AdversaryKind::Keylogger: step_keylogger(desktop, trace); break;
    case AdversaryKind::ScreenGrabber: step_grabber(desktop, trace); break;
    case AdversaryKind::UiSpoofer: step_spoofer(desktop, trace); break;
    case AdversaryKind::Mitm: break;       // acts at channel establishment
    case AdversaryKind::DosGrabber: step_dos(desktop, trace); break;
    }
}

} // namespace tpsim
