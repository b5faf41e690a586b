// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include "tpsim/control.hpp"

#include <algorithm>

#include "tpsim/rng.hpp"

namespace tpsim {

const char* control_state_name(ControlState s) {
    switch (s) {
    case ControlState::Downloaded: return "Downloaded";
    case ControlState::ChannelEstablished: return "ChannelEstablished";
    case ControlState::HologramFetched: return "HologramFetched";
    case ControlState::ExclusiveAcquired: return "ExclusiveAcquired";
    case ControlState::CollectingInput: return "CollectingInput";
    case ControlState::AwaitingEcho: return "AwaitingEcho";
    case ControlState::DisplayingConfirmation: return "DisplayingConfirmation";
    case ControlState::AwaitingDecision: return "AwaitingDecision";
    case ControlState::Completed: return "Completed";
    case ControlState::Aborted: return "Aborted";
    }
    return "?";
}

const char* abort_reason_name(AbortReason r) {
    switch (r) {
    case AbortReason::None: return "none";
    case AbortReason::UserAbort: return "user_abort";
    case AbortReason::ServerReject: return "server_reject";
    case AbortReason::AlreadyOwned: return "already_owned";
    case AbortReason::CertMismatch: return "cert_mismatch";
    case AbortReason::AuthFailure: return "auth_failure";
    case AbortReason::ChannelError: return "channel_error";
    }
    return "?";
}

Control::Control(const ControlConfig& config, const DownloadBundle& bundle)
    : config_(config), bundle_(bundle) {
    if (config_.permute_regions) {
        Rng rng(config_.layout_seed);
        for (std::size_t i = row_order_.size(); i > 1; --i) {
            std::swap(row_order_[i - 1], row_order_[rng.below(i)]);
        }
    }
}

ControlState Control::advance(ControlEvent event) {
    const bool terminal = state_ == ControlState::Completed || state_ == ControlState::Aborted;
    if (!terminal && (event == ControlEvent::UserAbort || event == ControlEvent::Failure)) {
        state_ = ControlState::Aborted;
        return state_;
    }
    auto legal = [&](ControlState from, ControlEvent ev, ControlState to) {
        if (state_ == from && event == ev) {
            state_ = to;
            return true;
        }
        return false;
    };
    if (legal(ControlState::Downloaded, ControlEvent::EstablishOk,
              ControlState::ChannelEstablished) ||
        legal(ControlState::ChannelEstablished, ControlEvent::HologramOk,
              ControlState::HologramFetched) ||
        legal(ControlState::HologramFetched, ControlEvent::ExclusiveOk,
              ControlState::ExclusiveAcquired) ||
        legal(ControlState::ExclusiveAcquired, ControlEvent::StartCollecting,
              ControlState::CollectingInput) ||
        legal(ControlState::CollectingInput, ControlEvent::StageSent,
              ControlState::AwaitingEcho) ||
        legal(ControlState::AwaitingEcho, ControlEvent::EchoReceived,
              ControlState::DisplayingConfirmation) ||
        legal(ControlState::DisplayingConfirmation, ControlEvent::ConfirmationRendered,
              ControlState::AwaitingDecision) ||
        legal(ControlState::AwaitingDecision, ControlEvent::CommitReceived,
              ControlState::Completed)) {
        return state_;
    }
    throw Error(Err::IllegalTransition, std::string(control_state_name(state_)) + " cannot take " +
                                            std::to_string(static_cast<int>(event)));
}

void Control::attach(Desktop& desktop) { pid_ = desktop.spawn_process(ProcessRole::Control); }

void Control::release_if_owner(Desktop& desktop) {
    if (owns_overlay_ && pid_ && desktop.fullscreen_owner() == *pid_) {
        desktop.release_fullscreen(*pid_);
    }
    owns_overlay_ = false;
}

void Control::fail(Desktop& desktop, AbortReason reason, Trace& trace, FrameConduit* conduit) {
    if (state_ == ControlState::Completed || state_ == ControlState::Aborted) {
        return;
    }
    release_if_owner(desktop);
    if (channel_ && channel_->established && conduit) {
        conduit->send(ConduitEnd::Client,
                      Frame{FrameType::Abort,
                            encode_fields({{"reason", abort_reason_name(reason)}})});
    }
    abort_reason_ = reason;
    advance(reason == AbortReason::UserAbort ? ControlEvent::UserAbort : ControlEvent::Failure);
    trace.add(desktop.now(), "control", "abort",
              std::string("reason=") + abort_reason_name(reason));
}

void Control::user_abort(Desktop& desktop, FrameConduit& conduit, Trace& trace) {
    fail(desktop, AbortReason::UserAbort, trace, &conduit);
}

void Control::handle_inbox(Desktop& desktop, FrameConduit& conduit, Trace& trace) {
    for (const Frame& frame : conduit.poll(ConduitEnd::Client)) {
        switch (frame.type) {
        case FrameType::Cert: {
            if (state_ != ControlState::Downloaded) {
                break;
            }
            const FieldList fields = parse_fields(frame.payload);
            Certificate presented{field_value(fields, "subject"), field_value(fields, "fp")};
            try {
                channel_ = establish_channel(bundle_.session_id, bundle_.pinned_fingerprint,
                                             presented);
                trace.add(desktop.now(), "control", "cert_ok", "fp=" + presented.fingerprint);
                advance(ControlEvent::EstablishOk);
            } catch (const CertMismatchError& e) {
                trace.add(desktop.now(), "control", "cert_mismatch",
                          "expected=" + e.expected() + ";presented=" + e.presented());
                fail(desktop, AbortReason::CertMismatch, trace, nullptr);
            }
            break;
        }
        case FrameType::HologramData: {
            if (state_ != ControlState::ChannelEstablished) {
                break;
            }
            hologram_.clear();
            const std::string joined = field_value(parse_fields(frame.payload), "frames");
            std::size_t pos = 0;
            while (pos <= joined.size() && !joined.empty()) {
                std::size_t end = joined.find(',', pos);
                if (end == std::string::npos) {
                    end = joined.size();
                }
                hologram_.push_back(joined.substr(pos, end - pos));
                if (end == joined.size()) {
                    break;
                }
                pos = end + 1;
            }
            trace.add(desktop.now(), "control", "hologram_fetched",
                      "frames=" + std::to_string(hologram_.size()));
            advance(ControlEvent::HologramOk);
            break;
        }
        case FrameType::Echo: {
            if (state_ != ControlState::AwaitingEcho) {
                break;
            }
            const FieldList fields = parse_fields(frame.payload);
            echo_ = EchoPacket{
                field_value(fields, "data"),
                static_cast<std::uint32_t>(std::stoul(field_value(fields, "nonce")))};
            trace.add(desktop.now(), "control", "echo_received",
                      "data=" + escape_value(echo_->data) +
                          ";nonce=" + std::to_string(echo_->nonce));
            advance(ControlEvent::EchoReceived);
            break;
        }
        case FrameType::Challenge: {
            challenge_ = field_value(parse_fields(frame.payload), "token");
            trace.add(desktop.now(), "control", "challenge_received", "");
            break;
        }
        case FrameType::Commit: {
            if (state_ == ControlState::AwaitingDecision && tan_sent_) {
                advance(ControlEvent::CommitReceived);
                release_if_owner(desktop);
                trace.add(desktop.now(), "control", "completed", "");
            }
            break;
        }
        case FrameType::Abort: {
            const std::string reason = field_value(parse_fields(frame.payload), "reason");
            fail(desktop,
                 reason == "auth_failure" ? AbortReason::AuthFailure : AbortReason::ServerReject,
                 trace, nullptr);
            break;
        }
        default:
            trace.add(desktop.now(), "control", "unexpected_frame",
                      std::string("type=") + frame_type_name(frame.type));
            break;
        }
        if (state_ == ControlState::Aborted) {
            break;
        }
    }
}

void Control::refresh_own_capture_log(Desktop& desktop) {
    const auto& log = desktop.capture_log(*pid_);
    for (; own_log_scanned_ < log.size(); ++own_log_scanned_) {
        const HookCapture& cap = log[own_log_scanned_];
        own_observed_flags_[cap.event_id] = cap.injected;
    }
}

void Control::maybe_renew_hook(Desktop& desktop, Trace& trace) {
    if (!config_.hook_renewal_period || !pid_) {
        return;
    }
    const auto hook = desktop.hook_of(*pid_);
    if (!hook) {
        return;
    }
    if (desktop.now() - hook->installed_at >= *config_.hook_renewal_period) {
        desktop.install_hook(*pid_, HookBehavior::Observe, HookMode::Renew);
        trace.add(desktop.now(), "control", "hook_renewed", "");
    }
}

std::vector<Control::FilteredKey> Control::read_filtered(Desktop& desktop, Trace& trace) {
    std::vector<FilteredKey> keys;
    if (config_.variant == ReadVariant::DirectInput) {
        refresh_own_capture_log(desktop);
    }
    for (const ObservedInput& ev : desktop.read_input(*pid_, config_.variant)) {
        if (config_.variant == ReadVariant::DirectInput) {
            // Trust the flag our own hook saw before anything downstream in
            // the chain could touch it; fall back to the event's flag.
            bool flagged = ev.injected.value_or(false);
            auto it = own_observed_flags_.find(ev.id);
            if (it != own_observed_flags_.end()) {
                flagged = flagged || it->second;
            }
            if (flagged) {
                ++counters_.injected_excluded;
                trace.add(desktop.now(), "control", "input_excluded",
                          "key=" + escape_value(ev.key) + ";event=" + std::to_string(ev.id));
                continue;
            }
        }
        keys.push_back(FilteredKey{ev.id, ev.key});
    }
    return keys;
}

void Control::poll_input_once(Desktop& desktop, Trace& trace) {
    if (state_ != ControlState::CollectingInput && state_ != ControlState::AwaitingDecision) {
        return;
    }
    for (const FilteredKey& fk : read_filtered(desktop, trace)) {
        if (fk.key == kAbortKey) {
            // The single trusted input bit.
            fail(desktop, AbortReason::UserAbort, trace, conduit_);
            return;
        }
        if (state_ == ControlState::CollectingInput) {
            if (fk.key == kTerminatorKey) {
                std::string data;
                for (const KeyToken& k : collected_) {
                    data += k;
                }
                if (conduit_) {
                    conduit_->send(ConduitEnd::Client, Frame{FrameType::Stage, data});
                }
                advance(ControlEvent::StageSent);
                trace.add(desktop.now(), "control", "stage_sent", "data=" + escape_value(data));
                return; // anything after the terminator in this batch is stale
            }
            collected_.push_back(fk.key);
            trace.add(desktop.now(), "control", "collect",
                      "key=" + escape_value(fk.key) + ";event=" + std::to_string(fk.event_id));
        } else { // AwaitingDecision
            if (fk.key == kTerminatorKey) {
                if (challenge_ && !challenge_resp_sent_) {
                    if (conduit_) {
                        conduit_->send(ConduitEnd::Client,
                                       Frame{FrameType::ChallengeResp,
                                             encode_fields({{"resp", field_buffer_}})});
                    }
                    challenge_resp_sent_ = true;
                    trace.add(desktop.now(), "control", "challenge_resp_sent", "");
                } else if (!tan_sent_ && conduit_) {
                    forward_decision(Decision::make_tan(field_buffer_), desktop, *conduit_,
                                     trace);
                }
                field_buffer_.clear();
            } else {
                field_buffer_ += fk.key;
            }
        }
    }
}

std::vector<KeyToken> Control::collect_input(Desktop& desktop, Tick duration, Trace& trace) {
    if (state_ != ControlState::CollectingInput) {
        throw Error(Err::IllegalTransition, "collect_input outside CollectingInput");
    }
    if (config_.hook_renewal_period) {
        if (!desktop.capabilities().hooks_enabled) {
            throw Error(Err::HooksDisabled, "hook renewal requested with hooks disabled");
        }
        if (!desktop.hook_of(*pid_)) {
            desktop.install_hook(*pid_, HookBehavior::Observe, HookMode::Install);
        }
    }
    for (Tick t = 0; t < duration && state_ == ControlState::CollectingInput; ++t) {
        desktop.dispatch_raw_queue();
        maybe_renew_hook(desktop, trace);
        poll_input_once(desktop, trace);
        desktop.advance_tick();
    }
    return collected_;
}

int Control::region_row(int logical) const {
    for (int row = 0; row < static_cast<int>(row_order_.size()); ++row) {
        if (row_order_[static_cast<std::size_t>(row)] == logical) {
            return row;
        }
    }
    return logical;
}

void Control::paint_row(Desktop& desktop, int row, const PixelToken& label,
                        const PixelToken& value) {
    std::vector<PixelToken> tokens(static_cast<std::size_t>(desktop.width()),
                                   Desktop::kBackground);
    tokens[0] = label;
    tokens[1] = value;
    desktop.draw(*pid_, SurfaceKind::Overlay, Rect{0, row, desktop.width(), 1}, tokens);
}

void Control::paint(Desktop& desktop) {
    if (!owns_overlay_) {
        return;
    }
    const Rect full{0, 0, desktop.width(), desktop.height()};
    if (painted_once_) {
        bool tampered = false;
        for (const PixelToken& px : desktop.primary().pixels()) {
            if (px != desktop.color_key()) {
                tampered = true;
                break;
            }
        }
        if (tampered) {
            ++counters_.tampers_repaired;
        }
    }
    desktop.draw_fill(*pid_, SurfaceKind::Primary, full, desktop.color_key());
    desktop.draw_fill(*pid_, SurfaceKind::Overlay, full, Desktop::kBackground);
    painted_once_ = true;

    const PixelToken frame =
        hologram_.empty()
            ? Desktop::kBackground
            : hologram_[static_cast<std::size_t>(desktop.now()) % hologram_.size()];

    if (displaying()) {
        paint_row(desktop, region_row(0), kLabelHologram, frame);
        paint_row(desktop, region_row(1), kLabelData, "DATA:" + echo_->data);
        paint_row(desktop, region_row(2), kLabelNonce, "NONCE:" + std::to_string(echo_->nonce));
        if (challenge_) {
            paint_row(desktop, region_row(3), kLabelChallenge, *challenge_);
        }
    } else if (state_ == ControlState::CollectingInput) {
        paint_row(desktop, 0, kLabelHologram, frame);
        paint_row(desktop, 1, kLabelInput, Desktop::kBackground);
    } else {
        paint_row(desktop, 0, kLabelHologram, frame);
        paint_row(desktop, 1, kLabelWait, Desktop::kBackground);
    }
}

void Control::render_confirmation(Desktop& desktop) {
    if (state_ != ControlState::DisplayingConfirmation) {
        throw Error(Err::IllegalTransition, "render_confirmation outside DisplayingConfirmation");
    }
    if (!pid_ || desktop.fullscreen_owner() != *pid_) {
        throw Error(Err::NotOwner, "confirmation requires fullscreen ownership");
    }
    paint(desktop);
}

void Control::forward_decision(const Decision& decision, Desktop& desktop, FrameConduit& conduit,
                               Trace& trace) {
    if (state_ != ControlState::AwaitingDecision) {
        throw Error(Err::IllegalTransition, "forward_decision outside AwaitingDecision");
    }
    if (decision.kind == Decision::Kind::AbortBit) {
        fail(desktop, AbortReason::UserAbort, trace, &conduit);
        return;
    }
    conduit.send(ConduitEnd::Client,
                 Frame{FrameType::Tan, encode_fields({{"nonce", std::to_string(echo_->nonce)},
                                                      {"tan", decision.tan}})});
    tan_sent_ = true;
    trace.add(desktop.now(), "control", "tan_forwarded", "tan=" + escape_value(decision.tan));
}

void Control::step(Desktop& desktop, FrameConduit& conduit, Trace& trace) {
    conduit_ = &conduit;
    if (state_ == ControlState::Completed || state_ == ControlState::Aborted) {
        return;
    }
    maybe_renew_hook(desktop, trace);
    handle_inbox(desktop, conduit, trace);

    try {
        switch (state_) {
        case ControlState::Downloaded:
            if (!hello_sent_) {
                conduit.send(ConduitEnd::Client,
                             Frame{FrameType::Hello,
                                   encode_fields(
                                       {{"session", std::to_string(bundle_.session_id)}})});
                hello_sent_ = true;
            }
            break;
        case ControlState::ChannelEstablished:
            if (!hologram_requested_) {
                conduit.send(ConduitEnd::Client,
                             Frame{FrameType::HologramReq,
                                   encode_fields({{"session", std::to_string(bundle_.session_id)},
                                                  {"key", bundle_.key.key_id}})});
                hologram_requested_ = true;
            }
            break;
        case ControlState::HologramFetched:
            try {
                desktop.acquire_fullscreen_exclusive(*pid_);
                owns_overlay_ = true;
                advance(ControlEvent::ExclusiveOk);
                trace.add(desktop.now(), "control", "exclusive_acquired", "");
                desktop.snap_input_cursor(*pid_, config_.variant);
                if (config_.hook_renewal_period) {
                    desktop.install_hook(*pid_, HookBehavior::Observe, HookMode::Install);
                    trace.add(desktop.now(), "control", "hook_installed", "");
                }
                advance(ControlEvent::StartCollecting);
            } catch (const Error& e) {
                if (e.code() == Err::AlreadyOwned) {
                    trace.add(desktop.now(), "control", "exclusive_denied", "");
                    fail(desktop, AbortReason::AlreadyOwned, trace, &conduit);
                } else {
                    throw;
                }
            }
            break;
        case ControlState::CollectingInput:
        case ControlState::AwaitingDecision:
            poll_input_once(desktop, trace);
            break;
        case ControlState::DisplayingConfirmation:
            render_confirmation(desktop);
            advance(ControlEvent::ConfirmationRendered);
            trace.add(desktop.now(), "control", "confirmation_rendered", "");
            break;
        default:
            break;
        }
    } catch (const Error&) {
        fail(desktop, AbortReason::ChannelError, trace, &conduit);
    }

    paint(desktop);
}

} // namespace tpsim
