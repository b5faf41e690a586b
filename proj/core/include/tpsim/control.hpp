// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tpsim/channel.hpp"
#include "tpsim/env.hpp"
#include "tpsim/server.hpp"
#include "tpsim/trace.hpp"
#include "tpsim/transport.hpp"
#include "tpsim/types.hpp"

namespace tpsim {

// Client-side trusted-path control. Downloads carry a client key and the
// server's certificate pin; the control fetches its hologram over the
// established channel, takes exclusive fullscreen output, collects input
// through a configurable provenance-filtering variant, and mediates the
// echo/confirm/TAN exchange.

enum class ControlState {
    Downloaded,
    ChannelEstablished,
    HologramFetched,
    ExclusiveAcquired,
    CollectingInput,
    AwaitingEcho,
    DisplayingConfirmation,
    AwaitingDecision,
    Completed,
    Aborted,
};

enum class ControlEvent {
    EstablishOk,
    HologramOk,
    ExclusiveOk,
    StartCollecting,
    StageSent,
    EchoReceived,
    ConfirmationRendered,
    CommitReceived,
    UserAbort,
    Failure,
};

enum class AbortReason {
    None,
    UserAbort,
    ServerReject,
    AlreadyOwned,
    CertMismatch,
    AuthFailure,
    ChannelError,
};

const char* control_state_name(ControlState s);
const char* abort_reason_name(AbortReason r);

struct Decision {
    enum class Kind { Tan, AbortBit } kind = Kind::AbortBit;
    std::string tan;

    static Decision make_tan(std::string tan) { return {Kind::Tan, std::move(tan)}; }
    static Decision abort_bit() { return {Kind::AbortBit, ""}; }
};

// Screen vocabulary. The confirmation regions are labeled rows, so the user
// locates them by label even when the layout permutation flag is on.
inline const PixelToken kLabelHologram = "LBL:HOLO";
inline const PixelToken kLabelData = "LBL:DATA";
inline const PixelToken kLabelNonce = "LBL:NONCE";
inline const PixelToken kLabelChallenge = "LBL:CHLG";
inline const PixelToken kLabelInput = "LBL:INPUT";
inline const PixelToken kLabelWait = "LBL:WAIT";

struct ControlConfig {
    ReadVariant variant = ReadVariant::DirectInput;
    std::optional<Tick> hook_renewal_period = 100;
    bool permute_regions = false;
    std::uint64_t layout_seed = 0;
};

struct ControlCounters {
    std::uint64_t injected_excluded = 0;  // flagged events dropped at collection
    std::uint64_t tampers_repaired = 0;   // non-key pixels found in own region
};

class Control {
public:
    Control(const ControlConfig& config, const DownloadBundle& bundle);

    ControlState state() const { return state_; }
    AbortReason abort_reason() const { return abort_reason_; }
    std::uint64_t session_id() const { return bundle_.session_id; }
    const std::vector<KeyToken>& collected() const { return collected_; }
    const std::optional<EchoPacket>& echo() const { return echo_; }
    const ControlCounters& counters() const { return counters_; }
    std::optional<ProcessId> pid() const { return pid_; }

    // State machine step per the edge list; throws IllegalTransition for a
    // pair outside it. UserAbort and Failure are legal from every
    // non-terminal state and land in Aborted.
    ControlState advance(ControlEvent event);

    // Binds the control to its desktop process. Must precede step().
    void attach(Desktop& desktop);

    // One simulation tick: poll the channel, perform at most one protocol
    // action, repaint the owned screen.
    void step(Desktop& desktop, FrameConduit& conduit, Trace& trace);

    // Reads input once through the configured variant, applying the
    // provenance filter; collected keys accumulate until the terminator.
    void poll_input_once(Desktop& desktop, Trace& trace);

    // Convenience loop for driving collection standalone: dispatches the raw
    // queue, polls once and advances the clock, `duration` times.
    std::vector<KeyToken> collect_input(Desktop& desktop, Tick duration, Trace& trace);

    // Paints the confirmation screen: color key over the primary region,
    // hologram frame (cycled per tick), echoed data and nonce on the overlay.
    void render_confirmation(Desktop& desktop);

    void forward_decision(const Decision& decision, Desktop& desktop, FrameConduit& conduit,
                          Trace& trace);

    // The single trusted input bit: abort from any live state.
    void user_abort(Desktop& desktop, FrameConduit& conduit, Trace& trace);

    bool displaying() const {
        return state_ == ControlState::DisplayingConfirmation ||
               state_ == ControlState::AwaitingDecision;
    }
    bool owns_overlay() const { return owns_overlay_; }

private:
    struct FilteredKey {
        std::uint64_t event_id;
        KeyToken key;
    };

    void fail(Desktop& desktop, AbortReason reason, Trace& trace, FrameConduit* conduit);
    void handle_inbox(Desktop& desktop, FrameConduit& conduit, Trace& trace);
    std::vector<FilteredKey> read_filtered(Desktop& desktop, Trace& trace);
    void refresh_own_capture_log(Desktop& desktop);
    void maybe_renew_hook(Desktop& desktop, Trace& trace);
    void paint(Desktop& desktop);
    void paint_row(Desktop& desktop, int row, const PixelToken& label, const PixelToken& value);
    int region_row(int logical) const;
    void release_if_owner(Desktop& desktop);

    ControlConfig config_;
    DownloadBundle bundle_;
    ControlState state_ = ControlState::Downloaded;
    AbortReason abort_reason_ = AbortReason::None;
    ControlCounters counters_;

    std::optional<ProcessId> pid_;
    std::optional<SecureChannel> channel_;
    Hologram hologram_;
    std::optional<EchoPacket> echo_;
    std::optional<std::string> challenge_;
    bool challenge_resp_sent_ = false;
    bool tan_sent_ = false;
    bool hello_sent_ = false;
    bool hologram_requested_ = false;
    bool owns_overlay_ = false;
    bool painted_once_ = false;

    FrameConduit* conduit_ = nullptr; // set by step(); null in standalone use
    std::vector<KeyToken> collected_;
    std::string field_buffer_;
    std::map<std::uint64_t, bool> own_observed_flags_;
    std::size_t own_log_scanned_ = 0;
    std::vector<int> row_order_ = {0, 1, 2, 3};
};

} // namespace tpsim
