// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include "tpsim/control.hpp"
#include "tpsim/rng.hpp"
#include "tpsim/server.hpp"

using namespace tpsim;

namespace {

struct Rig {
    Desktop desktop{DesktopCapabilities{}};
    Server server{ServerConfig{}, Rng(77)};
    Trace trace;
    ProcessId adversary;

    Rig() { adversary = desktop.spawn_process(ProcessRole::Adversary); }

    Control make_control(ReadVariant variant, std::optional<Tick> renewal = std::nullopt) {
        ControlConfig config;
        config.variant = variant;
        config.hook_renewal_period = renewal;
        Control control(config, server.download_control(0));
        control.attach(desktop);
        return control;
    }

    static void walk_to_collecting(Control& control) {
        control.advance(ControlEvent::EstablishOk);
        control.advance(ControlEvent::HologramOk);
        control.advance(ControlEvent::ExclusiveOk);
        control.advance(ControlEvent::StartCollecting);
    }
};

} // namespace

TEST_CASE("the state machine takes exactly the documented edges") {
    Rig rig;
    Control control = rig.make_control(ReadVariant::DirectInput);

    SUBCASE("the happy path composes to Completed") {
        CHECK(control.advance(ControlEvent::EstablishOk) == ControlState::ChannelEstablished);
        CHECK(control.advance(ControlEvent::HologramOk) == ControlState::HologramFetched);
        CHECK(control.advance(ControlEvent::ExclusiveOk) == ControlState::ExclusiveAcquired);
        CHECK(control.advance(ControlEvent::StartCollecting) == ControlState::CollectingInput);
        CHECK(control.advance(ControlEvent::StageSent) == ControlState::AwaitingEcho);
        CHECK(control.advance(ControlEvent::EchoReceived) ==
              ControlState::DisplayingConfirmation);
        CHECK(control.advance(ControlEvent::ConfirmationRendered) ==
              ControlState::AwaitingDecision);
        CHECK(control.advance(ControlEvent::CommitReceived) == ControlState::Completed);
    }
    SUBCASE("an echo while collecting is an illegal transition") {
        Rig::walk_to_collecting(control);
        CHECK_THROWS_AS(control.advance(ControlEvent::EchoReceived), Error);
    }
    SUBCASE("abort and failure are legal from any live state") {
        control.advance(ControlEvent::EstablishOk);
        CHECK(control.advance(ControlEvent::UserAbort) == ControlState::Aborted);
        CHECK_THROWS_AS(control.advance(ControlEvent::StageSent), Error);
    }
}

TEST_CASE("direct input collection ignores forged messages") {
    Rig rig;
    Control control = rig.make_control(ReadVariant::DirectInput);
    Rig::walk_to_collecting(control);

    for (const char* key : {"1", "0", "0"}) {
        rig.desktop.inject_input(InputSource::Hardware, key);
    }
    rig.desktop.post_window_message(rig.adversary, *control.pid(), "9");
    rig.desktop.dispatch_raw_queue();
    control.poll_input_once(rig.desktop, rig.trace);

    CHECK(control.collected() == std::vector<KeyToken>{"1", "0", "0"});
}

TEST_CASE("message queue collection cannot tell forged input apart") {
    Rig rig;
    Control control = rig.make_control(ReadVariant::MessageQueue);
    Rig::walk_to_collecting(control);

    rig.desktop.post_window_message(rig.adversary, *control.pid(), "9");
    rig.desktop.inject_input(InputSource::Hardware, "1");
    rig.desktop.dispatch_raw_queue();
    control.poll_input_once(rig.desktop, rig.trace);

    CHECK(control.collected() == std::vector<KeyToken>{"9", "1"});
}

TEST_CASE("flagged synthesized input is excluded under direct input") {
    Rig rig;
    Control control = rig.make_control(ReadVariant::DirectInput);
    Rig::walk_to_collecting(control);

    rig.desktop.inject_input(InputSource::SendInput, "9", rig.adversary);
    rig.desktop.dispatch_raw_queue();
    control.poll_input_once(rig.desktop, rig.trace);

    CHECK(control.collected().empty());
    CHECK(control.counters().injected_excluded == 1);
}

TEST_CASE("async state accepts synthesized input as genuine") {
    Rig rig;
    Control control = rig.make_control(ReadVariant::AsyncState);
    Rig::walk_to_collecting(control);

    rig.desktop.inject_input(InputSource::SendInput, "9", rig.adversary);
    rig.desktop.dispatch_raw_queue();
    control.poll_input_once(rig.desktop, rig.trace);

    CHECK(control.collected() == std::vector<KeyToken>{"9"});
}

TEST_CASE("a stripper ahead of the control's hook lets injected input through") {
    Rig rig;
    Control control = rig.make_control(ReadVariant::DirectInput, 100);
    Rig::walk_to_collecting(control);

    // The control's hook went in first; the stripper renewed afterwards and
    // sits in front of it, so the control's observer already sees a cleared
    // flag. The confirmation protocol has to catch this downstream.
    rig.desktop.install_hook(*control.pid(), HookBehavior::Observe, HookMode::Install);
    rig.desktop.install_hook(rig.adversary, HookBehavior::Strip, HookMode::Install);
    rig.desktop.inject_input(InputSource::SendInput, "9", rig.adversary);
    rig.desktop.dispatch_raw_queue();
    control.poll_input_once(rig.desktop, rig.trace);
    CHECK(control.collected() == std::vector<KeyToken>{"9"});

    SUBCASE("after the control renews, the next injection is caught again") {
        rig.desktop.advance_tick();
        rig.desktop.install_hook(*control.pid(), HookBehavior::Observe, HookMode::Renew);
        rig.desktop.inject_input(InputSource::SendInput, "5", rig.adversary);
        rig.desktop.dispatch_raw_queue();
        control.poll_input_once(rig.desktop, rig.trace);
        CHECK(control.collected() == std::vector<KeyToken>{"9"});
        CHECK(control.counters().injected_excluded == 1);
    }
}

TEST_CASE("collection ends at the terminator; the abort key kills the session") {
    Rig rig;

    SUBCASE("terminator") {
        Control control = rig.make_control(ReadVariant::DirectInput);
        Rig::walk_to_collecting(control);
        for (const char* key : {"4", "2"}) {
            rig.desktop.inject_input(InputSource::Hardware, key);
        }
        rig.desktop.inject_input(InputSource::Hardware, kTerminatorKey);
        rig.desktop.dispatch_raw_queue();
        control.poll_input_once(rig.desktop, rig.trace);
        CHECK(control.state() == ControlState::AwaitingEcho);
        CHECK(control.collected() == std::vector<KeyToken>{"4", "2"});
    }
    SUBCASE("abort key") {
        Control control = rig.make_control(ReadVariant::DirectInput);
        Rig::walk_to_collecting(control);
        rig.desktop.inject_input(InputSource::Hardware, kAbortKey);
        rig.desktop.dispatch_raw_queue();
        control.poll_input_once(rig.desktop, rig.trace);
        CHECK(control.state() == ControlState::Aborted);
        CHECK(control.abort_reason() == AbortReason::UserAbort);
    }
}

TEST_CASE("collect_input renews the control's hook before it overages") {
    Rig rig;
    Control control = rig.make_control(ReadVariant::DirectInput, 100);
    Rig::walk_to_collecting(control);

    control.collect_input(rig.desktop, 350, rig.trace);

    // Reconstruct hook age at every dispatch tick from the renewal events.
    Tick last_renew = 0;
    for (const TraceEvent& ev : rig.trace.events()) {
        if (ev.actor == "control" && ev.op == "hook_renewed") {
            CHECK(ev.tick - last_renew <= 100);
            last_renew = ev.tick;
        }
    }
    CHECK(last_renew >= 200); // renewals actually happened
    const auto hook = rig.desktop.hook_of(*control.pid());
    REQUIRE(hook.has_value());
    CHECK(rig.desktop.now() - hook->installed_at <= 100);
}

TEST_CASE("collect_input with renewal demands the hook capability") {
    Desktop desktop(DesktopCapabilities{false, false, false});
    Server server(ServerConfig{}, Rng(78));
    Trace trace;
    ControlConfig config;
    config.variant = ReadVariant::DirectInput;
    config.hook_renewal_period = 100;
    Control control(config, server.download_control(0));
    control.attach(desktop);
    Rig::walk_to_collecting(control);
    CHECK_THROWS_AS(control.collect_input(desktop, 10, trace), Error);
}

TEST_CASE("the confirmation screen shows the echo under the cycling hologram") {
    Rig rig;
    Server& server = rig.server;
    ControlConfig config;
    config.variant = ReadVariant::DirectInput;
    Control control(config, server.download_control(0));
    control.attach(rig.desktop);

    auto conduit = make_conduit(TransportKind::InProcess);
    // Feed the hologram in through the protocol so the control holds frames.
    control.step(rig.desktop, *conduit, rig.trace); // HELLO out
    for (const Frame& f : conduit->poll(ConduitEnd::Server)) {
        for (const Frame& r : server.handle_frame(f, 0, &rig.trace)) {
            conduit->send(ConduitEnd::Server, r);
        }
    }
    rig.desktop.advance_tick();
    control.step(rig.desktop, *conduit, rig.trace); // CERT in, HOLOGRAM_REQ out
    for (const Frame& f : conduit->poll(ConduitEnd::Server)) {
        for (const Frame& r : server.handle_frame(f, 1, &rig.trace)) {
            conduit->send(ConduitEnd::Server, r);
        }
    }
    rig.desktop.advance_tick();
    control.step(rig.desktop, *conduit, rig.trace); // HOLOGRAM_DATA in, acquire, collect
    CHECK(control.state() == ControlState::CollectingInput);

    // Type the transaction and finish the exchange through the protocol.
    for (char c : std::string("AMT=100;TO=X")) {
        rig.desktop.inject_input(InputSource::Hardware, std::string(1, c));
    }
    rig.desktop.inject_input(InputSource::Hardware, kTerminatorKey);
    rig.desktop.dispatch_raw_queue();
    control.step(rig.desktop, *conduit, rig.trace); // STAGE out
    CHECK(control.state() == ControlState::AwaitingEcho);
    for (const Frame& f : conduit->poll(ConduitEnd::Server)) {
        for (const Frame& r : server.handle_frame(f, 2, &rig.trace)) {
            conduit->send(ConduitEnd::Server, r);
        }
    }
    rig.desktop.advance_tick();
    control.step(rig.desktop, *conduit, rig.trace); // ECHO in, render
    CHECK(control.state() == ControlState::AwaitingDecision);
    REQUIRE(control.echo().has_value());
    const std::string nonce_token = "NONCE:" + std::to_string(control.echo()->nonce);

    const UserView view = rig.desktop.compose_user_view();
    bool saw_data = false;
    bool saw_nonce = false;
    for (int y = 0; y < view.height; ++y) {
        for (int x = 0; x + 1 < view.width; ++x) {
            if (view.at(x, y) == kLabelData) {
                saw_data = true;
                CHECK(view.at(x + 1, y) == "DATA:AMT=100;TO=X");
            }
            if (view.at(x, y) == kLabelNonce) {
                saw_nonce = true;
                CHECK(view.at(x + 1, y) == nonce_token);
            }
        }
    }
    CHECK(saw_data);
    CHECK(saw_nonce);

    // Hologram frames cycle with the clock, index = tick mod frame count.
    // step() repaints the confirmation every tick while awaiting a decision.
    const Hologram& holo = server.hologram();
    for (int i = 0; i < 6; ++i) {
        control.step(rig.desktop, *conduit, rig.trace);
        const UserView v = rig.desktop.compose_user_view();
        bool found = false;
        for (int y = 0; y < v.height && !found; ++y) {
            for (int x = 0; x + 1 < v.width && !found; ++x) {
                if (v.at(x, y) == kLabelHologram) {
                    CHECK(v.at(x + 1, y) ==
                          holo[static_cast<std::size_t>(rig.desktop.now()) % holo.size()]);
                    found = true;
                }
            }
        }
        CHECK(found);
        rig.desktop.advance_tick();
    }

    // An adversary grabbing the primary surface sees only the color key.
    const PixelGrid grid = rig.desktop.capture(rig.adversary, CaptureMethod::GrabPrimary);
    for (const PixelToken& px : grid.pixels) {
        CHECK(px == rig.desktop.color_key());
    }
}

TEST_CASE("render_confirmation demands display state and screen ownership") {
    Rig rig;
    Control control = rig.make_control(ReadVariant::DirectInput);
    CHECK_THROWS_AS(control.render_confirmation(rig.desktop), Error);

    Rig::walk_to_collecting(control);
    control.advance(ControlEvent::StageSent);
    control.advance(ControlEvent::EchoReceived);
    try {
        control.render_confirmation(rig.desktop); // nobody owns the screen
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Err::NotOwner);
    }
}

TEST_CASE("forward_decision sends the TAN or aborts") {
    Rig rig;
    auto conduit = make_conduit(TransportKind::InProcess);

    SUBCASE("outside AwaitingDecision it is illegal") {
        Control control = rig.make_control(ReadVariant::DirectInput);
        CHECK_THROWS_AS(
            control.forward_decision(Decision::make_tan("AAAA"), rig.desktop, *conduit,
                                     rig.trace),
            Error);
    }
    SUBCASE("the abort bit sends ABORT and lands in Aborted") {
        Control control = rig.make_control(ReadVariant::DirectInput);
        Rig::walk_to_collecting(control);
        control.advance(ControlEvent::StageSent);
        control.advance(ControlEvent::EchoReceived);
        control.advance(ControlEvent::ConfirmationRendered);
        control.forward_decision(Decision::abort_bit(), rig.desktop, *conduit, rig.trace);
        CHECK(control.state() == ControlState::Aborted);
        CHECK(control.abort_reason() == AbortReason::UserAbort);
    }
}
