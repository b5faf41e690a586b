// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include "tpsim/actors.hpp"
#include "tpsim/rng.hpp"

using namespace tpsim;

namespace {

UserView confirmation_view(const PixelToken& holo, const std::string& data,
                           const std::string& nonce_token, bool with_hologram_row = true) {
    UserView view;
    view.width = 8;
    view.height = 4;
    view.pixels.assign(32, "BG");
    if (with_hologram_row) {
        view.pixels[0] = kLabelHologram;
        view.pixels[1] = holo;
    }
    view.pixels[8] = kLabelData;
    view.pixels[9] = "DATA:" + data;
    view.pixels[16] = kLabelNonce;
    view.pixels[17] = nonce_token;
    return view;
}

UserActor make_user(const std::string& intent, Server& server) {
    UserConfig config;
    config.intent = intent;
    return UserActor(config, server.tan_table(), server.hologram(), server.user_solver(),
                     Rng(3));
}

} // namespace

TEST_CASE("the user confirms only a genuine screen showing the intended data") {
    Server server(ServerConfig{}, Rng(31));
    UserActor user = make_user("AMT=100;TO=X", server);
    const PixelToken frame = server.hologram()[1];

    SUBCASE("intent plus correct hologram yields the nonce-bound TAN") {
        const UserView view = confirmation_view(frame, "AMT=100;TO=X", "NONCE:7");
        const Decision d = user.user_decide(view, 7);
        CHECK(d.kind == Decision::Kind::Tan);
        CHECK(d.tan == server.tan_table().lookup(7));
    }
    SUBCASE("a manipulated amount is refused") {
        const UserView view = confirmation_view(frame, "AMT=900;TO=X", "NONCE:7");
        CHECK(user.user_decide(view, 7).kind == Decision::Kind::AbortBit);
    }
    SUBCASE("a missing hologram row is refused") {
        const UserView view = confirmation_view("", "AMT=100;TO=X", "NONCE:7", false);
        CHECK(user.user_decide(view, 7).kind == Decision::Kind::AbortBit);
    }
    SUBCASE("a wrong hologram token is refused") {
        const UserView view = confirmation_view("HOLO:fake:0", "AMT=100;TO=X", "NONCE:7");
        CHECK(user.user_decide(view, 7).kind == Decision::Kind::AbortBit);
    }
}

TEST_CASE("only the user can solve the server's challenge") {
    Server server(ServerConfig{100, true, 3}, Rng(32));
    UserActor user = make_user("AMT=1;TO=A", server);

    const DownloadBundle bundle = server.download_control(0);
    server.handle_frame(Frame{FrameType::Hello,
                              encode_fields({{"session", std::to_string(bundle.session_id)}})},
                        0, nullptr);
    server.stage_and_echo(bundle.session_id, "AMT=1;TO=A");
    const std::string challenge = server.issue_challenge(bundle.session_id);

    CHECK(server.verify_challenge(bundle.session_id, user.solve_challenge(challenge)));

    Server server2(ServerConfig{100, true, 3}, Rng(33));
    const DownloadBundle b2 = server2.download_control(0);
    server2.handle_frame(Frame{FrameType::Hello,
                               encode_fields({{"session", std::to_string(b2.session_id)}})},
                         0, nullptr);
    server2.stage_and_echo(b2.session_id, "X");
    const std::string c2 = server2.issue_challenge(b2.session_id);
    // A scripted response without the registration secret always fails.
    CHECK(!server2.verify_challenge(b2.session_id, "SOLVED:" + c2));
}

TEST_CASE("user keystrokes always carry hardware ground truth") {
    Server server(ServerConfig{}, Rng(34));
    UserConfig config;
    config.intent = "AMT=5;TO=B";
    config.start_delay = 1;
    UserActor user(config, server.tan_table(), server.hologram(), server.user_solver(), Rng(4));

    Desktop desktop{DesktopCapabilities{}};
    desktop.spawn_process(ProcessRole::Control);
    Trace trace;

    UserView input_screen;
    input_screen.width = 8;
    input_screen.height = 4;
    input_screen.pixels.assign(32, "BG");
    input_screen.pixels[8] = kLabelInput;
    input_screen.pixels[9] = "BG";

    for (int t = 0; t < 30; ++t) {
        user.step(desktop, input_screen, true, trace);
        desktop.advance_tick();
    }
    CHECK(!user.typing_schedule().empty());
    for (const InputEvent& ev : desktop.ground_truth_events()) {
        if (ev.lane == EventLane::Raw) {
            CHECK(ev.origin == InputOrigin::Hardware);
        }
    }
}

TEST_CASE("adversaries record environment refusals instead of crashing") {
    Desktop desktop(DesktopCapabilities{false, false, false}); // hooks off
    Trace trace;
    AdversaryParams params;
    params.kind = AdversaryKind::Keylogger;
    Adversary keylogger(params, Rng(5));
    keylogger.attach(desktop);
    keylogger.step(desktop, trace);
    REQUIRE(!keylogger.error_log().empty());
    CHECK(keylogger.error_log()[0] == Err::HooksDisabled);
}

TEST_CASE("the dos grabber wins the screen on a first-come basis") {
    Desktop desktop{DesktopCapabilities{}};
    Trace trace;
    AdversaryParams params;
    params.kind = AdversaryKind::DosGrabber;
    params.start = 0;
    Adversary dos(params, Rng(6));
    dos.attach(desktop);
    dos.step(desktop, trace);
    CHECK(desktop.fullscreen_owner() == dos.pid());

    const ProcessId control = desktop.spawn_process(ProcessRole::Control);
    CHECK_THROWS_AS(desktop.acquire_fullscreen_exclusive(control), Error);
}

TEST_CASE("a keylogger's knowledge grows with observed keys only") {
    Desktop desktop{DesktopCapabilities{}};
    desktop.spawn_process(ProcessRole::Control);
    Trace trace;
    AdversaryParams params;
    params.kind = AdversaryKind::Keylogger;
    Adversary keylogger(params, Rng(7));
    keylogger.attach(desktop);

    keylogger.step(desktop, trace); // installs the observe hook
    desktop.inject_input(InputSource::Hardware, "4");
    desktop.inject_input(InputSource::Hardware, "2");
    desktop.dispatch_raw_queue();
    desktop.advance_tick();
    keylogger.step(desktop, trace);

    CHECK(keylogger.knowledge().count("4") == 1);
    CHECK(keylogger.knowledge().count("2") == 1);
    CHECK(keylogger.knowledge().count("HOLO:x:0") == 0);
}

TEST_CASE("a blocked screen grabber falls back to the primary and learns nothing secret") {
    Desktop desktop{DesktopCapabilities{}}; // injection disabled
    const ProcessId control = desktop.spawn_process(ProcessRole::Control);
    desktop.acquire_fullscreen_exclusive(control);
    desktop.draw_fill(control, SurfaceKind::Primary, Rect{0, 0, desktop.width(), desktop.height()},
                      desktop.color_key());
    desktop.draw_fill(control, SurfaceKind::Overlay, Rect{0, 0, 2, 1}, "HOLO:a:0");

    Trace trace;
    AdversaryParams params;
    params.kind = AdversaryKind::ScreenGrabber;
    params.start = 0;
    params.period = 1;
    Adversary grabber(params, Rng(8));
    grabber.attach(desktop);
    grabber.step(desktop, trace);

    CHECK(grabber.captures_blocked() == 1);
    CHECK(grabber.knowledge().count("HOLO:a:0") == 0);
    CHECK(grabber.knowledge().count(desktop.color_key()) == 1);
}
