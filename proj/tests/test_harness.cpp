// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "tpsim/properties.hpp"
#include "tpsim/rng.hpp"
#include "tpsim/scenario.hpp"
#include "tpsim/simulation.hpp"

using namespace tpsim;

TEST_CASE("a minimal scenario file yields the full default config") {
    const ScenarioConfig config = load_scenario("attack=none\n");
    CHECK(config.attacks.empty());
    CHECK(config.input_variant == ReadVariant::DirectInput);
    CHECK(config.hook_renewal_period == 100);
    CHECK(config.tan_table_size == 100);
    CHECK(config.transport == TransportKind::InProcess);
    CHECK(config.intent == "AMT=100;TO=X");
}

TEST_CASE("scenario parsing is strict") {
    SUBCASE("unknown keys are rejected with the line number") {
        try {
            load_scenario("attack=none\nbogus_key=1\n");
            CHECK(false);
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("renewal without hooks is a constraint error") {
        try {
            load_scenario("hook_renewal_period=100\nhooks_enabled=false\n");
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.code() == Err::ConstraintError);
        }
    }
    SUBCASE("injection capability implies hooks") {
        CHECK_THROWS_AS(load_scenario("hooks_enabled=false\nhook_renewal_period=disabled\n"
                                      "code_injection_enabled=true\n"),
                        Error);
    }
    SUBCASE("comments, blank lines and attack lists parse") {
        const ScenarioConfig config = load_scenario(
            "# comment\n\nattack=keylogger,sendinput_injector\nadversary_replay_tan=true\n"
            "transactions=2\n");
        REQUIRE(config.attacks.size() == 2);
        CHECK(config.attacks[0] == AdversaryKind::Keylogger);
        CHECK(config.attacks[1] == AdversaryKind::SendInputInjector);
    }
    SUBCASE("replay demands two transactions") {
        CHECK_THROWS_AS(load_scenario("adversary_replay_tan=true\n"), Error);
    }
}

TEST_CASE("identical config and seed produce byte-identical reports") {
    ScenarioConfig config = load_scenario("attack=message_forger\ninput_variant=message_queue\n");
    config.seed = 99;
    const Report a = run_scenario(config);
    const Report b = run_scenario(config);
    CHECK(a.to_text() == b.to_text());
    CHECK(a.to_json() == b.to_json());

    SUBCASE("and across transports") {
        ScenarioConfig socket_config = config;
        socket_config.transport = TransportKind::LoopbackSocket;
        const Report c = run_scenario(socket_config);
        CHECK(a.to_text() == c.to_text());
        CHECK(a.to_json() == c.to_json());
    }
}

TEST_CASE("an empty adversary trace satisfies every property") {
    Trace trace;
    const PropertyMatrix matrix = evaluate_properties(trace);
    CHECK(matrix.p1 == Verdict::Holds);
    CHECK(matrix.p2 == Verdict::Holds);
    CHECK(matrix.p3 == Verdict::Holds);
    CHECK(matrix.p4 == Verdict::Holds);
    CHECK(matrix.p5 == Verdict::Holds);
}

TEST_CASE("property evaluation reads verdicts straight from trace records") {
    Trace trace;
    trace.add(0, "harness", "intent", "value=GOOD");
    trace.add(0, "harness", "secret", "token=HOLO:s:0");

    SUBCASE("a presented frame that diverged from the overlay breaks p1") {
        trace.add(5, "env", "present", "display=1;match=0");
        CHECK(evaluate_properties(trace).p1 == Verdict::Violated);
    }
    SUBCASE("a TAN typed into a spoofed screen breaks p2") {
        trace.add(5, "user", "decide", "screen=spoof;choice=tan;nonce=NONCE:1");
        CHECK(evaluate_properties(trace).p2 == Verdict::Violated);
    }
    SUBCASE("an adversary learning a secret breaks p3") {
        trace.add(5, "adv:screen_grabber", "learn", "token=HOLO:s:0");
        CHECK(evaluate_properties(trace).p3 == Verdict::Violated);
    }
    SUBCASE("a commit of manipulated data breaks p4") {
        trace.add(5, "server", "finalize", "session=1;outcome=commit;data=EVIL");
        CHECK(evaluate_properties(trace).p4 == Verdict::Violated);
    }
    SUBCASE("denial of exclusivity marks p5 as not prevented") {
        trace.add(5, "control", "abort", "reason=already_owned");
        CHECK(evaluate_properties(trace).p5 == Verdict::NotPrevented);
    }
}

TEST_CASE("the trace is stable line-oriented text") {
    ScenarioConfig config = load_scenario("attack=none\n");
    config.seed = 5;
    const RunArtifacts artifacts = run_scenario_with_trace(config);
    std::size_t lines = 0;
    std::istringstream is(artifacts.trace.to_text());
    std::string line;
    while (std::getline(is, line)) {
        ++lines;
        CHECK(std::count(line.begin(), line.end(), '|') >= 3);
    }
    CHECK(lines == artifacts.report.trace_events);
}

TEST_CASE("the TAN is never forwarded before the confirmation is rendered") {
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        ScenarioConfig config = load_scenario("attack=none\n");
        config.seed = seed;
        const RunArtifacts artifacts = run_scenario_with_trace(config);
        std::optional<Tick> rendered;
        for (const TraceEvent& ev : artifacts.trace.events()) {
            if (ev.actor == "control" && ev.op == "confirmation_rendered" && !rendered) {
                rendered = ev.tick;
            }
            if (ev.actor == "control" && ev.op == "tan_forwarded") {
                REQUIRE(rendered.has_value());
                CHECK(ev.tick >= *rendered);
            }
        }
    }
}

TEST_CASE("challenge mode commits for the real user and stops injected confirmation") {
    SUBCASE("diligent user passes the challenge") {
        ScenarioConfig config = load_scenario("attack=none\nchallenge_enabled=true\n");
        config.seed = 21;
        const Report report = run_scenario(config);
        CHECK(report.outcome == Outcome::CommittedGenuine);
        CHECK(report.diagnostics.challenges_failed == 0);
    }
    SUBCASE("a TAN-guessing injector cannot answer the challenge") {
        ScenarioConfig config = load_scenario(
            "attack=sendinput_injector\ninput_variant=async_state\n"
            "adversary_guess_tan=true\nadversary_knows_tan_list=true\n"
            "challenge_enabled=true\nduration=400\n");
        for (std::uint64_t seed = 1; seed <= 50; ++seed) {
            config.seed = seed;
            const Report report = run_scenario(config);
            CHECK(report.outcome != Outcome::CompromisedCommit);
            CHECK(report.outcome != Outcome::CommittedGenuine);
            CHECK(report.diagnostics.challenges_failed >= 1);
        }
    }
}

TEST_CASE("a negligent user defeats spoof detection, which p2 reports") {
    ScenarioConfig config = load_scenario(
        "attack=ui_spoofer\nadversary_start=0\ncontrol_start_delay=60\n"
        "user_negligence=1.0\nduration=400\n");
    config.seed = 3;
    const RunArtifacts artifacts = run_scenario_with_trace(config);
    CHECK(artifacts.report.properties.p2 == Verdict::Violated);
}

TEST_CASE("blind adversaries still never compromise a commit") {
    ScenarioConfig config = load_scenario(
        "attack=sendinput_injector\ninput_variant=async_state\nadversary_fidelity=blind\n"
        "duration=300\n");
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        config.seed = seed;
        const Report report = run_scenario(config);
        CHECK(report.outcome != Outcome::CompromisedCommit);
    }
}

TEST_CASE("matrix mode checks expectations per scenario file") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "tpsim_matrix_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    SUBCASE("an empty directory matches vacuously") {
        const MatrixResult result = run_matrix(dir.string());
        CHECK(result.rows.empty());
        CHECK(result.all_matched());
    }
    SUBCASE("a wrong expectation is reported as a mismatch") {
        std::ofstream(dir / "bad.scenario")
            << "attack=none\nseed=1\nexpect_outcome=DeniedService\n";
        const MatrixResult result = run_matrix(dir.string());
        REQUIRE(result.rows.size() == 1);
        CHECK(!result.rows[0].matched);
        CHECK(!result.all_matched());
        CHECK(result.to_text().find("MISMATCH") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("the keylogger learns the typed TAN but no overlay secret") {
    ScenarioConfig config = load_scenario(
        "attack=keylogger,sendinput_injector\ninput_variant=async_state\n"
        "transactions=2\nadversary_replay_tan=true\n");
    config.seed = 1006;
    const RunArtifacts artifacts = run_scenario_with_trace(config);
    CHECK(artifacts.report.outcome == Outcome::RejectedByServer);
    CHECK(artifacts.report.properties.p3 == Verdict::Holds);

    // The replayed TAN the injector reconstructed was observed key by key.
    std::string replayed;
    std::set<std::string> keylogger_knowledge;
    for (const TraceEvent& ev : artifacts.trace.events()) {
        if (ev.actor == "adv:sendinput_injector" && ev.op == "tan_injection_armed") {
            replayed = ev.field("tan");
        }
        if (ev.actor == "adv:keylogger" && ev.op == "knowledge") {
            keylogger_knowledge.insert(ev.field("token"));
        }
    }
    REQUIRE(replayed.size() == 4);
    for (char c : replayed) {
        CHECK(keylogger_knowledge.count(std::string(1, c)) == 1);
    }
}

TEST_CASE("a permuted confirmation layout still reads correctly by label") {
    ScenarioConfig config = load_scenario("attack=none\npermute_regions=true\n");
    for (std::uint64_t seed = 11; seed <= 16; ++seed) {
        config.seed = seed;
        CHECK(run_scenario(config).outcome == Outcome::CommittedGenuine);
    }
}

TEST_CASE("random attack mixes never yield a compromised commit for a diligent user") {
    // Sweep random configurations (no leaked TAN material, negligence 0)
    // and check the cross-cutting invariants on every run.
    Rng sweep_rng(20260808);
    const AdversaryKind kinds[] = {
        AdversaryKind::MessageForger, AdversaryKind::SendInputInjector,
        AdversaryKind::FlagStripper,  AdversaryKind::Keylogger,
        AdversaryKind::ScreenGrabber, AdversaryKind::UiSpoofer,
        AdversaryKind::Mitm,          AdversaryKind::DosGrabber,
    };
    for (int i = 0; i < 200; ++i) {
        ScenarioConfig config;
        config.seed = sweep_rng.next_u64();
        config.duration = 600;
        const std::uint64_t n_attacks = sweep_rng.below(3);
        for (std::uint64_t a = 0; a < n_attacks; ++a) {
            config.attacks.push_back(kinds[sweep_rng.below(8)]);
        }
        switch (sweep_rng.below(3)) {
        case 0: config.input_variant = ReadVariant::MessageQueue; break;
        case 1: config.input_variant = ReadVariant::AsyncState; break;
        default: config.input_variant = ReadVariant::DirectInput; break;
        }
        config.code_injection_enabled = sweep_rng.chance(0.2);
        config.directx_developer_mode = sweep_rng.chance(0.2);
        config.challenge_enabled = sweep_rng.chance(0.3);
        config.user_cadence = 1 + static_cast<Tick>(sweep_rng.below(4));
        config.adversary_fidelity = sweep_rng.chance(0.5) ? AdversaryFidelity::Blind
                                                          : AdversaryFidelity::LayoutAware;
        CAPTURE(i);

        const RunArtifacts artifacts = run_scenario_with_trace(config);
        const Report& report = artifacts.report;

        // A diligent user without leaked TAN material is never defrauded.
        CHECK(report.outcome != Outcome::CompromisedCommit);
        CHECK(report.properties.p4 == Verdict::Holds);
        // Output confidentiality holds on a hardened desktop.
        if (!config.code_injection_enabled && !config.directx_developer_mode) {
            CHECK(report.properties.p3 == Verdict::Holds);
        }
        // The trusted screen never diverged while the control owned it.
        CHECK(report.properties.p1 == Verdict::Holds);
        CHECK(report.sessions.size() == 1);
        CHECK(report.trace_events == artifacts.trace.size());

        // Same config, same seed: bit-identical.
        CHECK(run_scenario(config).to_text() == report.to_text());
    }
}

TEST_CASE("batch mode aggregates outcomes deterministically") {
    const ScenarioConfig config = load_scenario("attack=none\nduration=300\n");
    const BatchResult a = run_batch(config, 50, 7, 4);
    const BatchResult b = run_batch(config, 50, 7, 2);
    CHECK(a.count(Outcome::CommittedGenuine) == 50);
    CHECK(a.to_text() == b.to_text());
}
