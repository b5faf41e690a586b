// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include "tpsim/simulation.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <thread>

#include "tpsim/actors.hpp"
#include "tpsim/control.hpp"
#include "tpsim/env.hpp"
#include "tpsim/properties.hpp"
#include "tpsim/server.hpp"
#include "tpsim/transport.hpp"

namespace tpsim {

namespace {

// Impersonates the server at channel establishment: answers the hello with
// its own certificate and otherwise stays silent.
class MitmEndpoint {
public:
    explicit MitmEndpoint(Rng rng) {
        certificate_.subject = "bank.example"; // name matches, key does not
        certificate_.fingerprint = "FP:" + rng.hex_token(16);
    }

    const Certificate& certificate() const { return certificate_; }

    void pump(FrameConduit& conduit) {
        for (const Frame& frame : conduit.poll(ConduitEnd::Server)) {
            if (frame.type == FrameType::Hello) {
                conduit.send(ConduitEnd::Server,
                             Frame{FrameType::Cert,
                                   encode_fields({{"subject", certificate_.subject},
                                                  {"fp", certificate_.fingerprint}})});
            }
        }
    }

private:
    Certificate certificate_;
};

Outcome classify_session(const SessionRecord& record, AbortReason control_reason,
                         const std::string& intent) {
    if (record.outcome == "commit") {
        return *record.committed_data == intent ? Outcome::CommittedGenuine
                                                : Outcome::CompromisedCommit;
    }
    switch (control_reason) {
    case AbortReason::UserAbort: return Outcome::AbortedByUser;
    case AbortReason::ServerReject:
    case AbortReason::AuthFailure: return Outcome::RejectedByServer;
    default: return Outcome::DeniedService;
    }
}

class Simulation {
public:
    explicit Simulation(const ScenarioConfig& config) : config_(config) {}

    RunArtifacts run() {
        Rng root(config_.seed);

        Desktop desktop(DesktopCapabilities{config_.hooks_enabled,
                                            config_.code_injection_enabled,
                                            config_.directx_developer_mode});
        desktop.spawn_process(ProcessRole::UserAgent); // hosts the download

        Server server(ServerConfig{config_.tan_table_size, config_.challenge_enabled,
                                   config_.hologram_frames},
                      root.fork(1));

        trace_.add(0, "harness", "intent", "value=" + escape_value(config_.intent));
        for (const PixelToken& frame : server.hologram()) {
            trace_.add(0, "harness", "secret", "token=" + escape_value(frame));
        }

        UserConfig user_config;
        user_config.intent = config_.intent;
        user_config.start_delay = config_.user_start_delay;
        user_config.key_cadence = config_.user_cadence;
        user_config.reaction = config_.user_reaction;
        user_config.negligence = config_.user_negligence;
        UserActor user(user_config, server.tan_table(), server.hologram(), server.user_solver(),
                       root.fork(2));

        const bool mitm_active =
            std::find(config_.attacks.begin(), config_.attacks.end(), AdversaryKind::Mitm) !=
            config_.attacks.end();
        MitmEndpoint mitm(root.fork(3));

        std::vector<Adversary> adversaries;
        for (std::size_t i = 0; i < config_.attacks.size(); ++i) {
            AdversaryParams params;
            params.kind = config_.attacks[i];
            params.fidelity = config_.adversary_fidelity;
            params.start = config_.adversary_start;
            params.period = config_.adversary_period;
            params.count = config_.adversary_count;
            params.keys = config_.adversary_keys;
            params.stripper_period = config_.stripper_period;
            params.horizon = config_.duration;
            params.act_in_transaction = config_.transactions;
            if (params.kind == AdversaryKind::SendInputInjector) {
                params.guess_tan = config_.adversary_guess_tan;
                params.knows_tan_list = config_.adversary_knows_tan_list;
                params.replay_tan = config_.adversary_replay_tan;
            }
            std::vector<std::string> leaked;
            if (params.kind == AdversaryKind::SendInputInjector && params.knows_tan_list) {
                leaked = server.tan_table().entries();
            }
            adversaries.emplace_back(params, root.fork(10 + i), std::move(leaked));
            adversaries.back().attach(desktop);
        }

        Report report;
        report.seed = config_.seed;
        report.intent = config_.intent;

        UserView presented = desktop.compose_user_view();
        bool presented_genuine = false;

        for (int txn = 1; txn <= config_.transactions; ++txn) {
            if (txn > 1) {
                user.begin_transaction();
                for (Adversary& adv : adversaries) {
                    adv.begin_transaction(desktop);
                }
            }

            const DownloadBundle bundle = server.download_control(desktop.now());
            ControlConfig control_config;
            control_config.variant = config_.input_variant;
            control_config.hook_renewal_period = config_.hook_renewal_period;
            control_config.permute_regions = config_.permute_regions;
            control_config.layout_seed = root.fork(4).next_u64();
            Control control(control_config, bundle);
            control.attach(desktop);

            auto conduit = make_conduit(config_.transport);
            conduit->set_observer([&](ConduitEnd from, const Frame& frame) {
                trace_.add(desktop.now(), "wire", "frame",
                           std::string("dir=") + (from == ConduitEnd::Client ? "c2s" : "s2c") +
                               ";type=" + frame_type_name(frame.type));
                const std::string tap = "ENC:" + std::to_string(conduit->frames_delivered());
                for (Adversary& adv : adversaries) {
                    adv.learn(tap);
                }
            });

            const Tick txn_start = desktop.now();
            bool timed_out = false;
            while (true) {
                if (desktop.now() >= config_.duration) {
                    timed_out = true;
                    break;
                }
                for (Adversary& adv : adversaries) {
                    adv.step(desktop, trace_);
                }
                user.step(desktop, presented, presented_genuine, trace_);
                desktop.dispatch_raw_queue();
                if (desktop.now() >= txn_start + config_.control_start_delay) {
                    control.step(desktop, *conduit, trace_);
                }
                if (mitm_active) {
                    mitm.pump(*conduit);
                } else {
                    for (const Frame& frame : conduit->poll(ConduitEnd::Server)) {
                        for (const Frame& resp :
                             server.handle_frame(frame, desktop.now(), &trace_)) {
                            conduit->send(ConduitEnd::Server, resp);
                        }
                    }
                }

                // End-of-tick scanout: the frame the user will see next tick.
                presented = desktop.compose_user_view();
                const bool display_active = control.owns_overlay() &&
                                            desktop.overlay() != nullptr;
                bool match = false;
                if (display_active) {
                    match = presented.pixels == desktop.overlay()->pixels();
                    trace_.add(desktop.now(), "env", "present",
                               std::string("display=") + (control.displaying() ? "1" : "0") +
                                   ";match=" + (match ? "1" : "0"));
                }
                presented_genuine = display_active && match;

                desktop.advance_tick();

                const bool control_terminal = control.state() == ControlState::Completed ||
                                              control.state() == ControlState::Aborted;
                if (control_terminal && server.finalized(bundle.session_id)) {
                    break;
                }
                if (control_terminal && !server.finalized(bundle.session_id)) {
                    // Sessions the server never heard from (certificate
                    // mismatch, denial before hello) are closed out here.
                    server.finalize(bundle.session_id, "abort",
                                    abort_reason_name(control.abort_reason()));
                    trace_.add(desktop.now(), "server", "finalize",
                               "session=" + std::to_string(bundle.session_id) +
                                   ";outcome=abort;reason=" +
                                   abort_reason_name(control.abort_reason()));
                    break;
                }
            }

            if (timed_out) {
                trace_.add(desktop.now(), "harness", "timeout", "");
                if (!server.finalized(bundle.session_id)) {
                    server.finalize(bundle.session_id, "abort", "timeout");
                    trace_.add(desktop.now(), "server", "finalize",
                               "session=" + std::to_string(bundle.session_id) +
                                   ";outcome=abort;reason=timeout");
                }
            }

            const auto& log = server.log();
            const auto rec = std::find_if(log.begin(), log.end(), [&](const SessionRecord& r) {
                return r.session_id == bundle.session_id;
            });
            SessionSummary summary;
            summary.outcome = classify_session(*rec, control.abort_reason(), config_.intent);
            summary.staged_data = server.session(bundle.session_id).staged_data;
            summary.committed_data = rec->committed_data;
            report.sessions.push_back(summary);

            report.diagnostics.injected_flagged_excluded += control.counters().injected_excluded;
            report.diagnostics.primary_tampers_repaired += control.counters().tampers_repaired;
            if (config_.input_variant != ReadVariant::MessageQueue && control.pid()) {
                report.diagnostics.forged_messages_dropped +=
                    desktop.forged_posted_to(*control.pid());
            }

            if (timed_out) {
                break;
            }
        }

        // Ground-truth diagnostics.
        report.diagnostics.flag_strips = desktop.counters().flag_strips;
        for (const TraceEvent& ev : trace_.events()) {
            if (ev.actor == "control" && ev.op == "collect") {
                const auto origin =
                    desktop.origin_of(std::stoull(ev.field("event")));
                if (origin == InputOrigin::SendInput) {
                    ++report.diagnostics.stripped_collected;
                }
            } else if (ev.actor == "control" && ev.op == "cert_mismatch") {
                ++report.diagnostics.cert_mismatches;
            } else if (ev.actor == "server" && ev.op == "challenge_verified" &&
                       ev.field("pass") == "0") {
                ++report.diagnostics.challenges_failed;
            }
        }
        for (const Adversary& adv : adversaries) {
            report.diagnostics.capture_attempts_blocked += adv.captures_blocked();
            // Full knowledge-set inspection record, one token per event.
            for (const std::string& token : adv.knowledge()) {
                trace_.add(desktop.now(), std::string("adv:") + adversary_kind_name(adv.kind()),
                           "knowledge", "token=" + escape_value(token));
            }
        }

        // Overall outcome: a compromised commit anywhere dominates;
        // otherwise the final transaction decides.
        report.outcome = report.sessions.back().outcome;
        for (const SessionSummary& s : report.sessions) {
            if (s.outcome == Outcome::CompromisedCommit) {
                report.outcome = Outcome::CompromisedCommit;
            }
        }

        report.properties = evaluate_properties(trace_);
        report.trace_events = trace_.size();
        return RunArtifacts{std::move(report), std::move(trace_)};
    }

private:
    ScenarioConfig config_;
    Trace trace_;
};

} // namespace

RunArtifacts run_scenario_with_trace(const ScenarioConfig& config) {
    return Simulation(config).run();
}

Report run_scenario(const ScenarioConfig& config) {
    return Simulation(config).run().report;
}

// ---------------------------------------------------------------------------
// Matrix mode

bool MatrixResult::all_matched() const {
    return std::all_of(rows.begin(), rows.end(), [](const MatrixRow& r) { return r.matched; });
}

std::string MatrixResult::to_text() const {
    std::ostringstream os;
    std::size_t name_width = 8;
    for (const MatrixRow& row : rows) {
        name_width = std::max(name_width, row.name.size());
    }
    for (const MatrixRow& row : rows) {
        os << row.name << std::string(name_width - row.name.size() + 2, ' ')
           << outcome_name(row.outcome);
        os << "  p1=" << verdict_name(row.properties.p1)
           << " p2=" << verdict_name(row.properties.p2)
           << " p3=" << verdict_name(row.properties.p3)
           << " p4=" << verdict_name(row.properties.p4)
           << " p5=" << verdict_name(row.properties.p5);
        os << "  " << (row.matched ? "ok" : "MISMATCH") << '\n';
    }
    std::size_t matched = 0;
    for (const MatrixRow& row : rows) {
        matched += row.matched ? 1 : 0;
    }
    os << "matrix: " << matched << "/" << rows.size() << " scenarios matched expectations\n";
    return os.str();
}

MatrixResult run_matrix(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".scenario") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    MatrixResult result;
    for (const fs::path& path : files) {
        const ScenarioConfig config = load_scenario_file(path.string());
        const Report report = run_scenario(config);
        MatrixRow row;
        row.name = path.stem().string();
        row.outcome = report.outcome;
        row.properties = report.properties;
        row.matched = true;
        if (config.expect_outcome && *config.expect_outcome != report.outcome) {
            row.matched = false;
        }
        const auto check = [&](const std::optional<Verdict>& expect, Verdict got) {
            if (expect && *expect != got) {
                row.matched = false;
            }
        };
        check(config.expect_p1, report.properties.p1);
        check(config.expect_p2, report.properties.p2);
        check(config.expect_p3, report.properties.p3);
        check(config.expect_p4, report.properties.p4);
        check(config.expect_p5, report.properties.p5);
        result.rows.push_back(row);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Batch mode

double BatchResult::compromised_frequency() const {
    if (runs == 0) {
        return 0.0;
    }
    return static_cast<double>(count(Outcome::CompromisedCommit)) / static_cast<double>(runs);
}

std::string BatchResult::to_text() const {
    std::ostringstream os;
    os << "runs=" << runs << '\n';
    os << "seed_base=" << seed_base << '\n';
    for (Outcome o : {Outcome::CommittedGenuine, Outcome::AbortedByUser,
                      Outcome::RejectedByServer, Outcome::DeniedService,
                      Outcome::CompromisedCommit}) {
        os << "outcome." << outcome_name(o) << "=" << count(o) << '\n';
    }
    char freq[32];
    std::snprintf(freq, sizeof(freq), "%.6f", compromised_frequency());
    os << "compromised_frequency=" << freq << '\n';
    os << "stripped_collected_total=" << stripped_collected_total << '\n';
    return os.str();
}

BatchResult run_batch(const ScenarioConfig& base, std::uint64_t runs, std::uint64_t seed_base,
                      unsigned threads) {
    BatchResult result;
    result.runs = runs;
    result.seed_base = seed_base;

    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = std::min<std::uint64_t>(threads, std::max<std::uint64_t>(1, runs));

    std::vector<Outcome> outcomes(runs);
    std::vector<std::uint64_t> stripped(runs, 0);

    auto worker = [&](unsigned worker_id) {
        for (std::uint64_t i = worker_id; i < runs; i += threads) {
            ScenarioConfig config = base;
            config.seed = seed_base + i;
            const Report report = run_scenario(config);
            outcomes[i] = report.outcome;
            stripped[i] = report.diagnostics.stripped_collected;
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back(worker, t);
    }
    for (std::thread& t : pool) {
        t.join();
    }

    for (std::uint64_t i = 0; i < runs; ++i) {
        ++result.outcome_counts[static_cast<std::size_t>(outcomes[i])];
        result.stripped_collected_total += stripped[i];
    }
    return result;
}

} // namespace tpsim
