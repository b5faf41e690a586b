// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include "tpsim/scenario.hpp"

#include <fstream>
#include <sstream>

#include "tpsim/errors.hpp"

namespace tpsim {

namespace {

bool parse_bool(const std::string& value, int line) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ParseError(line, "expected true/false, got '" + value + "'");
}

std::int64_t parse_int(const std::string& value, int line) {
    try {
        std::size_t used = 0;
        const std::int64_t v = std::stoll(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument(value);
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, "expected integer, got '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& value, int line) {
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument(value);
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, "expected unsigned integer, got '" + value + "'");
    }
}

double parse_double(const std::string& value, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument(value);
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, "expected number, got '" + value + "'");
    }
}

AdversaryKind parse_kind(const std::string& value, int line) {
    for (AdversaryKind k :
         {AdversaryKind::MessageForger, AdversaryKind::SendInputInjector,
          AdversaryKind::FlagStripper, AdversaryKind::Keylogger, AdversaryKind::ScreenGrabber,
          AdversaryKind::UiSpoofer, AdversaryKind::Mitm, AdversaryKind::DosGrabber}) {
        if (value == adversary_kind_name(k)) {
            return k;
        }
    }
    throw ParseError(line, "unknown attack kind '" + value + "'");
}

Verdict parse_verdict(const std::string& value, int line) {
    const auto v = verdict_from_name(value);
    if (!v) {
        throw ParseError(line, "unknown verdict '" + value + "'");
    }
    return *v;
}

} // namespace

ScenarioConfig load_scenario(const std::string& text) {
    ScenarioConfig config;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') {
            raw.pop_back();
        }
        if (raw.empty() || raw[0] == '#') {
            continue;
        }
        const std::size_t eq = raw.find('=');
        if (eq == std::string::npos) {
            throw ParseError(line_no, "expected key=value");
        }
        const std::string key = raw.substr(0, eq);
        const std::string value = raw.substr(eq + 1);

        if (key == "attack") {
            config.attacks.clear();
            if (value != "none") {
                std::size_t pos = 0;
                while (pos <= value.size()) {
                    std::size_t end = value.find(',', pos);
                    if (end == std::string::npos) {
                        end = value.size();
                    }
                    config.attacks.push_back(parse_kind(value.substr(pos, end - pos), line_no));
                    if (end == value.size()) {
                        break;
                    }
                    pos = end + 1;
                }
            }
        } else if (key == "input_variant") {
            if (value == "message_queue") {
                config.input_variant = ReadVariant::MessageQueue;
            } else if (value == "async_state") {
                config.input_variant = ReadVariant::AsyncState;
            } else if (value == "direct_input") {
                config.input_variant = ReadVariant::DirectInput;
            } else {
                throw ParseError(line_no, "unknown input variant '" + value + "'");
            }
        } else if (key == "hook_renewal_period") {
            if (value == "disabled") {
                config.hook_renewal_period.reset();
            } else {
                config.hook_renewal_period = parse_int(value, line_no);
            }
        } else if (key == "hooks_enabled") {
            config.hooks_enabled = parse_bool(value, line_no);
        } else if (key == "code_injection_enabled") {
            config.code_injection_enabled = parse_bool(value, line_no);
        } else if (key == "directx_developer_mode") {
            config.directx_developer_mode = parse_bool(value, line_no);
        } else if (key == "challenge_enabled") {
            config.challenge_enabled = parse_bool(value, line_no);
        } else if (key == "tan_table_size") {
            config.tan_table_size = static_cast<int>(parse_int(value, line_no));
        } else if (key == "hologram_frames") {
            config.hologram_frames = static_cast<int>(parse_int(value, line_no));
        } else if (key == "seed") {
            config.seed = parse_u64(value, line_no);
        } else if (key == "duration") {
            config.duration = parse_int(value, line_no);
        } else if (key == "transport") {
            if (value == "in_process") {
                config.transport = TransportKind::InProcess;
            } else if (value == "loopback_socket") {
                config.transport = TransportKind::LoopbackSocket;
            } else {
                throw ParseError(line_no, "unknown transport '" + value + "'");
            }
        } else if (key == "intent") {
            config.intent = value;
        } else if (key == "transactions") {
            config.transactions = static_cast<int>(parse_int(value, line_no));
        } else if (key == "permute_regions") {
            config.permute_regions = parse_bool(value, line_no);
        } else if (key == "adversary_start") {
            config.adversary_start = parse_int(value, line_no);
        } else if (key == "adversary_period") {
            config.adversary_period = parse_int(value, line_no);
        } else if (key == "adversary_count") {
            config.adversary_count = static_cast<int>(parse_int(value, line_no));
        } else if (key == "adversary_keys") {
            config.adversary_keys = value;
        } else if (key == "adversary_fidelity") {
            if (value == "blind") {
                config.adversary_fidelity = AdversaryFidelity::Blind;
            } else if (value == "layout_aware") {
                config.adversary_fidelity = AdversaryFidelity::LayoutAware;
            } else {
                throw ParseError(line_no, "unknown fidelity '" + value + "'");
            }
        } else if (key == "adversary_guess_tan") {
            config.adversary_guess_tan = parse_bool(value, line_no);
        } else if (key == "adversary_knows_tan_list") {
            config.adversary_knows_tan_list = parse_bool(value, line_no);
        } else if (key == "adversary_replay_tan") {
            config.adversary_replay_tan = parse_bool(value, line_no);
        } else if (key == "stripper_period") {
            config.stripper_period = parse_int(value, line_no);
        } else if (key == "control_start_delay") {
            config.control_start_delay = parse_int(value, line_no);
        } else if (key == "user_negligence") {
            config.user_negligence = parse_double(value, line_no);
        } else if (key == "user_reaction") {
            config.user_reaction = parse_int(value, line_no);
        } else if (key == "user_cadence") {
            config.user_cadence = parse_int(value, line_no);
        } else if (key == "user_start_delay") {
            config.user_start_delay = parse_int(value, line_no);
        } else if (key == "expect_outcome") {
            const auto o = outcome_from_name(value);
            if (!o) {
                throw ParseError(line_no, "unknown outcome '" + value + "'");
            }
            config.expect_outcome = o;
        } else if (key == "expect_p1") {
            config.expect_p1 = parse_verdict(value, line_no);
        } else if (key == "expect_p2") {
            config.expect_p2 = parse_verdict(value, line_no);
        } else if (key == "expect_p3") {
            config.expect_p3 = parse_verdict(value, line_no);
        } else if (key == "expect_p4") {
            config.expect_p4 = parse_verdict(value, line_no);
        } else if (key == "expect_p5") {
            config.expect_p5 = parse_verdict(value, line_no);
        } else {
            throw ParseError(line_no, "unknown key '" + key + "'");
        }
    }

    // Cross-field rules.
    if (config.hook_renewal_period && !config.hooks_enabled) {
        throw Error(Err::ConstraintError, "hook_renewal_period requires hooks_enabled=true");
    }
    if (config.code_injection_enabled && !config.hooks_enabled) {
        throw Error(Err::ConstraintError, "code_injection_enabled requires hooks_enabled=true");
    }
    if (config.hook_renewal_period && *config.hook_renewal_period < 1) {
        throw Error(Err::ConstraintError, "hook_renewal_period must be >= 1");
    }
    if (config.tan_table_size < 2) {
        throw Error(Err::ConstraintError, "tan_table_size must be >= 2");
    }
    if (config.hologram_frames < 1) {
        throw Error(Err::ConstraintError, "hologram_frames must be >= 1");
    }
    if (config.duration < 1) {
        throw Error(Err::ConstraintError, "duration must be >= 1");
    }
    if (config.transactions < 1 || config.transactions > 2) {
        throw Error(Err::ConstraintError, "transactions must be 1 or 2");
    }
    if (config.adversary_replay_tan && config.transactions != 2) {
        throw Error(Err::ConstraintError, "adversary_replay_tan requires transactions=2");
    }
    if (config.user_negligence < 0.0 || config.user_negligence > 1.0) {
        throw Error(Err::ConstraintError, "user_negligence must be within [0,1]");
    }
    if (config.adversary_period < 1 || config.stripper_period < 1 || config.user_cadence < 1) {
        throw Error(Err::ConstraintError, "periods and cadence must be >= 1");
    }
    if (config.control_start_delay < 0) {
        throw Error(Err::ConstraintError, "control_start_delay must be >= 0");
    }
    return config;
}

ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Err::ParseError, "cannot open scenario file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_scenario(buffer.str());
}

} // namespace tpsim
