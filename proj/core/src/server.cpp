// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include "tpsim/server.hpp"

#include <algorithm>

namespace tpsim {

namespace {

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static const char* kHex = "0123456789ABCDEF";
    std::string out(8, '0');
    for (int i = 0; i < 8; ++i) {
        out[7 - i] = kHex[(h >> (i * 4)) & 0xF];
    }
    return out;
}

} // namespace

TanTable::TanTable(std::vector<std::string> entries)
    : entries_(std::move(entries)), used_(entries_.size(), false) {}

const std::string& TanTable::lookup(std::uint32_t nonce) const {
    return entries_.at(index_of(nonce));
}

bool TanTable::used(std::uint32_t nonce) const { return used_.at(index_of(nonce)); }

void TanTable::mark_used(std::uint32_t nonce) { used_.at(index_of(nonce)) = true; }

std::string ChallengeSolver::solve(const std::string& challenge) const {
    return "R" + fnv1a_hex(secret_ + "/" + challenge);
}

Server::Server(const ServerConfig& config, Rng rng) : config_(config), rng_(std::move(rng)) {
    certificate_.subject = "bank.example";
    certificate_.fingerprint = "FP:" + rng_.hex_token(16);

    std::vector<std::string> tans;
    std::set<std::string> seen;
    tans.reserve(static_cast<std::size_t>(config_.tan_table_size));
    while (tans.size() < static_cast<std::size_t>(config_.tan_table_size)) {
        std::string tan = rng_.hex_token(4);
        if (seen.insert(tan).second) {
            tans.push_back(std::move(tan));
        }
    }
    tan_table_ = TanTable(std::move(tans));

    const std::string holo_id = rng_.hex_token(6);
    for (int i = 0; i < config_.hologram_frames; ++i) {
        hologram_.push_back("HOLO:" + holo_id + ":" + std::to_string(i));
    }

    challenge_secret_ = rng_.hex_token(16);
}

DownloadBundle Server::download_control(Tick now) {
    ServerSession session;
    session.session_id = next_session_++;
    session.state = SessionState::ControlDelivered;
    session.client_key.key_id = "CK:" + rng_.hex_token(12);
    session.client_key.bound_control = session.session_id;
    session.client_key.issued_at = now;
    sessions_.emplace(session.session_id, session);

    DownloadBundle bundle;
    bundle.session_id = session.session_id;
    bundle.key = session.client_key;
    bundle.pinned_fingerprint = certificate_.fingerprint;
    return bundle;
}

ServerSession& Server::session_mut(std::uint64_t session_id) {
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        throw Error(Err::SessionClosed, "unknown session " + std::to_string(session_id));
    }
    return it->second;
}

const ServerSession& Server::session(std::uint64_t session_id) const {
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        throw Error(Err::SessionClosed, "unknown session " + std::to_string(session_id));
    }
    return it->second;
}

bool Server::finalized(std::uint64_t session_id) const {
    return finalized_.count(session_id) != 0;
}

std::vector<std::uint64_t> Server::session_ids() const {
    std::vector<std::uint64_t> ids;
    ids.reserve(sessions_.size());
    for (const auto& [id, _] : sessions_) {
        ids.push_back(id);
    }
    return ids;
}

const Hologram& Server::request_hologram(std::uint64_t session_id, const std::string& key_id) {
    ServerSession& s = session_mut(session_id);
    if (key_id != s.client_key.key_id) {
        s.state = SessionState::Aborted;
        throw Error(Err::AuthFailure, "client key does not match this download");
    }
    s.hologram_fetched = true;
    if (s.state == SessionState::Open) {
        s.state = SessionState::HologramSent;
    }
    return hologram_;
}

std::uint32_t Server::fresh_nonce() {
    // Seeded 32-bit tokens with rejection against everything ever issued.
    std::uint32_t nonce = rng_.next_u32();
    while (!issued_nonces_.insert(nonce).second) {
        nonce = rng_.next_u32();
    }
    return nonce;
}

EchoPacket Server::stage_and_echo(std::uint64_t session_id, const std::string& data) {
    ServerSession& s = session_mut(session_id);
    if (s.state != SessionState::Open && s.state != SessionState::HologramSent) {
        throw Error(Err::SessionClosed,
                    "session " + std::to_string(session_id) + " cannot stage");
    }
    s.staged_data = data; // verbatim, manipulations included
    s.nonce = fresh_nonce();
    s.state = SessionState::DataStaged;
    return EchoPacket{s.staged_data, *s.nonce};
}

VerifyResult Server::verify_tan(std::uint64_t session_id, std::uint32_t nonce,
                                const std::string& tan) {
    ServerSession& s = session_mut(session_id);
    const bool state_ok = s.state == SessionState::DataStaged ||
                          (s.state == SessionState::ChallengePending && s.challenge_passed);
    const bool challenge_ok = !config_.challenge_enabled || s.challenge_passed;
    if (state_ok && challenge_ok && s.nonce && nonce == *s.nonce &&
        !tan_table_.used(nonce) && tan == tan_table_.lookup(nonce)) {
        tan_table_.mark_used(nonce);
        s.state = SessionState::Committed;
        return VerifyResult::Commit;
    }
    s.state = SessionState::Aborted;
    return VerifyResult::Reject;
}

std::string Server::issue_challenge(std::uint64_t session_id) {
    if (!config_.challenge_enabled) {
        throw Error(Err::ChallengeDisabled, "challenge mode is off");
    }
    ServerSession& s = session_mut(session_id);
    if (s.state != SessionState::DataStaged) {
        throw Error(Err::SessionClosed, "challenge requires staged data");
    }
    s.challenge_token = "CHLG:" + rng_.hex_token(8);
    s.challenge_passed = false;
    s.state = SessionState::ChallengePending;
    return *s.challenge_token;
}

bool Server::verify_challenge(std::uint64_t session_id, const std::string& response) {
    if (!config_.challenge_enabled) {
        throw Error(Err::ChallengeDisabled, "challenge mode is off");
    }
    ServerSession& s = session_mut(session_id);
    if (!s.challenge_token) {
        return false;
    }
    const bool pass = response == ChallengeSolver(challenge_secret_).solve(*s.challenge_token);
    if (pass) {
        s.challenge_passed = true;
    } else {
        s.state = SessionState::Aborted;
    }
    return pass;
}

SessionRecord Server::finalize(std::uint64_t session_id, const std::string& outcome,
                               const std::string& note) {
    if (!finalized_.insert(session_id).second) {
        throw Error(Err::AlreadyFinalized, "session " + std::to_string(session_id));
    }
    ServerSession& s = session_mut(session_id);
    SessionRecord record;
    record.session_id = session_id;
    record.outcome = outcome;
    record.note = note;
    if (outcome == "commit") {
        record.committed_data = s.staged_data;
    } else {
        s.state = SessionState::Aborted;
    }
    log_.push_back(record);
    return record;
}

std::vector<Frame> Server::handle_frame(const Frame& frame, Tick now, Trace* trace) {
    std::vector<Frame> out;
    const auto reply = [&](FrameType type, const FieldList& fields) {
        out.push_back(Frame{type, encode_fields(fields)});
    };
    const auto trace_add = [&](const std::string& op, const std::string& detail) {
        if (trace) {
            trace->add(now, "server", op, detail);
        }
    };

    switch (frame.type) {
    case FrameType::Hello: {
        const FieldList fields = parse_fields(frame.payload);
        const std::uint64_t sid = std::stoull(field_value(fields, "session"));
        ServerSession& s = session_mut(sid);
        if (s.state == SessionState::ControlDelivered) {
            s.state = SessionState::Open;
        }
        active_hello_ = sid;
        trace_add("hello", "session=" + std::to_string(sid));
        reply(FrameType::Cert, {{"subject", certificate_.subject},
                                {"fp", certificate_.fingerprint}});
        break;
    }
    case FrameType::HologramReq: {
        const FieldList fields = parse_fields(frame.payload);
        const std::uint64_t sid = std::stoull(field_value(fields, "session"));
        try {
            const Hologram& frames = request_hologram(sid, field_value(fields, "key"));
            std::string joined;
            for (std::size_t i = 0; i < frames.size(); ++i) {
                if (i > 0) {
                    joined += ',';
                }
                joined += frames[i];
            }
            trace_add("hologram_sent", "session=" + std::to_string(sid));
            reply(FrameType::HologramData, {{"frames", joined}});
        } catch (const Error& e) {
            if (e.code() != Err::AuthFailure) {
                throw;
            }
            trace_add("hologram_denied", "session=" + std::to_string(sid));
            reply(FrameType::Abort, {{"reason", "auth_failure"}});
        }
        break;
    }
    case FrameType::Stage: {
        // Payload is the staged data verbatim; the session is the one that
        // said hello on this connection.
        const std::uint64_t sid = active_hello_;
        EchoPacket echo = stage_and_echo(sid, frame.payload);
        trace_add("stage", "session=" + std::to_string(sid) +
                               ";data=" + escape_value(echo.data) +
                               ";nonce=" + std::to_string(echo.nonce));
        reply(FrameType::Echo, {{"data", echo.data}, {"nonce", std::to_string(echo.nonce)}});
        if (config_.challenge_enabled) {
            const std::string token = issue_challenge(sid);
            trace_add("challenge", "session=" + std::to_string(sid));
            reply(FrameType::Challenge, {{"token", token}});
        }
        break;
    }
    case FrameType::ChallengeResp: {
        const std::uint64_t sid = active_hello_;
        const FieldList fields = parse_fields(frame.payload);
        const bool pass = verify_challenge(sid, field_value(fields, "resp"));
        trace_add("challenge_verified",
                  "session=" + std::to_string(sid) + ";pass=" + (pass ? "1" : "0"));
        if (!pass) {
            finalize(sid, "abort", "challenge_failed");
            trace_add("finalize", "session=" + std::to_string(sid) +
                                      ";outcome=abort;reason=challenge_failed");
            reply(FrameType::Abort, {{"reason", "challenge_failed"}});
        }
        break;
    }
    case FrameType::Tan: {
        const std::uint64_t sid = active_hello_;
        const FieldList fields = parse_fields(frame.payload);
        const std::uint32_t nonce =
            static_cast<std::uint32_t>(std::stoul(field_value(fields, "nonce")));
        const std::string tan = field_value(fields, "tan");
        const VerifyResult result = verify_tan(sid, nonce, tan);
        if (result == VerifyResult::Commit) {
            const SessionRecord rec = finalize(sid, "commit");
            trace_add("finalize", "session=" + std::to_string(sid) + ";outcome=commit;data=" +
                                      escape_value(*rec.committed_data));
            reply(FrameType::Commit, {});
        } else {
            finalize(sid, "abort", "tan_rejected");
            trace_add("finalize",
                      "session=" + std::to_string(sid) + ";outcome=abort;reason=tan_rejected");
            reply(FrameType::Abort, {{"reason", "tan_rejected"}});
        }
        break;
    }
    case FrameType::Abort: {
        const std::uint64_t sid = active_hello_;
        if (sid != 0 && !finalized(sid)) {
            session_mut(sid).state = SessionState::Aborted;
            finalize(sid, "abort", "client_abort");
            trace_add("finalize",
                      "session=" + std::to_string(sid) + ";outcome=abort;reason=client_abort");
        }
        break;
    }
    default:
        trace_add("unexpected_frame", std::string("type=") + frame_type_name(frame.type));
        break;
    }
    return out;
}

} // namespace tpsim
