// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tpsim/channel.hpp"
#include "tpsim/rng.hpp"
#include "tpsim/trace.hpp"
#include "tpsim/types.hpp"

namespace tpsim {

// Server-side transaction machine: staging, unique-nonce echo, TAN
// verification bound to the echoed nonce, optional human-verification
// challenge, and an append-only session log.

enum class SessionState {
    Open,
    ControlDelivered,
    HologramSent,
    DataStaged,
    ChallengePending,
    Committed,
    Aborted,
};

enum class VerifyResult { Commit, Reject };

struct EchoPacket {
    std::string data; // verbatim copy of what the control staged
    std::uint32_t nonce = 0;
};

// nonce mod size indexes the table; every entry commits at most once.
class TanTable {
public:
    TanTable() = default;
    TanTable(std::vector<std::string> entries);

    std::size_t size() const { return entries_.size(); }
    const std::string& lookup(std::uint32_t nonce) const;
    bool used(std::uint32_t nonce) const;
    void mark_used(std::uint32_t nonce);
    const std::vector<std::string>& entries() const { return entries_; }

private:
    std::size_t index_of(std::uint32_t nonce) const { return nonce % entries_.size(); }

    std::vector<std::string> entries_;
    std::vector<bool> used_;
};

struct ServerSession {
    std::uint64_t session_id = 0;
    SessionState state = SessionState::ControlDelivered;
    std::string staged_data;
    std::optional<std::uint32_t> nonce;
    ClientKey client_key;
    bool hologram_fetched = false;
    bool challenge_passed = false;
    std::optional<std::string> challenge_token;
};

struct SessionRecord {
    std::uint64_t session_id = 0;
    std::string outcome; // "commit" or "abort"
    std::optional<std::string> committed_data;
    std::string note;
};

struct DownloadBundle {
    std::uint64_t session_id = 0;
    ClientKey key;
    std::string pinned_fingerprint;
};

// Answers a challenge from the registration secret; constructed by the
// server and handed only to the user at registration time.
class ChallengeSolver {
public:
    ChallengeSolver() = default;
    explicit ChallengeSolver(std::string secret) : secret_(std::move(secret)) {}
    std::string solve(const std::string& challenge) const;

private:
    std::string secret_;
};

struct ServerConfig {
    int tan_table_size = 100;
    bool challenge_enabled = false;
    int hologram_frames = 3;
};

class Server {
public:
    Server(const ServerConfig& config, Rng rng);

    const Certificate& certificate() const { return certificate_; }

    // Registration-time secrets, shared with the user out of band.
    const TanTable& tan_table() const { return tan_table_; }
    const Hologram& hologram() const { return hologram_; }
    ChallengeSolver user_solver() const { return ChallengeSolver(challenge_secret_); }

    // Provisions a fresh control instance: unique client key, certificate
    // pin, and a session awaiting connection. The hologram is not included.
    DownloadBundle download_control(Tick now);

    // Protocol surface: one inbound frame, zero or more responses. `trace`
    // may be null for unit-level use.
    std::vector<Frame> handle_frame(const Frame& frame, Tick now, Trace* trace);

    // Direct operation surface (also used by handle_frame).
    // Hologram delivery is gated on the key issued to this download; a
    // mismatch raises AuthFailure. Re-fetching with the same key is
    // idempotent.
    const Hologram& request_hologram(std::uint64_t session_id, const std::string& key_id);
    EchoPacket stage_and_echo(std::uint64_t session_id, const std::string& data);
    VerifyResult verify_tan(std::uint64_t session_id, std::uint32_t nonce,
                            const std::string& tan);
    std::string issue_challenge(std::uint64_t session_id);
    bool verify_challenge(std::uint64_t session_id, const std::string& response);
    SessionRecord finalize(std::uint64_t session_id, const std::string& outcome,
                           const std::string& note = "");

    const ServerSession& session(std::uint64_t session_id) const;
    bool finalized(std::uint64_t session_id) const;
    const std::vector<SessionRecord>& log() const { return log_; }
    std::vector<std::uint64_t> session_ids() const;

private:
    ServerSession& session_mut(std::uint64_t session_id);
    std::uint32_t fresh_nonce();

    ServerConfig config_;
    Rng rng_;
    Certificate certificate_;
    TanTable tan_table_;
    Hologram hologram_;
    std::string challenge_secret_;

    std::uint64_t next_session_ = 1;
    std::uint64_t active_hello_ = 0; // session bound to the live connection
    std::map<std::uint64_t, ServerSession> sessions_;
    std::set<std::uint32_t> issued_nonces_;
    std::set<std::uint64_t> finalized_;
    std::vector<SessionRecord> log_;
};

} // namespace tpsim
