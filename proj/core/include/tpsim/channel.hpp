// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tpsim/errors.hpp"
#include "tpsim/fields.hpp"
#include "tpsim/types.hpp"

namespace tpsim {

// Symbolically secure client-server transport. Real TLS is replaced by a
// symbolic rule set: endpoints see plaintext frames, everyone else sees
// opaque ciphertext tokens and cannot alter or forge channel traffic.

struct Certificate {
    std::string subject;
    std::string fingerprint;
};

struct ClientKey {
    std::string key_id;
    std::uint64_t bound_control = 0;
    Tick issued_at = 0;
};

using Hologram = std::vector<PixelToken>;

// Wire framing: 4-byte big-endian payload length, 1-byte type, payload.
enum class FrameType : std::uint8_t {
    Hello = 0x01,
    Cert = 0x02,
    HologramReq = 0x03,
    Stage = 0x04,
    Echo = 0x05,
    Tan = 0x06,
    Commit = 0x07,
    Abort = 0x08,
    Challenge = 0x09,
    ChallengeResp = 0x0A,
    HologramData = 0x0B,
};

const char* frame_type_name(FrameType type);

struct Frame {
    FrameType type = FrameType::Hello;
    std::string payload;

    bool operator==(const Frame&) const = default;
};

// Encodes one frame. Payloads above 2^32-1 bytes are rejected.
std::vector<std::uint8_t> encode_frame(FrameType type, const std::string& payload);

// Decodes exactly one frame; trailing or missing bytes raise MalformedFrame,
// an unregistered type byte raises UnknownType.
Frame decode_frame(std::span<const std::uint8_t> bytes);

// Incremental decoder for stream transports: consumes as many complete
// frames as the buffer holds and leaves the remainder in place.
class FrameReader {
public:
    void feed(std::span<const std::uint8_t> bytes);
    std::vector<Frame> drain();

private:
    std::vector<std::uint8_t> buffer_;
};

// Client-side channel state. `established` is true only when the presented
// fingerprint equaled the pin at establishment time.
struct SecureChannel {
    std::uint64_t session_id = 0;
    std::string pinned_fingerprint;
    bool established = false;
};

// Pin check performed by the downloaded control before any payload frame.
// Throws CertMismatchError on a mismatch, which signals a spoofed server.
SecureChannel establish_channel(std::uint64_t session_id, const std::string& pinned_fingerprint,
                                const Certificate& presented);

} // namespace tpsim
