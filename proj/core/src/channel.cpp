// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include "tpsim/channel.hpp"

namespace tpsim {

const char* frame_type_name(FrameType type) {
    switch (type) {
    case FrameType::Hello: return "HELLO";
    case FrameType::Cert: return "CERT";
    case FrameType::HologramReq: return "HOLOGRAM_REQ";
    case FrameType::Stage: return "STAGE";
    case FrameType::Echo: return "ECHO";
    case FrameType::Tan: return "TAN";
    case FrameType::Commit: return "COMMIT";
    case FrameType::Abort: return "ABORT";
    case FrameType::Challenge: return "CHALLENGE";
    case FrameType::ChallengeResp: return "CHALLENGE_RESP";
    case FrameType::HologramData: return "HOLOGRAM_DATA";
    }
    return "?";
}

namespace {

bool known_type(std::uint8_t byte) {
    return byte >= 0x01 && byte <= 0x0B;
}

std::uint32_t read_be32(std::span<const std::uint8_t> bytes) {
    return (static_cast<std::uint32_t>(bytes[0]) << 24) |
           (static_cast<std::uint32_t>(bytes[1]) << 16) |
           (static_cast<std::uint32_t>(bytes[2]) << 8) |
           static_cast<std::uint32_t>(bytes[3]);
}

} // namespace

std::vector<std::uint8_t> encode_frame(FrameType type, const std::string& payload) {
    if (payload.size() > 0xFFFFFFFFull) {
        throw Error(Err::MalformedFrame, "payload exceeds 2^32-1 bytes");
    }
    const auto len = static_cast<std::uint32_t>(payload.size());
    std::vector<std::uint8_t> out;
    out.reserve(5 + payload.size());
    out.push_back(static_cast<std::uint8_t>((len >> 24) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((len >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((len >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>(len & 0xFF));
    out.push_back(static_cast<std::uint8_t>(type));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 5) {
        throw Error(Err::MalformedFrame, "truncated header");
    }
    const std::uint32_t len = read_be32(bytes);
    const std::uint8_t type_byte = bytes[4];
    if (!known_type(type_byte)) {
        throw Error(Err::UnknownType, "frame type byte " + std::to_string(type_byte));
    }
    if (bytes.size() != 5ull + len) {
        throw Error(Err::MalformedFrame, "length field does not match buffer");
    }
    Frame frame;
    frame.type = static_cast<FrameType>(type_byte);
    frame.payload.assign(bytes.begin() + 5, bytes.end());
    return frame;
}

void FrameReader::feed(std::span<const std::uint8_t> bytes) {
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::vector<Frame> FrameReader::drain() {
    std::vector<Frame> frames;
    std::size_t pos = 0;
    while (buffer_.size() - pos >= 5) {
        const std::uint32_t len = read_be32(std::span(buffer_).subspan(pos, 4));
        if (buffer_.size() - pos < 5ull + len) {
            break;
        }
        frames.push_back(decode_frame(std::span(buffer_).subspan(pos, 5ull + len)));
        pos += 5ull + len;
    }
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(pos));
    return frames;
}

SecureChannel establish_channel(std::uint64_t session_id, const std::string& pinned_fingerprint,
                                const Certificate& presented) {
    if (presented.fingerprint != pinned_fingerprint) {
        throw CertMismatchError(pinned_fingerprint, presented.fingerprint);
    }
    SecureChannel channel;
    channel.session_id = session_id;
    channel.pinned_fingerprint = pinned_fingerprint;
    channel.established = true;
    return channel;
}

} // namespace tpsim
