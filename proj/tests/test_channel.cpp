// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include "tpsim/channel.hpp"
#include "tpsim/rng.hpp"
#include "tpsim/server.hpp"
#include "tpsim/transport.hpp"

using namespace tpsim;

TEST_CASE("frame encoding is 4-byte big-endian length, type byte, payload") {
    const auto bytes = encode_frame(FrameType::Stage, "AMT=100;TO=X");
    REQUIRE(bytes.size() == 5 + 12);
    CHECK(bytes[0] == 0x00);
    CHECK(bytes[1] == 0x00);
    CHECK(bytes[2] == 0x00);
    CHECK(bytes[3] == 0x0C);
    CHECK(bytes[4] == 0x04);
    CHECK(std::string(bytes.begin() + 5, bytes.end()) == "AMT=100;TO=X");
}

TEST_CASE("frame decode round-trips random payloads") {
    Rng rng(2024);
    for (int i = 0; i < 200; ++i) {
        std::string payload;
        const auto len = rng.below(64);
        for (std::uint64_t k = 0; k < len; ++k) {
            payload.push_back(static_cast<char>(rng.below(256)));
        }
        const auto type = static_cast<FrameType>(1 + rng.below(11));
        const Frame frame = decode_frame(encode_frame(type, payload));
        CHECK(frame.type == type);
        CHECK(frame.payload == payload);
    }
}

TEST_CASE("malformed frames are rejected") {
    SUBCASE("three header bytes") {
        const std::uint8_t buf[3] = {0, 0, 0};
        CHECK_THROWS_AS(decode_frame(std::span(buf, 3)), Error);
    }
    SUBCASE("length does not match the buffer") {
        auto bytes = encode_frame(FrameType::Hello, "abc");
        bytes.pop_back();
        CHECK_THROWS_AS(decode_frame(bytes), Error);
    }
    SUBCASE("unknown type byte") {
        auto bytes = encode_frame(FrameType::Hello, "");
        bytes[4] = 0x7F;
        try {
            decode_frame(bytes);
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.code() == Err::UnknownType);
        }
    }
}

TEST_CASE("stream reader reassembles frames from partial reads") {
    const auto a = encode_frame(FrameType::Hello, "one");
    const auto b = encode_frame(FrameType::Echo, "two");
    std::vector<std::uint8_t> wire(a);
    wire.insert(wire.end(), b.begin(), b.end());

    FrameReader reader;
    reader.feed(std::span(wire).subspan(0, 3));
    CHECK(reader.drain().empty());
    reader.feed(std::span(wire).subspan(3, 7));
    auto frames = reader.drain();
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].payload == "one");
    reader.feed(std::span(wire).subspan(10));
    frames = reader.drain();
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].payload == "two");
}

TEST_CASE("field lists survive values containing separators") {
    const FieldList fields{{"data", "AMT=100;TO=X"}, {"nonce", "42"}};
    const std::string encoded = encode_fields(fields);
    const FieldList parsed = parse_fields(encoded);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].second == "AMT=100;TO=X");
    CHECK(field_value(parsed, "nonce") == "42");
    CHECK_THROWS_AS(parse_fields("novalue"), Error);
}

TEST_CASE("channel establishment pins the server fingerprint") {
    const Certificate genuine{"bank.example", "FP:AAAA"};
    const SecureChannel channel = establish_channel(1, "FP:AAAA", genuine);
    CHECK(channel.established);

    const Certificate spoofed{"bank.example", "FP:BBBB"};
    try {
        establish_channel(1, "FP:AAAA", spoofed);
        CHECK(false);
    } catch (const CertMismatchError& e) {
        CHECK(e.expected() == "FP:AAAA");
        CHECK(e.presented() == "FP:BBBB");
    }

    // Fingerprint equality is the entire check; a replayed certificate with
    // the pinned fingerprint passes.
    CHECK(establish_channel(2, "FP:AAAA", genuine).established);
}

TEST_CASE("control downloads carry unique keys and the pin, but no hologram") {
    Server server(ServerConfig{}, Rng(5));
    const DownloadBundle a = server.download_control(0);
    const DownloadBundle b = server.download_control(0);
    CHECK(a.key.key_id != b.key.key_id);
    CHECK(a.pinned_fingerprint == server.certificate().fingerprint);
    CHECK(b.pinned_fingerprint == server.certificate().fingerprint);
}

TEST_CASE("hologram fetch requires the matching client key") {
    Server server(ServerConfig{}, Rng(6));
    const DownloadBundle bundle = server.download_control(0);
    Trace trace;

    server.handle_frame(Frame{FrameType::Hello,
                              encode_fields({{"session", std::to_string(bundle.session_id)}})},
                        0, &trace);

    SUBCASE("correct key gets the frames, re-fetch is idempotent") {
        const Frame req{FrameType::HologramReq,
                        encode_fields({{"session", std::to_string(bundle.session_id)},
                                       {"key", bundle.key.key_id}})};
        auto replies = server.handle_frame(req, 1, &trace);
        REQUIRE(replies.size() == 1);
        CHECK(replies[0].type == FrameType::HologramData);
        auto again = server.handle_frame(req, 2, &trace);
        REQUIRE(again.size() == 1);
        CHECK(again[0].payload == replies[0].payload);
    }
    SUBCASE("a fabricated key is refused") {
        const Frame req{FrameType::HologramReq,
                        encode_fields({{"session", std::to_string(bundle.session_id)},
                                       {"key", "CK:FORGED"}})};
        auto replies = server.handle_frame(req, 1, &trace);
        REQUIRE(replies.size() == 1);
        CHECK(replies[0].type == FrameType::Abort);
    }
}

TEST_CASE("conduits move frames between endpoints over both transports") {
    for (TransportKind kind : {TransportKind::InProcess, TransportKind::LoopbackSocket}) {
        CAPTURE(static_cast<int>(kind));
        auto conduit = make_conduit(kind);
        conduit->send(ConduitEnd::Client, Frame{FrameType::Stage, "AMT=1"});
        conduit->send(ConduitEnd::Client, Frame{FrameType::Stage, "AMT=2"});
        auto at_server = conduit->poll(ConduitEnd::Server);
        REQUIRE(at_server.size() == 2);
        CHECK(at_server[0].payload == "AMT=1");
        CHECK(at_server[1].payload == "AMT=2");

        conduit->send(ConduitEnd::Server, Frame{FrameType::Commit, ""});
        auto at_client = conduit->poll(ConduitEnd::Client);
        REQUIRE(at_client.size() == 1);
        CHECK(at_client[0].type == FrameType::Commit);
        CHECK(conduit->frames_delivered() == 3);
    }
}

TEST_CASE("frames injected by a non-endpoint are dropped before protocol logic") {
    auto conduit = make_conduit(TransportKind::InProcess);
    const auto forged = encode_frame(FrameType::Commit, "");
    conduit->inject_raw(ConduitEnd::Client, forged);
    CHECK(conduit->poll(ConduitEnd::Client).empty());
    CHECK(conduit->injected_rejected() == 1);

    // A frame from the real peer still goes through.
    conduit->send(ConduitEnd::Server, Frame{FrameType::Commit, ""});
    CHECK(conduit->poll(ConduitEnd::Client).size() == 1);
}
