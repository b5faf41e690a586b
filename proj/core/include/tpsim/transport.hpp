// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "tpsim/channel.hpp"

namespace tpsim {

enum class TransportKind { InProcess, LoopbackSocket };
enum class ConduitEnd { Client, Server };

// Bidirectional frame pipe between the control and the server. Every frame
// crosses the wire as encoded bytes in both implementations, so the codec is
// exercised identically whether or not a kernel socket sits in the middle.
//
// Possession of an end is what identifies an endpoint; other parties only
// observe opaque ciphertext tokens through the simulation's tap mechanism.
class FrameConduit {
public:
    using Observer = std::function<void(ConduitEnd from, const Frame&)>;

    virtual ~FrameConduit() = default;

    virtual void send(ConduitEnd from, const Frame& frame) = 0;
    virtual std::vector<Frame> poll(ConduitEnd at) = 0;

    // Called once per frame at delivery time, in delivery order.
    void set_observer(Observer observer) { observer_ = std::move(observer); }

    // Frames delivered so far; drives the adversary's ciphertext tap.
    std::uint64_t frames_delivered() const { return frames_delivered_; }

    // Test hook: bytes handed to an endpoint by a non-endpoint. The channel
    // layer drops them before protocol logic and counts the rejection.
    virtual void inject_raw(ConduitEnd at, std::span<const std::uint8_t> bytes) = 0;
    std::uint64_t injected_rejected() const { return injected_rejected_; }

protected:
    void notify(ConduitEnd from, const Frame& frame) {
        ++frames_delivered_;
        if (observer_) {
            observer_(from, frame);
        }
    }

    Observer observer_;
    std::uint64_t frames_delivered_ = 0;
    std::uint64_t injected_rejected_ = 0;
};

std::unique_ptr<FrameConduit> make_conduit(TransportKind kind);

} // namespace tpsim
