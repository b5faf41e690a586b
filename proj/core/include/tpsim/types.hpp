// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace tpsim {

// Simulation time. One tick corresponds to one millisecond of wall time,
// so a hook renewed "every 100 ms" has period 100.
using Tick = std::int64_t;

// Symbolic key token. Printable characters are their own tokens; special
// keys use multi-character tokens ("ENTER", "ESC").
using KeyToken = std::string;

// Symbolic pixel token. Equality of tokens is the only relation the model
// cares about; there is no color arithmetic.
using PixelToken = std::string;

enum class ProcessRole { Control, Benign, Adversary, UserAgent };

struct ProcessId {
    std::uint32_t value = 0;
    auto operator<=>(const ProcessId&) const = default;
};

const char* role_name(ProcessRole role);

// End-of-field key the user presses to finish an input field, and the
// single trusted abort key.
inline const KeyToken kTerminatorKey = "ENTER";
inline const KeyToken kAbortKey = "ESC";

} // namespace tpsim
