// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "tpsim/report.hpp"
#include "tpsim/trace.hpp"

namespace tpsim {

// Computes the five-property verdict matrix from a completed run trace and
// nothing else. The trace carries the secrets declared at setup, per-tick
// screen presentation records, adversary knowledge gains, user decisions,
// certificate checks and session finalizations.
PropertyMatrix evaluate_properties(const Trace& trace);

} // namespace tpsim
