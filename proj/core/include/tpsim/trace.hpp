// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <string>
#include <vector>

#include "tpsim/types.hpp"

namespace tpsim {

// One simulation event. Rendered to text as "tick|actor|op|detail"; the
// detail field is a stable "key=value" list joined with ";".
struct TraceEvent {
    Tick tick = 0;
    std::string actor;
    std::string op;
    std::string detail;

    std::string to_line() const;

    // Extracts the value of "key=..." from detail, or "" when absent.
    std::string field(const std::string& key) const;
};

class Trace {
public:
    void add(Tick tick, std::string actor, std::string op, std::string detail = "");

    const std::vector<TraceEvent>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }

    std::string to_text() const;

private:
    std::vector<TraceEvent> events_;
};

} // namespace tpsim
