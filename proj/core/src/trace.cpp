// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include "tpsim/trace.hpp"

#include <sstream>

#include "tpsim/fields.hpp"

namespace tpsim {

std::string TraceEvent::to_line() const {
    std::ostringstream os;
    os << tick << '|' << actor << '|' << op << '|' << detail;
    return os.str();
}

std::string TraceEvent::field(const std::string& key) const {
    const std::string needle = key + "=";
    std::size_t pos = 0;
    while (pos < detail.size()) {
        std::size_t end = detail.find(';', pos);
        if (end == std::string::npos) {
            end = detail.size();
        }
        if (detail.compare(pos, needle.size(), needle) == 0) {
            return unescape_value(detail.substr(pos + needle.size(), end - pos - needle.size()));
        }
        pos = end + 1;
    }
    return "";
}

void Trace::add(Tick tick, std::string actor, std::string op, std::string detail) {
    events_.push_back(TraceEvent{tick, std::move(actor), std::move(op), std::move(detail)});
}

std::string Trace::to_text() const {
    std::string out;
    for (const auto& ev : events_) {
        out += ev.to_line();
        out += '\n';
    }
    return out;
}

} // namespace tpsim
