// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

namespace tpsim {

// "key=value;key=value" lists are used both for structured frame payloads
// and for trace detail strings. Values are percent-escaped so that payload
// data containing '=', ';' or '%' survives a round trip.

std::string escape_value(const std::string& raw);
std::string unescape_value(const std::string& escaped);

using FieldList = std::vector<std::pair<std::string, std::string>>;

std::string encode_fields(const FieldList& fields);

// Throws Error{MalformedFrame} on a field without '='.
FieldList parse_fields(const std::string& text);

// Convenience lookup; returns "" when the key is absent.
std::string field_value(const FieldList& fields, const std::string& key);

} // namespace tpsim
