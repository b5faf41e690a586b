// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include "tpsim/fields.hpp"

#include "tpsim/errors.hpp"

namespace tpsim {

namespace {

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

} // namespace

std::string escape_value(const std::string& raw) {
    static const char* kHex = "0123456789ABCDEF";
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        if (c == '%' || c == ';' || c == '=' || c == '|' || c == '\n') {
            out.push_back('%');
            out.push_back(kHex[(static_cast<unsigned char>(c) >> 4) & 0xF]);
            out.push_back(kHex[static_cast<unsigned char>(c) & 0xF]);
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string unescape_value(const std::string& escaped) {
    std::string out;
    out.reserve(escaped.size());
    for (std::size_t i = 0; i < escaped.size(); ++i) {
        if (escaped[i] == '%' && i + 2 < escaped.size()) {
            const int hi = hex_digit(escaped[i + 1]);
            const int lo = hex_digit(escaped[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out.push_back(static_cast<char>((hi << 4) | lo));
                i += 2;
                continue;
            }
        }
        out.push_back(escaped[i]);
    }
    return out;
}

std::string encode_fields(const FieldList& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            out.push_back(';');
        }
        out += fields[i].first;
        out.push_back('=');
        out += escape_value(fields[i].second);
    }
    return out;
}

FieldList parse_fields(const std::string& text) {
    FieldList fields;
    if (text.empty()) {
        return fields;
    }
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find(';', pos);
        if (end == std::string::npos) {
            end = text.size();
        }
        const std::string item = text.substr(pos, end - pos);
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos) {
            throw Error(Err::MalformedFrame, "field without '=': " + item);
        }
        fields.emplace_back(item.substr(0, eq), unescape_value(item.substr(eq + 1)));
        if (end == text.size()) {
            break;
        }
        pos = end + 1;
    }
    return fields;
}

std::string field_value(const FieldList& fields, const std::string& key) {
    for (const auto& [k, v] : fields) {
        if (k == key) {
            return v;
        }
    }
    return "";
}

} // namespace tpsim
