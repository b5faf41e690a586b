// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace tpsim {

enum class Err {
    UnknownProcess,
    MissingSender,
    HooksDisabled,
    NoExistingHook,
    AlreadyOwned,
    NotOwner,
    InjectionBlocked,
    CertMismatch,
    AuthFailure,
    MalformedFrame,
    UnknownType,
    SessionClosed,
    ChallengeDisabled,
    AlreadyFinalized,
    IllegalTransition,
    ParseError,
    ConstraintError,
};

const char* err_name(Err code);

class Error : public std::runtime_error {
public:
    Error(Err code, const std::string& message)
        : std::runtime_error(std::string(err_name(code)) + ": " + message), code_(code) {}

    Err code() const { return code_; }

private:
    Err code_;
};

// Raised when a presented certificate fingerprint differs from the pinned
// one; carries both sides so callers can log the mismatch.
class CertMismatchError : public Error {
public:
    CertMismatchError(std::string expected, std::string presented)
        : Error(Err::CertMismatch, "expected " + expected + ", presented " + presented),
          expected_(std::move(expected)),
          presented_(std::move(presented)) {}

    const std::string& expected() const { return expected_; }
    const std::string& presented() const { return presented_; }

private:
    std::string expected_;
    std::string presented_;
};

class ParseError : public Error {
public:
    ParseError(int line, const std::string& message)
        : Error(Err::ParseError, "line " + std::to_string(line) + ": " + message), line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

} // namespace tpsim
