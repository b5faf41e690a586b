// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include "tpsim/errors.hpp"

namespace tpsim {

const char* err_name(Err code) {
    switch (code) {
    case Err::UnknownProcess: return "UnknownProcess";
    case Err::MissingSender: return "MissingSender";
    case Err::HooksDisabled: return "HooksDisabled";
    case Err::NoExistingHook: return "NoExistingHook";
    case Err::AlreadyOwned: return "AlreadyOwned";
    case Err::NotOwner: return "NotOwner";
    case Err::InjectionBlocked: return "InjectionBlocked";
    case Err::CertMismatch: return "CertMismatch";
    case Err::AuthFailure: return "AuthFailure";
    case Err::MalformedFrame: return "MalformedFrame";
    case Err::UnknownType: return "UnknownType";
    case Err::SessionClosed: return "SessionClosed";
    case Err::ChallengeDisabled: return "ChallengeDisabled";
    case Err::AlreadyFinalized: return "AlreadyFinalized";
    case Err::IllegalTransition: return "IllegalTransition";
    case Err::ParseError: return "ParseError";
    case Err::ConstraintError: return "ConstraintError";
    }
    return "?";
}

} // namespace tpsim
