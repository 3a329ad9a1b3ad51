#pragma once

#include <stdexcept>
#include <string>

namespace nonterm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed textual input (term, rule, or automaton file).
struct SyntaxError : Error { using Error::Error; };

// Rule text violates the calculus restrictions (erasing, non-left-linear, ...).
struct InvalidRule : Error { using Error::Error; };

// Term text references a symbol the rule does not define.
struct UnknownSymbol : Error { using Error::Error; };

// Operation precondition violated by the caller.
struct InvalidInput : Error { using Error::Error; };

// A construction would exceed a hard size bound.
struct SizeLimit : Error { using Error::Error; };

// File could not be read or written.
struct IoError : Error { using Error::Error; };

// External process could not be started.
struct SpawnError : Error { using Error::Error; };

// A solver model fails the clause-by-clause re-check.
struct ModelInconsistent : Error { using Error::Error; };

// Replaying rewrites from a counterexample left the certificate
// language or reached a normal form.
struct ValidationFailure : Error { using Error::Error; };

// Invariant breach: a bug in this library, not a user error.
struct InternalError : Error { using Error::Error; };

} // namespace nonterm
