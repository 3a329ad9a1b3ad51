#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nonterm/cnf.hpp"

namespace nonterm {

enum class SatStatus { Satisfiable, Unsatisfiable, Unknown };

const char* to_string(SatStatus s);

struct SatResult {
    SatStatus status = SatStatus::Unknown;
    std::vector<bool> model;  // 1-indexed, filled when satisfiable
    std::string detail;       // why the status is Unknown
    double solve_seconds = 0.0;
};

// Byte-stable DIMACS CNF serialization: one header line, then each
// clause on its own line terminated by " 0".
std::string write_dimacs(const CnfInstance& inst);
void write_dimacs_file(const CnfInstance& inst, const std::string& path);

// Sidecar listing the meaning of every variable, one "index<TAB>name"
// line per variable, in index order.
void write_variable_map(const CnfInstance& inst, const std::string& path);

struct SolverCommand {
    std::string executable;
    std::vector<std::string> args;  // extra arguments before the file name
};

// Solver named by NONTERM_SAT_SOLVER (split on spaces), else the first
// well-known solver binary found on PATH, else nothing.
std::optional<SolverCommand> discover_solver();

// Runs an external solver on the instance: writes a temporary DIMACS
// file, invokes `cmd` on it, and reads the standard result protocol
// ("s SATISFIABLE"/"s UNSATISFIABLE", "v" literal lines, exit code 10 or
// 20).  Variables missing from the model lines default to false; a
// claimed model is replayed against the clauses and rejected with
// ModelInconsistent when it fails.  A timeout of zero means none; on
// expiry the solver is killed and the result is Unknown.  Throws
// SpawnError when the executable cannot be started.
SatResult solve_external(const CnfInstance& inst, const SolverCommand& cmd,
                         double timeout_seconds = 0.0);

struct BuiltinSolverOptions {
    long long conflict_limit = 0;  // 0 = unlimited
    double timeout_seconds = 0.0;  // 0 = none
};

// Conflict-driven clause-learning solver, usable when no external
// solver is installed.  Complete; returns Unknown only when a limit is
// hit.
SatResult solve_builtin(const CnfInstance& inst, const BuiltinSolverOptions& opts = {});

} // namespace nonterm
