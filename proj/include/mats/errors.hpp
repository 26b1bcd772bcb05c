#pragma once

#include <stdexcept>
#include <string>

namespace mats {

// Error taxonomy shared by the whole toolkit.  Each category maps to a CLI
// exit code; everything else is a plain Error (exit code 1).
enum class ErrorCode {
    Generic,
    Syntax,           // formula / HOA / JSON parse problems
    UnknownAtom,      // proposition not groundable against the scenario
    NonCoSafe,        // formula outside the sc-LTL fragment
    Unsatisfiable,    // automaton has no accepting path at all (exit 2)
    InfeasibleForTeam,// satisfiable, but not with this team (exit 3)
    BudgetExhausted,  // no solution inside the time budget (exit 4)
    CapExceeded,      // atom/support/variant cap hit
    Deadlock,         // simulation cannot make progress
    IrrecoverableFailure, // no surviving coalition for a pending subtask
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Time quantities are seconds throughout.  kTimeEps is the strictness gap
// used when an opposed pair forces finish-before-start (Def. 8 uses a strict
// inequality); planner and oracle share the constant so optima compare equal.
inline constexpr double kTimeEps = 1e-6;

inline constexpr int kMaxAtoms = 64;       // letters are 64-bit masks
inline constexpr int kMaxSupport = 20;     // minterm enumeration cap
inline constexpr int kMaxSubtasks = 64;    // assignment bitmask width

}  // namespace mats
