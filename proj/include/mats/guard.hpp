#pragma once

// Symbolic transition guards.  A guard is a DNF over at most 64 atoms: a
// disjunction of cubes, each cube a conjunction of literals stored as a
// (positive, negative) mask pair.  Letters are 64-bit masks of true atoms.
// Minterms over the guard's support are enumerated lazily and cached.

#include <cstdint>
#include <string>
#include <vector>

#include "mats/errors.hpp"

namespace mats {

using Letter = std::uint64_t;

struct Cube {
    Letter pos = 0;
    Letter neg = 0;

    bool consistent() const { return (pos & neg) == 0; }
    bool matches(Letter l) const { return (l & pos) == pos && (l & neg) == 0; }
    bool operator==(const Cube& o) const { return pos == o.pos && neg == o.neg; }
    bool operator<(const Cube& o) const {
        return pos != o.pos ? pos < o.pos : neg < o.neg;
    }
};

class Guard {
public:
    Guard() = default;  // false
    static Guard truth() { return Guard({Cube{}}); }
    static Guard falsity() { return Guard(); }
    explicit Guard(std::vector<Cube> cubes);

    bool is_false() const { return cubes_.empty(); }
    bool is_true() const { return cubes_.size() == 1 && cubes_[0].pos == 0 && cubes_[0].neg == 0; }
    bool eval(Letter l) const;
    bool satisfiable() const { return !cubes_.empty(); }

    Letter support() const { return support_; }
    const std::vector<Cube>& cubes() const { return cubes_; }

    Guard disjoin(const Guard& o) const;
    Guard conjoin(const Guard& o) const;

    // Full assignments over support() that satisfy the guard, each returned
    // as the mask of its true atoms.  Throws CapExceeded past kMaxSupport.
    const std::vector<Letter>& minterms() const;

    // Minimal models: letters m with eval(m) true, m subset of support, and
    // no proper subset satisfying.  Paired with the forced-negative atoms
    // (support atoms whose addition falsifies the guard given m).
    struct MinimalModel {
        Letter pos = 0;
        Letter neg = 0;
    };
    std::vector<MinimalModel> minimal_models() const;

    bool operator==(const Guard& o) const { return cubes_ == o.cubes_; }

private:
    std::vector<Cube> cubes_;  // sorted, consistent, deduplicated
    Letter support_ = 0;
    mutable std::vector<Letter> minterm_cache_;
    mutable bool minterms_ready_ = false;
};

// Renders e.g. "a & !b | c"; atom index -> name via the callback.
std::string guard_to_string(const Guard& g,
                            const std::vector<std::string>& atom_names);

int popcount64(Letter l);

}  // namespace mats
