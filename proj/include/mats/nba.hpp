#pragma once

// Nondeterministic Buchi automata specialised for co-safe properties: on
// finite words a run is accepting when it ends in an accepting state, and
// every accepting state carries a True self-loop.  Guards are symbolic
// (see guard.hpp), so the 2^AP alphabet is never materialised.

#include <cstdint>
#include <string>
#include <vector>

#include "mats/formula.hpp"
#include "mats/guard.hpp"

namespace mats {

struct Nba {
    std::vector<std::string> atom_names;  // atom id -> proposition name
    int num_states = 0;
    std::vector<int> initial;                      // sorted state ids
    std::vector<bool> accepting;                   // size num_states
    // out[q] = sorted (destination, guard); at most one entry per pair.
    std::vector<std::vector<std::pair<int, Guard>>> out;

    const Guard* edge(int from, int to) const;
    Guard& edge_ref(int from, int to);  // inserts a false guard if absent
    std::size_t edge_count() const;
    Letter atom_universe_mask() const {
        return atom_names.size() >= 64 ? ~0ull : (1ull << atom_names.size()) - 1;
    }
    int atom_id(const std::string& name) const;  // -1 if absent
};

// Tableau construction for an sc-LTL formula in positive normal form.
// States are interned obligation sets; the state with no obligations is the
// unique accepting state.  Throws NonCoSafe if f is not in PNF, CapExceeded
// when the formula mentions more than kMaxAtoms propositions.
Nba translate(const FormulaArena& arena, FormulaId f);

// Finite-word acceptance by subset propagation.  Letters must stay inside
// the automaton's atom universe.
bool accepts(const Nba& nba, const std::vector<Letter>& word);

// Acceptance up to stuttering: each letter is consumed one or more times.
// This is the acceptance notion used for poset words, where a letter stands
// for a subtask that holds for a whole execution interval, and it absorbs
// the transitions removed by decomposability pruning.
bool accepts_stutter(const Nba& nba, const std::vector<Letter>& word);

}  // namespace mats
