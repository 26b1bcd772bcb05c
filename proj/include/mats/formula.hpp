#pragma once

// sc-LTL formulas over service propositions.  Formulas live in an interned
// DAG owned by a FormulaArena: structurally identical subformulas share one
// FormulaId, so set-of-formula automaton states compare in O(size).

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mats/errors.hpp"

namespace mats {

using FormulaId = std::uint32_t;
inline constexpr FormulaId kNoFormula = static_cast<FormulaId>(-1);

enum class FormulaKind : std::uint8_t {
    True,
    False,
    Atom,
    Not,
    And,
    Or,
    Next,
    Until,
    Eventually,
};

struct FormulaNode {
    FormulaKind kind{};
    FormulaId lhs = kNoFormula;
    FormulaId rhs = kNoFormula;
    std::uint32_t atom = 0;  // index into FormulaArena::atom_names()

    bool operator==(const FormulaNode& o) const noexcept {
        return kind == o.kind && lhs == o.lhs && rhs == o.rhs && atom == o.atom;
    }
};

class FormulaArena {
public:
    FormulaArena();

    FormulaId mk_true() const { return 0; }
    FormulaId mk_false() const { return 1; }
    FormulaId atom(std::string_view name);
    FormulaId negate(FormulaId f);
    FormulaId conj(FormulaId a, FormulaId b);
    FormulaId disj(FormulaId a, FormulaId b);
    FormulaId next(FormulaId f);
    FormulaId until(FormulaId a, FormulaId b);
    FormulaId eventually(FormulaId f);

    const FormulaNode& node(FormulaId id) const { return nodes_[id]; }
    const std::string& atom_name(std::uint32_t idx) const { return atom_names_[idx]; }
    std::size_t atom_count() const { return atom_names_.size(); }
    std::size_t size() const { return nodes_.size(); }

private:
    FormulaId intern(FormulaNode n);

    struct NodeHash {
        std::size_t operator()(const FormulaNode& n) const noexcept {
            std::size_t h = static_cast<std::size_t>(n.kind);
            h = h * 1000003u ^ n.lhs;
            h = h * 1000003u ^ n.rhs;
            h = h * 1000003u ^ n.atom;
            return h;
        }
    };

    std::vector<FormulaNode> nodes_;
    std::vector<std::string> atom_names_;
    std::unordered_map<std::string, std::uint32_t> atom_index_;
    std::unordered_map<FormulaNode, FormulaId, NodeHash> intern_;
};

// Parses the grammar
//   until  := or ("U" until)?            (right associative, loosest)
//   or     := and ("||" and)*
//   and    := factor ("&&" factor)*
//   factor := "!" factor | "F" factor | "X" factor | "(" until ")"
//           | "true" | "false" | atom
//   atom   := [a-z][a-z0-9_]*
// "G" is recognized and rejected with NonCoSafe.  If known_atoms is given,
// identifiers outside the set raise UnknownAtom.
FormulaId parse_formula(FormulaArena& arena, std::string_view text,
                        const std::set<std::string>* known_atoms = nullptr);

std::string print_formula(const FormulaArena& arena, FormulaId f);

// Pushes negations to the atoms.  A negation over X/U/F would need
// weak-next/release, which leaves the co-safe fragment: NonCoSafe.
FormulaId to_pnf(FormulaArena& arena, FormulaId f);

// Atom indices appearing in f, sorted.
std::vector<std::uint32_t> collect_atoms(const FormulaArena& arena, FormulaId f);

}  // namespace mats
