#include "mats/formula.hpp"

#include <cctype>
#include <sstream>

namespace mats {

FormulaArena::FormulaArena() {
    nodes_.push_back({FormulaKind::True});
    nodes_.push_back({FormulaKind::False});
    intern_[nodes_[0]] = 0;
    intern_[nodes_[1]] = 1;
}

FormulaId FormulaArena::intern(FormulaNode n) {
    auto it = intern_.find(n);
    if (it != intern_.end()) return it->second;
    FormulaId id = static_cast<FormulaId>(nodes_.size());
    nodes_.push_back(n);
    intern_[n] = id;
    return id;
}

FormulaId FormulaArena::atom(std::string_view name) {
    std::string key(name);
    auto it = atom_index_.find(key);
    std::uint32_t idx;
    if (it != atom_index_.end()) {
        idx = it->second;
    } else {
        idx = static_cast<std::uint32_t>(atom_names_.size());
        atom_names_.push_back(key);
        atom_index_[key] = idx;
    }
    FormulaNode n{FormulaKind::Atom};
    n.atom = idx;
    return intern(n);
}

FormulaId FormulaArena::negate(FormulaId f) {
    if (f == mk_true()) return mk_false();
    if (f == mk_false()) return mk_true();
    if (node(f).kind == FormulaKind::Not) return node(f).lhs;
    FormulaNode n{FormulaKind::Not};
    n.lhs = f;
    return intern(n);
}

FormulaId FormulaArena::conj(FormulaId a, FormulaId b) {
    if (a == mk_false() || b == mk_false()) return mk_false();
    if (a == mk_true()) return b;
    if (b == mk_true()) return a;
    if (a == b) return a;
    FormulaNode n{FormulaKind::And};
    n.lhs = a;
    n.rhs = b;
    return intern(n);
}

FormulaId FormulaArena::disj(FormulaId a, FormulaId b) {
    if (a == mk_true() || b == mk_true()) return mk_true();
    if (a == mk_false()) return b;
    if (b == mk_false()) return a;
    if (a == b) return a;
    FormulaNode n{FormulaKind::Or};
    n.lhs = a;
    n.rhs = b;
    return intern(n);
}

FormulaId FormulaArena::next(FormulaId f) {
    FormulaNode n{FormulaKind::Next};
    n.lhs = f;
    return intern(n);
}

FormulaId FormulaArena::until(FormulaId a, FormulaId b) {
    FormulaNode n{FormulaKind::Until};
    n.lhs = a;
    n.rhs = b;
    return intern(n);
}

FormulaId FormulaArena::eventually(FormulaId f) {
    FormulaNode n{FormulaKind::Eventually};
    n.lhs = f;
    return intern(n);
}

namespace {

struct Lexer {
    std::string_view text;
    std::size_t pos = 0;
    int line = 1, col = 1;

    enum class Tok { End, LParen, RParen, Bang, AndAnd, OrOr, F, X, U, G, Ident, True, False };

    Tok tok = Tok::End;
    std::string ident;
    int tok_line = 1, tok_col = 1;

    [[noreturn]] void fail(const std::string& msg) const {
        std::ostringstream os;
        os << "parse error at " << tok_line << ":" << tok_col << ": " << msg;
        throw Error(ErrorCode::Syntax, os.str());
    }

    void bump(std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            if (pos < text.size() && text[pos] == '\n') { ++line; col = 1; }
            else ++col;
            ++pos;
        }
    }

    void advance() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) bump(1);
        tok_line = line;
        tok_col = col;
        if (pos >= text.size()) { tok = Tok::End; return; }
        char c = text[pos];
        switch (c) {
        case '(': bump(1); tok = Tok::LParen; return;
        case ')': bump(1); tok = Tok::RParen; return;
        case '!': bump(1); tok = Tok::Bang; return;
        case '&':
            if (pos + 1 < text.size() && text[pos + 1] == '&') { bump(2); tok = Tok::AndAnd; return; }
            fail("expected '&&'");
        case '|':
            if (pos + 1 < text.size() && text[pos + 1] == '|') { bump(2); tok = Tok::OrOr; return; }
            fail("expected '||'");
        case 'F': bump(1); tok = Tok::F; return;
        case 'X': bump(1); tok = Tok::X; return;
        case 'U': bump(1); tok = Tok::U; return;
        case 'G': bump(1); tok = Tok::G; return;
        default: break;
        }
        if (c >= 'a' && c <= 'z') {
            std::size_t start = pos;
            while (pos < text.size()) {
                char d = text[pos];
                if ((d >= 'a' && d <= 'z') || (d >= '0' && d <= '9') || d == '_') bump(1);
                else break;
            }
            ident.assign(text.substr(start, pos - start));
            if (ident == "true") tok = Tok::True;
            else if (ident == "false") tok = Tok::False;
            else tok = Tok::Ident;
            return;
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

struct Parser {
    Lexer lex;
    FormulaArena& arena;
    const std::set<std::string>* known;

    FormulaId parse_until() {
        FormulaId left = parse_or();
        if (lex.tok == Lexer::Tok::U) {
            lex.advance();
            FormulaId right = parse_until();
            return arena.until(left, right);
        }
        return left;
    }

    FormulaId parse_or() {
        FormulaId f = parse_and();
        while (lex.tok == Lexer::Tok::OrOr) {
            lex.advance();
            f = arena.disj(f, parse_and());
        }
        return f;
    }

    FormulaId parse_and() {
        FormulaId f = parse_factor();
        while (lex.tok == Lexer::Tok::AndAnd) {
            lex.advance();
            f = arena.conj(f, parse_factor());
        }
        return f;
    }

    FormulaId parse_factor() {
        switch (lex.tok) {
        case Lexer::Tok::Bang: {
            lex.advance();
            return arena.negate(parse_factor());
        }
        case Lexer::Tok::F: {
            lex.advance();
            return arena.eventually(parse_factor());
        }
        case Lexer::Tok::X: {
            lex.advance();
            return arena.next(parse_factor());
        }
        case Lexer::Tok::G: {
            std::ostringstream os;
            os << "'G' at " << lex.tok_line << ":" << lex.tok_col
               << " is not co-safe (only X, U, F are allowed)";
            throw Error(ErrorCode::NonCoSafe, os.str());
        }
        case Lexer::Tok::LParen: {
            lex.advance();
            FormulaId f = parse_until();
            if (lex.tok != Lexer::Tok::RParen) lex.fail("expected ')'");
            lex.advance();
            return f;
        }
        case Lexer::Tok::True:
            lex.advance();
            return arena.mk_true();
        case Lexer::Tok::False:
            lex.advance();
            return arena.mk_false();
        case Lexer::Tok::Ident: {
            if (known && !known->count(lex.ident)) {
                std::ostringstream os;
                os << "unknown proposition name '" << lex.ident << "' at "
                   << lex.tok_line << ":" << lex.tok_col;
                throw Error(ErrorCode::UnknownAtom, os.str());
            }
            FormulaId f = arena.atom(lex.ident);
            lex.advance();
            return f;
        }
        default:
            lex.fail("expected formula");
        }
    }
};

}  // namespace

FormulaId parse_formula(FormulaArena& arena, std::string_view text,
                        const std::set<std::string>* known_atoms) {
    Parser p{Lexer{text}, arena, known_atoms};
    p.lex.advance();
    FormulaId f = p.parse_until();
    if (p.lex.tok != Lexer::Tok::End) p.lex.fail("trailing input");
    return f;
}

namespace {

int precedence(FormulaKind k) {
    switch (k) {
    case FormulaKind::Until: return 0;
    case FormulaKind::Or: return 1;
    case FormulaKind::And: return 2;
    default: return 3;
    }
}

void print_rec(const FormulaArena& a, FormulaId f, int parent_prec, std::string& out) {
    const FormulaNode& n = a.node(f);
    int prec = precedence(n.kind);
    bool paren = prec < parent_prec;
    if (paren) out += '(';
    switch (n.kind) {
    case FormulaKind::True: out += "true"; break;
    case FormulaKind::False: out += "false"; break;
    case FormulaKind::Atom: out += a.atom_name(n.atom); break;
    case FormulaKind::Not:
        out += '!';
        print_rec(a, n.lhs, 3, out);
        break;
    case FormulaKind::Next:
        out += "X ";
        print_rec(a, n.lhs, 3, out);
        break;
    case FormulaKind::Eventually:
        out += "F ";
        print_rec(a, n.lhs, 3, out);
        break;
    case FormulaKind::And:
        print_rec(a, n.lhs, 2, out);
        out += " && ";
        print_rec(a, n.rhs, 3, out);  // parser is left associative
        break;
    case FormulaKind::Or:
        print_rec(a, n.lhs, 1, out);
        out += " || ";
        print_rec(a, n.rhs, 2, out);
        break;
    case FormulaKind::Until:
        print_rec(a, n.lhs, 1, out);  // U is right associative and loosest
        out += " U ";
        print_rec(a, n.rhs, 0, out);
        break;
    }
    if (paren) out += ')';
}

}  // namespace

std::string print_formula(const FormulaArena& arena, FormulaId f) {
    std::string out;
    print_rec(arena, f, 0, out);
    return out;
}

namespace {

FormulaId pnf_rec(FormulaArena& a, FormulaId f, bool neg) {
    const FormulaNode n = a.node(f);  // copy: arena may reallocate
    switch (n.kind) {
    case FormulaKind::True: return neg ? a.mk_false() : a.mk_true();
    case FormulaKind::False: return neg ? a.mk_true() : a.mk_false();
    case FormulaKind::Atom: return neg ? a.negate(f) : f;
    case FormulaKind::Not: return pnf_rec(a, n.lhs, !neg);
    case FormulaKind::And: {
        FormulaId l = pnf_rec(a, n.lhs, neg);
        FormulaId r = pnf_rec(a, n.rhs, neg);
        return neg ? a.disj(l, r) : a.conj(l, r);
    }
    case FormulaKind::Or: {
        FormulaId l = pnf_rec(a, n.lhs, neg);
        FormulaId r = pnf_rec(a, n.rhs, neg);
        return neg ? a.conj(l, r) : a.disj(l, r);
    }
    case FormulaKind::Next:
        if (neg)
            throw Error(ErrorCode::NonCoSafe,
                        "negation over 'X' leaves the co-safe fragment");
        return a.next(pnf_rec(a, n.lhs, false));
    case FormulaKind::Until:
        if (neg)
            throw Error(ErrorCode::NonCoSafe,
                        "negation over 'U' leaves the co-safe fragment");
        return a.until(pnf_rec(a, n.lhs, false), pnf_rec(a, n.rhs, false));
    case FormulaKind::Eventually:
        if (neg)
            throw Error(ErrorCode::NonCoSafe,
                        "negation over 'F' leaves the co-safe fragment");
        return a.eventually(pnf_rec(a, n.lhs, false));
    }
    throw Error(ErrorCode::Generic, "bad formula node");
}

void atoms_rec(const FormulaArena& a, FormulaId f, std::set<std::uint32_t>& out) {
    const FormulaNode& n = a.node(f);
    if (n.kind == FormulaKind::Atom) {
        out.insert(n.atom);
        return;
    }
    if (n.lhs != kNoFormula) atoms_rec(a, n.lhs, out);
    if (n.rhs != kNoFormula) atoms_rec(a, n.rhs, out);
}

}  // namespace

FormulaId to_pnf(FormulaArena& arena, FormulaId f) { return pnf_rec(arena, f, false); }

std::vector<std::uint32_t> collect_atoms(const FormulaArena& arena, FormulaId f) {
    std::set<std::uint32_t> s;
    atoms_rec(arena, f, s);
    return {s.begin(), s.end()};
}

}  // namespace mats
