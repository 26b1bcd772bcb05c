#include "mats/hoa.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace mats {

namespace {

[[noreturn]] void fail(const std::string& msg) {
    throw Error(ErrorCode::Syntax, "HOA: " + msg);
}

// Recursive-descent parser for HOA label expressions:
//   expr := disj; disj := conj ('|' conj)*; conj := unit ('&' unit)*
//   unit := '!' unit | '(' expr ')' | 't' | 'f' | <ap-index>
struct LabelParser {
    const std::string& s;
    std::size_t i = 0;
    int num_ap;

    void skip() { while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i; }

    Guard parse() {
        Guard g = disj();
        skip();
        if (i != s.size()) fail("trailing characters in label '" + s + "'");
        return g;
    }

    Guard disj() {
        Guard g = conj();
        skip();
        while (i < s.size() && s[i] == '|') {
            ++i;
            g = g.disjoin(conj());
            skip();
        }
        return g;
    }

    Guard conj() {
        Guard g = unit();
        skip();
        while (i < s.size() && s[i] == '&') {
            ++i;
            g = g.conjoin(unit());
            skip();
        }
        return g;
    }

    Guard unit() {
        skip();
        if (i >= s.size()) fail("unexpected end of label '" + s + "'");
        char c = s[i];
        if (c == '!') {
            ++i;
            Guard g = unit();
            // Negate a guard that is a single literal or a cube; general
            // negation is handled by De Morgan over cubes.
            std::vector<Cube> acc{Cube{}};
            for (const Cube& cube : g.cubes()) {
                std::vector<Cube> next;
                for (int b = 0; b < 64; ++b) {
                    Letter bit = 1ull << b;
                    if (cube.pos & bit)
                        for (const Cube& a : acc) next.push_back({a.pos, a.neg | bit});
                    if (cube.neg & bit)
                        for (const Cube& a : acc) next.push_back({a.pos | bit, a.neg});
                }
                if (cube.pos == 0 && cube.neg == 0) next.clear();  // !true
                acc = Guard(std::move(next)).cubes();
            }
            if (g.is_false()) return Guard::truth();
            return Guard(std::move(acc));
        }
        if (c == '(') {
            ++i;
            Guard g = disj();
            skip();
            if (i >= s.size() || s[i] != ')') fail("missing ')' in label '" + s + "'");
            ++i;
            return g;
        }
        if (c == 't') { ++i; return Guard::truth(); }
        if (c == 'f') { ++i; return Guard::falsity(); }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            int v = 0;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
                v = v * 10 + (s[i++] - '0');
            if (v >= num_ap) fail("AP index out of range in label '" + s + "'");
            Cube cb;
            cb.pos = 1ull << v;
            return Guard({cb});
        }
        fail(std::string("unexpected character '") + c + "' in label '" + s + "'");
    }
};

std::string cube_to_hoa(const Cube& c) {
    if (c.pos == 0 && c.neg == 0) return "t";
    std::string out;
    for (int b = 0; b < 64; ++b) {
        Letter bit = 1ull << b;
        if (c.pos & bit) {
            if (!out.empty()) out += "&";
            out += std::to_string(b);
        } else if (c.neg & bit) {
            if (!out.empty()) out += "&";
            out += "!" + std::to_string(b);
        }
    }
    return out;
}

std::string guard_to_hoa(const Guard& g) {
    if (g.is_false()) return "f";
    std::string out;
    for (const Cube& c : g.cubes()) {
        if (!out.empty()) out += " | ";
        out += cube_to_hoa(c);
    }
    return out;
}

}  // namespace

Nba import_hoa(std::istream& in) {
    Nba nba;
    nba.num_states = -1;
    bool acceptance_ok = false;
    std::string line;

    // Header
    bool saw_hoa = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key.empty() || key[0] == '/') continue;
        if (key == "HOA:") {
            std::string v;
            ls >> v;
            if (v != "v1") fail("unsupported version '" + v + "'");
            saw_hoa = true;
        } else if (key == "States:") {
            ls >> nba.num_states;
        } else if (key == "Start:") {
            int s;
            while (ls >> s) nba.initial.push_back(s);
        } else if (key == "AP:") {
            int k = 0;
            ls >> k;
            if (k > kMaxAtoms) fail("more than 64 atomic propositions");
            for (int j = 0; j < k; ++j) {
                std::string q;
                ls >> std::ws;
                if (ls.peek() != '"') fail("AP names must be quoted");
                ls.get();
                std::string name;
                char c;
                while (ls.get(c) && c != '"') name += c;
                nba.atom_names.push_back(name);
            }
        } else if (key == "Acceptance:") {
            std::string rest;
            std::getline(ls, rest);
            std::string squashed;
            for (char c : rest)
                if (!std::isspace(static_cast<unsigned char>(c))) squashed += c;
            if (squashed != "1Inf(0)")
                fail("only 'Acceptance: 1 Inf(0)' is supported, got '" + rest + "'");
            acceptance_ok = true;
        } else if (key == "--BODY--") {
            break;
        } else {
            // acc-name, tool, name, properties: ignored
        }
    }
    if (!saw_hoa) fail("missing 'HOA: v1' header");
    if (nba.num_states < 0) fail("missing 'States:' header");
    if (!acceptance_ok) fail("missing or unsupported 'Acceptance:' header");
    if (nba.initial.empty()) fail("missing 'Start:' header");
    std::sort(nba.initial.begin(), nba.initial.end());
    nba.initial.erase(std::unique(nba.initial.begin(), nba.initial.end()),
                      nba.initial.end());

    nba.accepting.assign(nba.num_states, false);
    nba.out.resize(nba.num_states);
    int cur = -1;
    while (std::getline(in, line)) {
        // strip comments and whitespace
        std::size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        std::size_t b = line.find_last_not_of(" \t\r");
        std::string t = line.substr(a, b - a + 1);
        if (t == "--END--") { cur = -2; break; }
        if (t.rfind("State:", 0) == 0) {
            std::string rest = t.substr(6);
            // optional label, state index, optional acc signature
            std::istringstream rs(rest);
            rs >> std::ws;
            if (rs.peek() == '[') {
                std::string lbl;
                std::getline(rs, lbl, ']');
                // state labels unsupported for edges-with-labels automata
                fail("state labels are not supported");
            }
            int idx;
            if (!(rs >> idx)) fail("bad State: line '" + t + "'");
            if (idx < 0 || idx >= nba.num_states) fail("state index out of range");
            cur = idx;
            std::string sig;
            std::getline(rs, sig);
            if (sig.find('{') != std::string::npos) {
                if (sig.find("{0}") == std::string::npos)
                    fail("unsupported acceptance signature in '" + t + "'");
                nba.accepting[idx] = true;
            }
            continue;
        }
        if (cur < 0) fail("edge before any State: line");
        // edge: [label] dst {acc?}
        if (t[0] != '[') fail("edges must carry a label: '" + t + "'");
        std::size_t close = t.find(']');
        if (close == std::string::npos) fail("missing ']' in edge '" + t + "'");
        std::string label = t.substr(1, close - 1);
        std::istringstream es(t.substr(close + 1));
        int dst;
        if (!(es >> dst)) fail("bad destination in edge '" + t + "'");
        if (dst < 0 || dst >= nba.num_states) fail("destination out of range");
        LabelParser lp{label, 0, static_cast<int>(nba.atom_names.size())};
        Guard g = lp.parse();
        if (!g.satisfiable()) continue;
        Guard& slot = nba.edge_ref(cur, dst);
        slot = slot.disjoin(g);
    }
    if (cur != -2) fail("missing --END--");
    for (int q : nba.initial)
        if (q < 0 || q >= nba.num_states) fail("initial state out of range");
    return nba;
}

Nba import_hoa_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Generic, "cannot open " + path);
    return import_hoa(in);
}

void export_hoa(const Nba& nba, std::ostream& out, const std::string& name) {
    out << "HOA: v1\n";
    if (!name.empty()) out << "name: \"" << name << "\"\n";
    out << "States: " << nba.num_states << "\n";
    for (int q : nba.initial) out << "Start: " << q << "\n";
    out << "AP: " << nba.atom_names.size();
    for (const std::string& a : nba.atom_names) out << " \"" << a << "\"";
    out << "\n";
    out << "acc-name: co-Buchi-reach\n";  // informational only
    out << "Acceptance: 1 Inf(0)\n";
    out << "--BODY--\n";
    for (int q = 0; q < nba.num_states; ++q) {
        out << "State: " << q;
        if (nba.accepting[q]) out << " {0}";
        out << "\n";
        for (const auto& [dst, g] : nba.out[q])
            out << "  [" << guard_to_hoa(g) << "] " << dst << "\n";
    }
    out << "--END--\n";
}

std::string export_hoa_string(const Nba& nba, const std::string& name) {
    std::ostringstream os;
    export_hoa(nba, os, name);
    return os.str();
}

}  // namespace mats
