#include "mats/guard.hpp"

#include <algorithm>
#include <bit>

namespace mats {

int popcount64(Letter l) { return std::popcount(l); }

Guard::Guard(std::vector<Cube> cubes) {
    for (const Cube& c : cubes) {
        if (!c.consistent()) continue;
        cubes_.push_back(c);
    }
    std::sort(cubes_.begin(), cubes_.end());
    cubes_.erase(std::unique(cubes_.begin(), cubes_.end()), cubes_.end());
    // Absorb cubes subsumed by a weaker cube (literal-subset check); keeps
    // DNFs produced by repeated disjoin from growing without bound.
    std::vector<Cube> kept;
    for (std::size_t i = 0; i < cubes_.size(); ++i) {
        const Cube& b = cubes_[i];
        bool subsumed = false;
        for (std::size_t j = 0; j < cubes_.size(); ++j) {
            if (i == j) continue;
            const Cube& a = cubes_[j];
            if ((b.pos & a.pos) == a.pos && (b.neg & a.neg) == a.neg) {
                subsumed = true;  // a is strictly weaker (cubes are distinct)
                break;
            }
        }
        if (!subsumed) kept.push_back(b);
    }
    cubes_ = std::move(kept);
    for (const Cube& c : cubes_) support_ |= c.pos | c.neg;
}

bool Guard::eval(Letter l) const {
    for (const Cube& c : cubes_)
        if (c.matches(l)) return true;
    return false;
}

Guard Guard::disjoin(const Guard& o) const {
    std::vector<Cube> all = cubes_;
    all.insert(all.end(), o.cubes_.begin(), o.cubes_.end());
    return Guard(std::move(all));
}

Guard Guard::conjoin(const Guard& o) const {
    std::vector<Cube> out;
    for (const Cube& a : cubes_)
        for (const Cube& b : o.cubes_)
            out.push_back(Cube{a.pos | b.pos, a.neg | b.neg});
    return Guard(std::move(out));
}

const std::vector<Letter>& Guard::minterms() const {
    if (minterms_ready_) return minterm_cache_;
    int bits = popcount64(support_);
    if (bits > kMaxSupport)
        throw Error(ErrorCode::CapExceeded,
                    "guard support exceeds " + std::to_string(kMaxSupport) +
                        " atoms; minterm enumeration refused");
    std::vector<int> idx;
    for (int i = 0; i < 64; ++i)
        if (support_ >> i & 1) idx.push_back(i);
    for (std::uint64_t m = 0; m < (1ull << bits); ++m) {
        Letter l = 0;
        for (int b = 0; b < bits; ++b)
            if (m >> b & 1) l |= 1ull << idx[b];
        if (eval(l)) minterm_cache_.push_back(l);
    }
    minterms_ready_ = true;
    return minterm_cache_;
}

std::vector<Guard::MinimalModel> Guard::minimal_models() const {
    const std::vector<Letter>& ms = minterms();
    std::vector<MinimalModel> out;
    for (Letter m : ms) {
        bool minimal = true;
        for (Letter other : ms) {
            if (other != m && (other & m) == other) { minimal = false; break; }
        }
        if (!minimal) continue;
        MinimalModel mm;
        mm.pos = m;
        Letter rest = support_ & ~m;
        for (int i = 0; i < 64 && rest; ++i) {
            Letter bit = 1ull << i;
            if (!(rest & bit)) continue;
            if (!eval(m | bit)) mm.neg |= bit;
        }
        out.push_back(mm);
    }
    std::sort(out.begin(), out.end(), [](const MinimalModel& a, const MinimalModel& b) {
        return a.pos != b.pos ? a.pos < b.pos : a.neg < b.neg;
    });
    return out;
}

std::string guard_to_string(const Guard& g, const std::vector<std::string>& atom_names) {
    if (g.is_false()) return "false";
    if (g.is_true()) return "true";
    std::string out;
    bool first_cube = true;
    for (const Cube& c : g.cubes()) {
        if (!first_cube) out += " | ";
        first_cube = false;
        if (c.pos == 0 && c.neg == 0) { out += "true"; continue; }
        bool first_lit = true;
        for (int i = 0; i < 64; ++i) {
            Letter bit = 1ull << i;
            if (c.pos & bit) {
                if (!first_lit) out += " & ";
                out += atom_names[i];
                first_lit = false;
            } else if (c.neg & bit) {
                if (!first_lit) out += " & ";
                out += "!" + atom_names[i];
                first_lit = false;
            }
        }
    }
    return out;
}

}  // namespace mats
