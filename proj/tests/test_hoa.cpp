#include "doctest.h"

#include <sstream>

#include "mats/hoa.hpp"
#include "support/testkit.hpp"

using namespace mats;
using testkit::Rng;

TEST_CASE("export/import round trip preserves structure and language") {
    Rng rng(4001);
    std::vector<std::string> atoms = {"p", "q", "r"};
    for (int it = 0; it < 100; ++it) {
        Nba a = testkit::random_nba(atoms, 8, rng);
        std::istringstream in(export_hoa_string(a, "rt"));
        Nba b = import_hoa(in);
        CHECK(a.num_states == b.num_states);
        CHECK(a.atom_names == b.atom_names);
        CHECK(a.initial == b.initial);
        CHECK(a.accepting == b.accepting);
        CHECK(a.edge_count() == b.edge_count());
        for (int w = 0; w < 30; ++w) {
            std::vector<Letter> word(rng.uniform(0, 5));
            for (auto& l : word) l = rng.uniform(0, 7);
            CHECK(accepts(a, word) == accepts(b, word));
        }
    }
}

TEST_CASE("round trip of a translated formula") {
    FormulaArena arena;
    FormulaId f = to_pnf(arena, parse_formula(arena, "F(p && !q && F q) && (r U p)"));
    Nba a = translate(arena, f);
    std::istringstream in(export_hoa_string(a));
    Nba b = import_hoa(in);
    CHECK(a.num_states == b.num_states);
    CHECK(a.edge_count() == b.edge_count());
    Rng rng(4002);
    for (int w = 0; w < 200; ++w) {
        std::vector<Letter> word(rng.uniform(1, 6));
        for (auto& l : word) l = rng.uniform(0, 7);
        CHECK(accepts(a, word) == accepts(b, word));
    }
}

TEST_CASE("malformed input raises Syntax") {
    auto expect_syntax = [](const std::string& text) {
        std::istringstream in(text);
        try {
            import_hoa(in);
            CHECK_MESSAGE(false, text);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Syntax);
        }
    };
    expect_syntax("");                       // no header at all
    expect_syntax("HOA: v1\n--BODY--\n");    // missing --END--
    expect_syntax(
        "HOA: v1\nStates: 1\nStart: 0\nAP: 0\n"
        "Acceptance: 2 Inf(0)&Inf(1)\n--BODY--\nState: 0\n--END--\n");
    expect_syntax(
        "HOA: v1\nStates: 1\nStart: 0\nAP: 1 \"p\"\n"
        "Acceptance: 1 Inf(0)\n--BODY--\nState: 0\n[nonsense 0\n--END--\n");
}

TEST_CASE("exported text carries the co-safe acceptance header") {
    FormulaArena arena;
    Nba a = translate(arena, parse_formula(arena, "F p"));
    std::string text = export_hoa_string(a, "named");
    CHECK(text.find("HOA: v1") != std::string::npos);
    CHECK(text.find("Acceptance: 1 Inf(0)") != std::string::npos);
    CHECK(text.find("name: \"named\"") != std::string::npos);
    CHECK(text.find("--END--") != std::string::npos);
}
