// Operator-algebra tests: the composition rule through hand-expanded
// Leibniz cases, associativity on seeded pseudo-random operators, the
// order-by-order r-th root against frozen coefficients, and stability of
// results when the truncation window is deepened.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <rspin/psido.hpp>

#include <random>

using namespace rspin;

namespace {

using OpR = PsiDOT<Rat>;

// Work in the jet weighting so x = T_1 carries weight 0 and polynomial
// coefficients in x are exact regardless of W.
const VarSystem kJets2 = VarSystem::flow_jets(2);

SeriesR xpow(long W, int k) {
    SeriesR out = SeriesR::constant(kJets2, W, Rat(1));
    for (int i = 0; i < k; ++i)
        out *= SeriesR::variable(kJets2, W, 1, Rat(1));
    return out;
}

OpR mult_op(long W, int e_min, const SeriesR& f) {
    OpR out(kJets2, W, e_min);
    out.set_coefficient(0, f);
    return out;
}

/// Compare all coefficients at exponents >= floor_e.
bool agree_above(const OpR& a, const OpR& b, int floor_e) {
    int hi = std::max(a.max_order(), b.max_order());
    for (int e = floor_e; e <= hi; ++e)
        if (!(a.coefficient(e) == b.coefficient(e))) return false;
    return true;
}

}  // namespace

TEST_CASE("Leibniz composition on hand-expanded cases") {
    const long W = 8;
    const int e_min = -10;
    auto D = OpR::dx_power(kJets2, W, e_min, 1, Rat(1));
    auto X = mult_op(W, e_min, xpow(W, 1));

    SUBCASE("D o x = x D + 1") {
        auto P = compose(D, X);
        CHECK(P.coefficient(1) == xpow(W, 1));
        CHECK(P.coefficient(0) == SeriesR::constant(kJets2, W, Rat(1)));
        CHECK(P.coefficients().size() == 2);
    }

    SUBCASE("D^2 o x = x D^2 + 2 D") {
        auto P = compose(compose(D, D), X);
        CHECK(P.coefficient(2) == xpow(W, 1));
        CHECK(P.coefficient(1) == SeriesR::constant(kJets2, W, Rat(2)));
        CHECK(P.coefficients().size() == 2);
    }

    SUBCASE("D^{-1} o x = x D^{-1} - D^{-2}") {
        auto Dinv = OpR::dx_power(kJets2, W, e_min, -1, Rat(1));
        auto P = compose(Dinv, X);
        CHECK(P.coefficient(-1) == xpow(W, 1));
        CHECK(P.coefficient(-2) == SeriesR::constant(kJets2, W, Rat(-1)));
        CHECK(P.coefficients().size() == 2);  // chain stops at x'' = 0
    }

    SUBCASE("D^{-1} o x^2 = x^2 D^{-1} - 2x D^{-2} + 2 D^{-3}") {
        auto Dinv = OpR::dx_power(kJets2, W, e_min, -1, Rat(1));
        auto P = compose(Dinv, mult_op(W, e_min, xpow(W, 2)));
        CHECK(P.coefficient(-1) == xpow(W, 2));
        CHECK(P.coefficient(-2) == xpow(W, 1).scaled(Rat(-2)));
        CHECK(P.coefficient(-3) == SeriesR::constant(kJets2, W, Rat(2)));
        CHECK(P.coefficients().size() == 3);
    }

    SUBCASE("commutator with a multiplication operator is the derivative") {
        // f = x^3 + 2x, [D, f] = 3x^2 + 2
        auto F = mult_op(W, e_min, xpow(W, 3) + xpow(W, 1).scaled(Rat(2)));
        auto P = commutator(D, F);
        CHECK(P.coefficients().size() == 1);
        CHECK(P.coefficient(0) ==
              xpow(W, 2).scaled(Rat(3)) + SeriesR::constant(kJets2, W, Rat(2)));
    }
}

TEST_CASE("apply acts as a differential operator") {
    const long W = 8;
    const int e_min = -6;
    // A = D^2 + x
    auto A = OpR::dx_power(kJets2, W, e_min, 2, Rat(1));
    A.add_to_coefficient(0, xpow(W, 1));

    CHECK(A.apply(SeriesR::constant(kJets2, W, Rat(1))) == xpow(W, 1));
    CHECK(A.apply(xpow(W, 2)) ==
          SeriesR::constant(kJets2, W, Rat(2)) + xpow(W, 3));

    auto Dinv = OpR::dx_power(kJets2, W, e_min, -1, Rat(1));
    CHECK_THROWS_AS((A + Dinv).apply(xpow(W, 1)), std::invalid_argument);
}

TEST_CASE("composition is associative on seeded random operators") {
    const long W = 6;
    const int e_min = -12;
    std::mt19937 rng(12345);
    std::uniform_int_distribution<int> coeff(-3, 3);
    std::uniform_int_distribution<int> pick(0, 3);

    auto random_series = [&](long w) {
        SeriesR f(kJets2, w, Rat(0));
        // a small polynomial in x and T_2
        f += SeriesR::constant(kJets2, w, Rat(coeff(rng)));
        f += xpow(w, pick(rng)).scaled(Rat(coeff(rng)));
        f += SeriesR::variable(kJets2, w, 2, Rat(coeff(rng)));
        return f;
    };
    auto random_op = [&]() {
        OpR A(kJets2, W, e_min);
        for (int e = -2; e <= 2; ++e) A.set_coefficient(e, random_series(W));
        return A;
    };

    for (int trial = 0; trial < 4; ++trial) {
        auto A = random_op(), B = random_op(), C = random_op();
        auto L = compose(compose(A, B), C);
        auto R = compose(A, compose(B, C));
        // two compositions of order-<=2 operators can disturb exponents
        // within 4 of the floor; everything above must agree exactly
        CHECK(agree_above(L, R, e_min + 4));
    }
}

TEST_CASE("square root of D^2 + x, frozen coefficients") {
    const long W = 8;
    const int e_min = -10;
    auto A = OpR::dx_power(kJets2, W, e_min, 2, Rat(1));
    A.add_to_coefficient(0, xpow(W, 1));

    auto B = rth_root(A, 2);
    // B = D + (x/2) D^{-1} - (1/4) D^{-2} - (x^2/8) D^{-3} + ...
    CHECK(B.coefficient(1) == SeriesR::constant(kJets2, W, Rat(1)));
    CHECK(B.coefficient(0).empty());
    CHECK(B.coefficient(-1) == xpow(W, 1).scaled(Rat(1, 2)));
    CHECK(B.coefficient(-2) == SeriesR::constant(kJets2, W, Rat(-1, 4)));
    CHECK(B.coefficient(-3) == xpow(W, 2).scaled(Rat(-1, 8)));

    SUBCASE("resquaring recovers the operator above the window floor") {
        auto sq = compose(B, B);
        auto diff = sq - A;
        for (int e = e_min + 2; e <= diff.max_order(); ++e)
            CHECK(diff.coefficient(e).empty());
    }

    SUBCASE("root is monic-order checked") {
        CHECK_THROWS_AS(rth_root(A, 3), std::invalid_argument);
        auto bad = A;
        bad.set_coefficient(2, xpow(W, 1));
        CHECK_THROWS_AS(rth_root(bad, 2), std::invalid_argument);
    }
}

TEST_CASE("cube root with Laurent coefficients, frozen values") {
    using Op = PsiDO;
    const auto jets3 = VarSystem::flow_jets(3);
    const long W = 8;
    const int e_min = -11;
    const LRat one = LRat::constant(Rat(1));

    // A = D^3 + 3 lambda^{-3} x
    auto A = Op::dx_power(jets3, W, e_min, 3, one);
    A.add_to_coefficient(
        0, SeriesL::variable(jets3, W, 1, LRat::monomial(-3, Rat(3))));

    auto B = rth_root(A, 3);
    CHECK(B.coefficient(1) == SeriesL::constant(jets3, W, one));
    CHECK(B.coefficient(0).empty());
    CHECK(B.coefficient(-1).empty());
    CHECK(B.coefficient(-2) ==
          SeriesL::variable(jets3, W, 1, LRat::monomial(-3, Rat(1))));
    CHECK(B.coefficient(-3) ==
          SeriesL::constant(jets3, W, LRat::monomial(-3, Rat(-1))));

    SUBCASE("positive part of the cube is the operator itself") {
        auto cube = compose(compose(B, B), B);
        CHECK(cube.positive_part() == A);
    }
}

TEST_CASE("KdV three-halves flow generator") {
    using Op = PsiDO;
    const long W = 8;
    const int e_min = -12;
    const LRat one = LRat::constant(Rat(1));

    // L = D^2 + u with u = 2 lambda^{-2} x
    auto u = SeriesL::variable(kJets2, W, 1, LRat::monomial(-2, Rat(2)));
    auto L = Op::dx_power(kJets2, W, e_min, 2, one);
    L.add_to_coefficient(0, u);

    auto root = rth_root(L, 2);
    auto L32 = compose(L, root);
    // (L^{3/2})_+ = D^3 + (3/2) u D + (3/4) u'
    auto pos = L32.positive_part();
    CHECK(pos.coefficient(3) == SeriesL::constant(kJets2, W, one));
    CHECK(pos.coefficient(2).empty());
    CHECK(pos.coefficient(1) == u.scaled(Rat(3, 2)));
    CHECK(pos.coefficient(0) == u.derive(1).scaled(Rat(3, 4)));

    SUBCASE("residue of L^{1/2} is u/2") {
        CHECK(root.residue() == u.scaled(Rat(1, 2)));
    }
    SUBCASE("commutator of the generator with L has bounded support") {
        auto flow = commutator(pos, L);
        for (const auto& [e, c] : flow.coefficients()) {
            CHECK(e >= 0);
            CHECK(e <= 0);  // r=2: commutator support is {0,...,r-2} = {0}
        }
        CHECK(!flow.coefficient(0).empty());
    }
}

TEST_CASE("window stability: deepening the floor does not change results") {
    using Op = PsiDO;
    const long W = 8;
    const LRat one = LRat::constant(Rat(1));
    auto u = SeriesL::variable(kJets2, W, 1, LRat::monomial(-2, Rat(2)));

    auto make = [&](int e_min) {
        auto L = Op::dx_power(kJets2, W, e_min, 2, one);
        L.add_to_coefficient(0, u);
        return rth_root(L, 2);
    };
    const int e_min = -(W + 2 + 2);
    auto shallow = make(e_min);
    auto deep = make(e_min - 5);

    CHECK(shallow.residue() == deep.residue());
    for (int e = e_min + 3; e <= 1; ++e)
        CHECK(shallow.coefficient(e) == deep.coefficient(e));
}
