// Hierarchy-solver tests: hand-computed low-weight jets for r=2 and r=3,
// the flow identities for the Lax operator and the wave function, Ramond
// residue vanishing, and the lambda-weighted two-point symmetry.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <rspin/hierarchy.hpp>

using namespace rspin;

namespace {

Mono mono(std::initializer_list<std::pair<int, int>> l) { return Mono(l); }

}  // namespace

TEST_CASE("r=2 solution reproduces hand-computed KdV jets") {
    const long W = 6;
    auto sol = solve_gd(2, W);

    // initial condition: f_0 = 2 lambda^{-2} x, nothing else
    auto f0 = sol.L.coefficient(0);
    CHECK(f0.coefficient(mono({{1, 1}})) == LRat::monomial(-2, Rat(2)));
    CHECK(sol.L.coefficient(2).coefficient(Mono{}) == LRat::constant(Rat(1)));
    CHECK(sol.L.coefficient(1).empty());

    // even flows are trivial for the Lax operator at r=2
    CHECK(f0.coefficient(mono({{2, 1}})) == LRat{});
    CHECK(f0.coefficient(mono({{4, 1}})) == LRat{});

    // du/dT_3 at the base point: (3/2)uu' + (1/4)u''' times lambda^2 = 6 lambda^{-2} x
    CHECK(f0.coefficient(mono({{1, 1}, {3, 1}})) == LRat::monomial(-2, Rat(6)));

    // wave function: [T_2] Phi = 2 lambda^{-1} x, [T_2^2] Phi = 2 lambda^{-2} x^2
    CHECK(sol.Phi.coefficient(mono({{1, 1}, {2, 1}})) == LRat::monomial(-1, Rat(2)));
    CHECK(sol.Phi.coefficient(mono({{1, 2}, {2, 2}})) == LRat::monomial(-2, Rat(2)));
    CHECK(sol.Phi.coefficient(Mono{}) == LRat::constant(Rat(1)));

    // log: the quadratic piece cancels in x^2 T_2^2, the linear one survives
    CHECK(sol.phi.coefficient(mono({{1, 1}, {2, 1}})) == LRat::monomial(-1, Rat(2)));
    CHECK(sol.phi.coefficient(mono({{1, 2}, {2, 2}})) == LRat{});
    CHECK(sol.phi.coefficient(Mono{}) == LRat{});

    // residue of L^{1/2} starts at u/2
    CHECK(sol.power_residue(1).coefficient(mono({{1, 1}})) ==
          LRat::monomial(-2, Rat(1)));
}

TEST_CASE("r=3 solution reproduces hand-computed jets") {
    const long W = 5;
    auto sol = solve_gd(3, W);

    // [T_2] flow feeds the Dx^1 coefficient only: [(L^{2/3})_+, L] = 6 lambda^{-3} Dx
    CHECK(sol.L.coefficient(1).coefficient(mono({{2, 1}})) ==
          LRat::monomial(-2, Rat(6)));
    CHECK(sol.L.coefficient(0).coefficient(mono({{2, 1}})) == LRat{});

    // wave function one-point jets: (L^{2/3})_+ kills 1, L itself does not
    CHECK(sol.Phi.coefficient(mono({{2, 1}})) == LRat{});
    CHECK(sol.Phi.coefficient(mono({{1, 1}, {3, 1}})) == LRat::monomial(-1, Rat(3)));
    CHECK(sol.Phi.coefficient(mono({{4, 1}})) == LRat::constant(Rat(2)));
}

TEST_CASE("flow identities hold for every time") {
    for (int r : {2, 3}) {
        const long W = (r == 2) ? 7 : 6;
        auto sol = solve_gd(r, W);
        for (int n = 1; n <= W; ++n) {
            CAPTURE(r); CAPTURE(n);
            CHECK(check_lax_flow(sol, n));
            CHECK(check_wave_flow(sol, n));
        }
    }
}

TEST_CASE("operator shape is preserved") {
    auto sol = solve_gd(3, 6);
    CHECK(sol.L.coefficient(3) ==
          SeriesL::constant(sol.jets, 6, LRat::constant(Rat(1))));
    CHECK(sol.L.coefficient(2).empty());
    CHECK(sol.L.max_order() == 3);
    for (const auto& [e, c] : sol.L.coefficients()) CHECK(e >= 0);
}

TEST_CASE("residues of integer powers vanish (Ramond vanishing)") {
    for (int r : {2, 3}) {
        auto sol = solve_gd(r, 6);
        for (int n = r; n <= 6; n += r) {
            CAPTURE(r); CAPTURE(n);
            CHECK(sol.power_residue(n).empty());
        }
    }
}

TEST_CASE("two-point symmetry with the lambda weights") {
    for (int r : {2, 3}) {
        const long W = 6;
        auto sol = solve_gd(r, W);
        for (int n = 1; n <= W; ++n)
            for (int m = n + 1; m <= W; ++m) {
                if (n % r == 0 || m % r == 0) continue;
                CAPTURE(r); CAPTURE(n); CAPTURE(m);
                CHECK(check_two_point_symmetry(sol, m, n));
            }
    }
}

TEST_CASE("mixed flow derivatives commute") {
    auto sol = solve_gd(3, 7);
    // d/dT_4 of the T_2-flow right-hand side against d/dT_2 of the T_4 one
    auto rhs = [&](int n, int e) {
        return commutator(sol.power_plus(n), sol.L, sol.W)
            .coefficient(e)
            .scaled_by(LRat::monomial(n - 1, Rat(1)));
    };
    bool saw_content = false;
    for (int e = 0; e <= 1; ++e) {
        auto a = rhs(2, e).derive(4), b = rhs(4, e).derive(2);
        long w = std::min(a.weight_limit(), b.weight_limit());
        CHECK(a.truncated(w) == b.truncated(w));
        saw_content = saw_content || !a.truncated(w).empty();
    }
    CHECK(saw_content);
}

TEST_CASE("genus components split the lambda expansion") {
    auto sol = solve_gd(2, 6);
    auto g0 = sol.genus_part(0), g1 = sol.genus_part(1);
    CHECK(g0.system() == VarSystem::flow_times(2));
    // [x T_2] phi = 2 lambda^{-1} lands in genus 0
    CHECK(g0.coefficient(mono({{1, 1}, {2, 1}})) == Rat(2));
    CHECK(g1.coefficient(mono({{1, 1}, {2, 1}})) == Rat(0));
    // r=2 genus-1 data appears at lambda^0
    bool has_g1 = !g1.empty();
    CHECK(has_g1);
}

TEST_CASE("published standard weighting truncates jets consistently") {
    auto sol = solve_gd(2, 5);
    auto std_phi = sol.phi_std();
    CHECK(std_phi.system() == VarSystem::flow_times(2));
    for (const auto& [m, c] : std_phi.terms())
        CHECK(mono_weight(m, std_phi.system()) <= 5);
    // the x T_2 term (standard weight 3) survives the conversion
    CHECK(std_phi.coefficient(mono({{1, 1}, {2, 1}})) == LRat::monomial(-1, Rat(2)));
}
