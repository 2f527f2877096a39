#pragma once

// Order-by-order solution of the r-th Gelfand-Dikii hierarchy
//
//     dL/dT_n = lambda^{n-1} [(L^{n/r})_+, L],   L|_{T_{>=2}=0} = Dx^r + r lambda^{-r} x,
//
// together with the associated wave function
//
//     dPhi/dT_n = lambda^{n-1} (L^{n/r})_+ Phi,  Phi|_{T_{>=2}=0} = 1,
//
// where x is identified with T_1.  Everything is computed as jets at the
// origin of T_2, T_3, ...: the coefficient of a monomial T^alpha is read
// off the flow of the smallest time in its support, using only strictly
// lower-weight data.  Internally the weight grades T_2, T_3, ... only
// (VarSystem::flow_jets), so coefficients are exact polynomials in x and
// truncation commutes with every operation the solver performs; results
// are re-published in the standard weighting where wt(T_1) = 1.

#include "rspin/psido.hpp"

#include <stdexcept>
#include <vector>

namespace rspin {

/// The jet-weight-(rem_w) part of `src`, integrated in the T_n direction:
/// each monomial m becomes m*T_n with coefficient lambda^{n-1} c / mult.
/// Monomials containing a time in [2, n) are skipped — those jets belong
/// to (and were already produced by) an earlier flow.
inline SeriesL flow_update(const SeriesL& src, int n, long rem_w, long W_out) {
    SeriesL upd(src.system(), W_out, src.zero_elem());
    for (const auto& [m, c] : src.terms()) {
        if (mono_weight(m, src.system()) != rem_w) continue;
        bool earlier = false;
        for (const auto& [id, e] : m)
            if (id >= 2 && id < n) {
                earlier = true;
                break;
            }
        if (earlier) continue;
        Mono alpha = mono_mul(m, Mono{{n, 1}});
        int mult = mono_exponent(alpha, n);
        upd.add_term(std::move(alpha), c * LRat::monomial(n - 1, Rat(1, mult)));
    }
    return upd;
}

struct GDSolution {
    int r;
    long W;       // jet-weight bound on the T_2, T_3, ... dependence
    int e_min;    // operator window floor
    VarSystem jets;
    VarSystem standard;
    PsiDO L;      // solved Lax operator, jet weighting
    PsiDO root;   // L^{1/r} at full weight
    SeriesL Phi;  // wave function, jet weighting
    SeriesL phi;  // log Phi

    GDSolution(int r_, long W_)
        : r(r_),
          W(W_),
          e_min(-static_cast<int>(W_) - r_ - 2),
          jets(VarSystem::flow_jets(r_)),
          standard(VarSystem::flow_times(r_)),
          L(jets, W_, e_min),
          root(jets, W_, e_min),
          Phi(jets, W_),
          phi(jets, W_) {}

    /// (L^{n/r})_+ for 1 <= n <= W.
    const PsiDO& power_plus(int n) const { return plus_.at(n - 1); }
    /// res L^{n/r} for 1 <= n <= W.
    const SeriesL& power_residue(int n) const { return res_.at(n - 1); }

    void push_power(PsiDO plus, SeriesL res) {
        plus_.push_back(std::move(plus));
        res_.push_back(std::move(res));
    }

    /// Lax coefficient of Dx^e in the standard weighting.
    SeriesL lax_coefficient_std(int e) const {
        return L.coefficient(e).converted(standard, W);
    }
    SeriesL residue_std(int n) const {
        return power_residue(n).converted(standard, W);
    }
    SeriesL phi_std() const { return phi.converted(standard, W); }

    /// The lambda^{g-1} part of phi in the standard weighting.
    SeriesR genus_part(int g) const {
        SeriesL p = phi_std();
        SeriesR out(standard, W, Rat(0));
        for (const auto& [m, c] : p.terms()) out.add_term(m, c.coefficient(g - 1));
        return out;
    }

  private:
    std::vector<PsiDO> plus_;  // index n-1
    std::vector<SeriesL> res_;
};

inline GDSolution solve_gd(int r, long W) {
    if (r < 2 || W < 1)
        throw std::invalid_argument("solve_gd: need r >= 2 and W >= 1");
    GDSolution s(r, W);
    const LRat one = LRat::constant(Rat(1));

    s.L.set_coefficient(r, SeriesL::constant(s.jets, W, one));
    s.L.set_coefficient(0,
                        SeriesL::variable(s.jets, W, 1, LRat::monomial(-r, Rat(r))));

    // --- fill the Lax operator level by level ---------------------------
    for (long w = 2; w <= W; ++w) {
        // the root to the deepest weight any flow at this level consumes
        PsiDO R = rth_root(s.L, r, w - 2);
        PsiDO P = R;
        for (int n = 2; n <= w; ++n) {
            P = compose(P, R, w - n);
            if (n % r == 0) continue;  // (L^m)_+ = L^m commutes with L
            PsiDO G = commutator(P.positive_part(), s.L, w - n);
            for (const auto& [e, c] : G.coefficients())
                if (e < 0 || e > r - 2)
                    throw std::runtime_error(
                        "solve_gd: flow leaves the reduced operator shape");
            for (int e = 0; e <= r - 2; ++e) {
                SeriesL upd = flow_update(G.coefficient(e), n, w - n, W);
                if (!upd.empty()) s.L.add_to_coefficient(e, upd);
            }
        }
    }

    // --- full-weight roots, their positive parts and residues -----------
    s.root = rth_root(s.L, r, W);
    PsiDO P = s.root;
    s.push_power(P.positive_part(), P.residue());
    for (int n = 2; n <= W; ++n) {
        P = compose(P, s.root, W);
        s.push_power(P.positive_part(), P.residue());
    }

    // --- wave function ---------------------------------------------------
    s.Phi = SeriesL::constant(s.jets, W, one);
    for (long w = 2; w <= W; ++w) {
        for (int n = 2; n <= w; ++n) {
            SeriesL H = s.power_plus(n).apply(s.Phi, w - n);
            SeriesL upd = flow_update(H, n, w - n, W);
            if (!upd.empty()) s.Phi += upd;
        }
    }
    s.phi = s.Phi.log_series();
    return s;
}

// ---------------------------------------------------------------------------
// a-posteriori identities (each one exercises data the solver did not use)

/// dL/dT_n == lambda^{n-1} [(L^{n/r})_+, L] up to jet weight W - wt(T_n).
inline bool check_lax_flow(const GDSolution& s, int n) {
    const long cap = s.W - s.jets.weight(n);
    PsiDO rhs = commutator(s.power_plus(n), s.L, cap);
    for (int e = 0; e <= s.r; ++e) {
        SeriesL lhs = s.L.coefficient(e).derive(n).truncated(cap);
        SeriesL rhse = rhs.coefficient(e)
                           .scaled_by(LRat::monomial(n - 1, Rat(1)))
                           .truncated(cap);
        if (!(lhs == rhse)) return false;
    }
    for (const auto& [e, c] : rhs.coefficients())
        if ((e < 0 || e > s.r) && !c.truncated(cap).empty()) return false;
    return true;
}

/// dPhi/dT_n == lambda^{n-1} (L^{n/r})_+ Phi up to jet weight W - wt(T_n).
inline bool check_wave_flow(const GDSolution& s, int n) {
    const long cap = s.W - s.jets.weight(n);
    SeriesL lhs = s.Phi.derive(n).truncated(cap);
    SeriesL rhs = s.power_plus(n)
                      .apply(s.Phi, cap)
                      .scaled_by(LRat::monomial(n - 1, Rat(1)));
    return lhs == rhs.truncated(cap);
}

/// lambda^{n-1} d(res L^{n/r})/dT_m == lambda^{m-1} d(res L^{m/r})/dT_n.
inline bool check_two_point_symmetry(const GDSolution& s, int m, int n) {
    SeriesL lhs =
        s.power_residue(n).scaled_by(LRat::monomial(n - 1, Rat(1))).derive(m);
    SeriesL rhs =
        s.power_residue(m).scaled_by(LRat::monomial(m - 1, Rat(1))).derive(n);
    long w = std::min(lhs.weight_limit(), rhs.weight_limit());
    return lhs.truncated(w) == rhs.truncated(w);
}

/// res L^{n/r} == 0 whenever r divides n.
inline bool check_ramond_residues(const GDSolution& s) {
    for (int n = s.r; n <= s.W; n += s.r)
        if (!s.power_residue(n).empty()) return false;
    return true;
}

}  // namespace rspin
