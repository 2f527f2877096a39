#pragma once

// Pseudodifferential operators in one variable x (identified with the first
// flow time T_1), with series coefficients:
//
//     A = sum_{e <= e_max} a_e(x, T, lambda) Dx^e.
//
// Composition follows from Dx^k f = sum_{l>=0} C(k,l) f^{(l)} Dx^{k-l} with
// the falling-factorial binomial C(k,l) = k(k-1)...(k-l+1)/l!, valid for
// negative k as well.  Operators are truncated below a window floor e_min;
// because composition only pushes information downward by the positive
// order of the co-factor, a floor a few steps deeper than anything consumed
// keeps every published coefficient exact (validated by the window-
// stability check in the verification suite).

#include "rspin/mseries.hpp"

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rspin {

template <class C>
class PsiDOT {
  public:
    using Series = MSeries<C>;

    PsiDOT(VarSystem sys, long W, int e_min, C zero = C{})
        : sys_(sys), W_(W), e_min_(e_min), zero_(std::move(zero)) {}

    /// Dx^k.
    static PsiDOT dx_power(VarSystem sys, long W, int e_min, int k, C unit) {
        PsiDOT out(sys, W, e_min, zero_like(unit));
        out.set_coefficient(k, Series::constant(sys, W, std::move(unit)));
        return out;
    }

    const VarSystem& system() const { return sys_; }
    long weight_limit() const { return W_; }
    int window_floor() const { return e_min_; }
    const std::map<int, Series>& coefficients() const { return coef_; }
    bool empty() const { return coef_.empty(); }

    int max_order() const {
        return coef_.empty() ? e_min_ - 1 : coef_.rbegin()->first;
    }

    Series coefficient(int e) const {
        auto it = coef_.find(e);
        return it == coef_.end() ? Series(sys_, W_, zero_) : it->second;
    }

    void set_coefficient(int e, Series s) {
        if (e < e_min_ || s.empty())
            coef_.erase(e);
        else
            coef_.insert_or_assign(e, std::move(s));
    }

    void add_to_coefficient(int e, const Series& s) {
        if (e < e_min_ || s.empty()) return;
        auto it = coef_.find(e);
        if (it == coef_.end()) {
            coef_.emplace(e, s);
        } else {
            it->second += s;
            if (it->second.empty()) coef_.erase(it);
        }
    }

    PsiDOT& operator+=(const PsiDOT& o) {
        match(o);
        for (const auto& [e, s] : o.coef_) add_to_coefficient(e, s);
        return *this;
    }
    PsiDOT& operator-=(const PsiDOT& o) {
        match(o);
        for (const auto& [e, s] : o.coef_) add_to_coefficient(e, -s);
        return *this;
    }
    friend PsiDOT operator+(PsiDOT a, const PsiDOT& b) { return a += b; }
    friend PsiDOT operator-(PsiDOT a, const PsiDOT& b) { return a -= b; }

    PsiDOT& scale(const Rat& s) {
        for (auto& [e, c] : coef_) c.scale(s);
        return *this;
    }
    PsiDOT scaled(const Rat& s) const {
        PsiDOT out = *this;
        out.scale(s);
        return out;
    }

    /// Multiply every coefficient by a scalar series (the operator f*A).
    PsiDOT left_mul(const Series& f) const {
        PsiDOT out(sys_, W_, e_min_, zero_);
        for (const auto& [e, c] : coef_) out.set_coefficient(e, f * c);
        return out;
    }

    /// Composition A o B, truncated at the weight cap (defaults to the
    /// operators' own weight bound).
    friend PsiDOT compose(const PsiDOT& a, const PsiDOT& b, long weight_cap) {
        a.match(b);
        const long W = std::min({a.W_, b.W_, weight_cap});
        PsiDOT out(a.sys_, W, a.e_min_, a.zero_);
        // derivative chains of b's coefficients, shared across a's terms
        std::map<int, std::vector<Series>> chains;
        for (const auto& [eb, cb] : b.coef_)
            chains[eb].push_back(cb.truncated(W));
        for (const auto& [ea, ca] : a.coef_) {
            const Series ca_t = ca.truncated(W);
            if (ca_t.empty()) continue;
            for (auto& [eb, chain] : chains) {
                for (int l = 0;; ++l) {
                    const int e_out = ea + eb - l;
                    if (e_out < a.e_min_) break;
                    if (ea >= 0 && l > ea) break;
                    if (l >= static_cast<int>(chain.size())) {
                        Series next = chain.back().derive(1);
                        chain.push_back(std::move(next));
                    }
                    const Series& dlb = chain[static_cast<size_t>(l)];
                    if (dlb.empty()) break;  // polynomial chain exhausted
                    Rat c = generalized_binomial(ea, l);
                    if (sgn(c) == 0) continue;
                    out.add_to_coefficient(e_out, (ca_t * dlb).scaled(c));
                }
            }
        }
        return out;
    }
    friend PsiDOT compose(const PsiDOT& a, const PsiDOT& b) {
        return compose(a, b, std::min(a.W_, b.W_));
    }

    friend PsiDOT commutator(const PsiDOT& a, const PsiDOT& b, long cap) {
        return compose(a, b, cap) - compose(b, a, cap);
    }
    friend PsiDOT commutator(const PsiDOT& a, const PsiDOT& b) {
        return compose(a, b) - compose(b, a);
    }

    /// Terms with nonnegative exponent (the differential-operator part).
    PsiDOT positive_part() const {
        PsiDOT out(sys_, W_, e_min_, zero_);
        for (const auto& [e, c] : coef_)
            if (e >= 0) out.coef_.emplace(e, c);
        return out;
    }

    /// Coefficient of Dx^{-1}.
    Series residue() const { return coefficient(-1); }

    /// Apply a purely differential operator to a function.
    Series apply(const Series& f, long weight_cap) const {
        const long W = std::min({W_, f.weight_limit(), weight_cap});
        Series out(sys_, W, zero_);
        std::vector<Series> chain{f.truncated(W)};
        for (const auto& [e, c] : coef_) {
            if (e < 0)
                throw std::invalid_argument(
                    "psido: applying an operator with negative-order terms");
            while (static_cast<int>(chain.size()) <= e)
                chain.push_back(chain.back().derive(1));
            out += c.truncated(W) * chain[static_cast<size_t>(e)];
        }
        return out;
    }
    Series apply(const Series& f) const { return apply(f, W_); }

    /// Unique monic r-th root B = Dx + b_0 + b_1 Dx^{-1} + ... of a monic
    /// order-r operator, matched order by order: after B_{<m} is fixed,
    /// the Dx^{r-1-m} coefficient of B^r is r*b_m plus known lower data.
    friend PsiDOT rth_root(const PsiDOT& a, int r, long weight_cap) {
        if (a.max_order() != r)
            throw std::invalid_argument("psido: root of an operator of wrong order");
        if (!(a.coefficient(r) ==
              Series::constant(a.sys_, a.coefficient(r).weight_limit(),
                               unit_like(a.zero_))))
            throw std::invalid_argument("psido: root requires a monic operator");
        const long W = std::min(a.W_, weight_cap);
        PsiDOT b = dx_power(a.sys_, W, a.e_min_, 1, unit_like(a.zero_));
        // adding c*Dx^{-m} to B shifts B^r by r*c*Dx^{r-1-m} plus lower
        // terms, so the defect at order r-1-m fixes the Dx^{-m} coefficient
        for (int m = 0; -m >= a.e_min_; ++m) {
            PsiDOT pw = b;
            for (int i = 1; i < r; ++i) pw = compose(pw, b, W);
            Series defect = a.coefficient(r - 1 - m).truncated(W) -
                            pw.coefficient(r - 1 - m);
            if (defect.empty()) continue;
            b.add_to_coefficient(-m, defect.scaled(Rat(1, r)));
        }
        return b;
    }
    friend PsiDOT rth_root(const PsiDOT& a, int r) {
        return rth_root(a, r, a.W_);
    }

    /// n-th power by repeated composition.
    PsiDOT power(int n, long weight_cap) const {
        if (n < 1) throw std::invalid_argument("psido: power exponent must be >= 1");
        PsiDOT out = *this;
        for (int i = 1; i < n; ++i) out = compose(out, *this, weight_cap);
        return out;
    }

    friend bool operator==(const PsiDOT& a, const PsiDOT& b) {
        return a.sys_ == b.sys_ && a.coef_ == b.coef_;
    }

    /// Debug form: "a_e * Dx^e" terms, descending exponent.
    std::string to_string() const {
        if (coef_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (auto it = coef_.rbegin(); it != coef_.rend(); ++it) {
            if (!first) os << " + ";
            first = false;
            os << "(" << it->second.to_string() << ") * Dx^" << it->first;
        }
        return os.str();
    }

  private:
    void match(const PsiDOT& o) const {
        if (sys_ != o.sys_ || e_min_ != o.e_min_)
            throw std::invalid_argument(
                "psido: mixing operators with different contexts");
    }
    VarSystem sys_;
    long W_;
    int e_min_;
    C zero_;
    std::map<int, Series> coef_;
};

using PsiDO = PsiDOT<LRat>;

}  // namespace rspin
