#pragma once

// Sparse multivariate power series, truncated by a weighted total degree.
//
// Two variable systems appear in the engine:
//   * flow times T_1, T_2, ... of the integrable hierarchy, wt(T_n) = n
//     (ids are the indices n >= 1);
//   * descendent couplings t^a_d together with the boundary coupling s,
//     wt(t^a_d) = a + 1 + r*d and wt(s) = r.  The id of t^a_d is the
//     integer a + 1 + r*d (the same integer that indexes the matching flow
//     time), and s has id 0.
//
// A series carries the weight bound W up to which its coefficients are
// reliable; arithmetic keeps only monomials of weight <= W and propagates
// the bound pessimistically (min over factors, reduced by derivation).
//
// The hierarchy solver privately uses a "jet" variant of the T system in
// which T_1 carries weight 0: coefficients are then exact polynomials in
// T_1 and truncation only grades T_2, T_3, ...  This matters because d/dT_1
// does not commute with truncation in T_1; grading only the higher times
// makes every operation in the solver exact.

#include "rspin/laurent.hpp"
#include "rspin/qring.hpp"
#include "rspin/rational.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rspin {

// ---------------------------------------------------------------------------
// coefficient-ring adapters

inline Rat zero_like(const Rat&) { return Rat(0); }
template <class K>
Laurent<K> zero_like(const Laurent<K>&) {
    return Laurent<K>{};
}
inline QElem zero_like(const QElem& x) { return QElem::zero(x.r()); }

inline void scale_in_place(Rat& x, const Rat& s) { x *= s; }
inline void scale_in_place(LRat& x, const Rat& s) { x.scale(s); }
inline void scale_in_place(QElem& x, const Rat& s) { x.scale(s); }

inline Rat unit_like(const Rat&) { return Rat(1); }
template <class K>
Laurent<K> unit_like(const Laurent<K>&) {
    return Laurent<K>::constant(unit_like(K{}));
}
inline QElem unit_like(const QElem& x) { return QElem::one(x.r()); }

// ---------------------------------------------------------------------------
// variable systems and monomials

struct VarSystem {
    enum class Kind { Flow, Coupling };

    Kind kind = Kind::Flow;
    int r = 2;           // spin parameter (weights of couplings depend on it)
    bool t1_jet = false; // Flow only: count T_1 with weight 0 (solver internal)

    static VarSystem flow_times(int r) { return {Kind::Flow, r, false}; }
    static VarSystem flow_jets(int r) { return {Kind::Flow, r, true}; }
    static VarSystem couplings(int r) { return {Kind::Coupling, r, false}; }

    long weight(int id) const {
        if (kind == Kind::Flow) {
            if (id < 1) throw std::invalid_argument("flow time id must be >= 1");
            return (t1_jet && id == 1) ? 0 : id;
        }
        if (id < 0) throw std::invalid_argument("coupling id must be >= 0");
        return id == 0 ? r : id;  // id 0 is s with wt(s) = r
    }

    std::string name(int id) const {
        std::ostringstream os;
        if (kind == Kind::Flow) {
            os << "T" << id;
        } else if (id == 0) {
            os << "s";
        } else {
            int a = (id - 1) % r, d = (id - 1 - a) / r;
            os << "t[" << a << "," << d << "]";
        }
        return os.str();
    }

    friend bool operator==(const VarSystem& a, const VarSystem& b) {
        return a.kind == b.kind && a.r == b.r && a.t1_jet == b.t1_jet;
    }
    friend bool operator!=(const VarSystem& a, const VarSystem& b) {
        return !(a == b);
    }
};

/// A monomial: (variable id, exponent) pairs, sorted by id, exponents > 0.
using Mono = std::vector<std::pair<int, int>>;

inline long mono_weight(const Mono& m, const VarSystem& sys) {
    long w = 0;
    for (const auto& [id, e] : m) w += sys.weight(id) * e;
    return w;
}

inline Mono mono_mul(const Mono& a, const Mono& b) {
    Mono out;
    out.reserve(a.size() + b.size());
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first)
            out.push_back(a[i++]);
        else if (a[i].first > b[j].first)
            out.push_back(b[j++]);
        else {
            out.emplace_back(a[i].first, a[i].second + b[j].second);
            ++i, ++j;
        }
    }
    for (; i < a.size(); ++i) out.push_back(a[i]);
    for (; j < b.size(); ++j) out.push_back(b[j]);
    return out;
}

inline int mono_exponent(const Mono& m, int id) {
    for (const auto& [v, e] : m)
        if (v == id) return e;
    return 0;
}

inline std::string mono_to_string(const Mono& m, const VarSystem& sys) {
    if (m.empty()) return "1";
    std::ostringstream os;
    bool first = true;
    for (const auto& [id, e] : m) {
        if (!first) os << "*";
        first = false;
        os << sys.name(id);
        if (e > 1) os << "^" << e;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// the series proper

template <class C>
class MSeries {
  public:
    MSeries(VarSystem sys, long W, C zero = C{})
        : sys_(sys), W_(W), zero_(std::move(zero)) {}

    static MSeries constant(VarSystem sys, long W, C value) {
        MSeries out(sys, W, zero_like(value));
        out.add_term({}, std::move(value));
        return out;
    }

    static MSeries variable(VarSystem sys, long W, int id, C scale) {
        MSeries out(sys, W, zero_like(scale));
        out.add_term({{id, 1}}, std::move(scale));
        return out;
    }

    const VarSystem& system() const { return sys_; }
    long weight_limit() const { return W_; }
    const std::map<Mono, C>& terms() const { return t_; }
    bool empty() const { return t_.empty(); }
    const C& zero_elem() const { return zero_; }

    /// Smallest monomial weight present (W+1 when the series is zero).
    long min_weight() const {
        long best = W_ + 1;
        for (const auto& [m, c] : t_) best = std::min(best, mono_weight(m, sys_));
        return best;
    }

    C coefficient(const Mono& m) const {
        auto it = t_.find(m);
        return it == t_.end() ? zero_ : it->second;
    }

    void add_term(Mono m, C c) {
        if (is_zero(c)) return;
        if (mono_weight(m, sys_) > W_) return;
        auto it = t_.find(m);
        if (it == t_.end()) {
            t_.emplace(std::move(m), std::move(c));
        } else {
            it->second += c;
            if (is_zero(it->second)) t_.erase(it);
        }
    }

    MSeries& operator+=(const MSeries& o) {
        match(o);
        W_ = std::min(W_, o.W_);
        for (const auto& [m, c] : o.t_) add_term(m, c);
        prune();
        return *this;
    }
    MSeries& operator-=(const MSeries& o) {
        match(o);
        W_ = std::min(W_, o.W_);
        for (const auto& [m, c] : o.t_) add_term(m, -c);
        prune();
        return *this;
    }
    friend MSeries operator+(MSeries a, const MSeries& b) { return a += b; }
    friend MSeries operator-(MSeries a, const MSeries& b) { return a -= b; }
    friend MSeries operator-(const MSeries& a) {
        MSeries out(a.sys_, a.W_, a.zero_);
        for (const auto& [m, c] : a.t_) out.t_.emplace(m, -c);
        return out;
    }

    friend MSeries operator*(const MSeries& a, const MSeries& b) {
        a.match(b);
        MSeries out(a.sys_, std::min(a.W_, b.W_), a.zero_);
        // cache monomial weights of b once
        std::vector<std::pair<long, const std::pair<const Mono, C>*>> bw;
        bw.reserve(b.t_.size());
        for (const auto& term : b.t_)
            bw.emplace_back(mono_weight(term.first, b.sys_), &term);
        for (const auto& [ma, ca] : a.t_) {
            const long wa = mono_weight(ma, a.sys_);
            if (wa > out.W_) continue;
            for (const auto& [wb, termb] : bw) {
                if (wa + wb > out.W_) continue;
                out.add_term(mono_mul(ma, termb->first), C(ca * termb->second));
            }
        }
        return out;
    }
    MSeries& operator*=(const MSeries& o) { return *this = *this * o; }

    MSeries& scale(const Rat& s) {
        if (sgn(s) == 0) {
            t_.clear();
            return *this;
        }
        for (auto& [m, c] : t_) scale_in_place(c, s);
        return *this;
    }
    MSeries scaled(const Rat& s) const {
        MSeries out = *this;
        out.scale(s);
        return out;
    }
    MSeries scaled_by(const C& s) const {
        MSeries out(sys_, W_, zero_);
        if (is_zero(s)) return out;
        for (const auto& [m, c] : t_) out.add_term(m, C(c * s));
        return out;
    }

    /// Formal partial derivative; the reliable weight drops by wt(id).
    MSeries derive(int id) const {
        MSeries out(sys_, W_ - sys_.weight(id), zero_);
        for (const auto& [m, c] : t_) {
            int e = mono_exponent(m, id);
            if (e == 0) continue;
            Mono dm;
            dm.reserve(m.size());
            for (const auto& [v, k] : m) {
                if (v == id) {
                    if (k > 1) dm.emplace_back(v, k - 1);
                } else {
                    dm.emplace_back(v, k);
                }
            }
            C dc = c;
            scale_in_place(dc, Rat(e));
            out.add_term(std::move(dm), std::move(dc));
        }
        return out;
    }

    /// Restrict the reliable weight (dropping heavier monomials).
    MSeries truncated(long W) const {
        MSeries out(sys_, std::min(W, W_), zero_);
        for (const auto& [m, c] : t_) out.add_term(m, c);
        return out;
    }

    /// Reinterpret in another system with the same variable ids (used to
    /// publish solver-internal jets in the standard weighting).  Monomials
    /// heavier than W in the target weighting are dropped.
    MSeries converted(const VarSystem& sys, long W) const {
        MSeries out(sys, W, zero_);
        for (const auto& [m, c] : t_) out.add_term(m, c);
        return out;
    }

    /// Substitute variables by weight-compatible linear combinations.
    /// Variables without a rule keep their id (which must exist with equal
    /// weight in the target system).
    MSeries substituted(
        const std::map<int, std::vector<std::pair<C, int>>>& rules,
        const VarSystem& target) const {
        for (const auto& [id, rhs] : rules)
            for (const auto& [c, tid] : rhs)
                if (target.weight(tid) != sys_.weight(id))
                    throw std::invalid_argument(
                        "substitute: weight-incompatible rule for " +
                        sys_.name(id));
        MSeries out(target, W_, zero_);
        for (const auto& [m, c] : t_) {
            MSeries acc = MSeries::constant(target, W_, c);
            for (const auto& [id, e] : m) {
                auto it = rules.find(id);
                MSeries factor(target, W_, zero_);
                if (it == rules.end()) {
                    if (target.weight(id) != sys_.weight(id))
                        throw std::invalid_argument(
                            "substitute: weight-incompatible identity for " +
                            sys_.name(id));
                    C unit = zero_like(zero_);
                    unit += unit_value();
                    factor.add_term({{id, 1}}, unit);
                } else {
                    for (const auto& [cc, tid] : it->second)
                        factor.add_term({{tid, 1}}, cc);
                }
                for (int k = 0; k < e; ++k) acc *= factor;
            }
            out += acc;
        }
        return out;
    }

    /// log of a series with constant term 1.  Requires every non-constant
    /// monomial to have positive weight, so the expansion terminates.
    MSeries log_series() const {
        MSeries h = *this;
        auto it = h.t_.find(Mono{});
        if (it == h.t_.end() || !(it->second == unit_value()))
            throw std::invalid_argument("log_series: constant term is not 1");
        h.t_.erase(Mono{});
        if (h.min_weight() < 1)
            throw std::invalid_argument("log_series: weight-0 remainder");
        MSeries out(sys_, W_, zero_);
        MSeries pw = h;
        long m = 1;
        while (!pw.empty()) {
            MSeries term = pw.scaled(Rat((m % 2 == 1) ? 1 : -1, m));
            out += term;
            pw *= h;
            ++m;
        }
        return out;
    }

    /// exp of a series with zero constant term (inverse of log_series).
    MSeries exp_series() const {
        if (t_.count(Mono{}))
            throw std::invalid_argument("exp_series: nonzero constant term");
        if (!empty() && min_weight() < 1)
            throw std::invalid_argument("exp_series: weight-0 term");
        MSeries out = MSeries::constant(sys_, W_, unit_value());
        MSeries pw = *this;
        long m = 1;
        while (!pw.empty()) {
            out += pw.scaled(Rat(1) / factorial(m));
            pw *= *this;
            ++m;
        }
        return out;
    }

    friend bool operator==(const MSeries& a, const MSeries& b) {
        return a.sys_ == b.sys_ && a.t_ == b.t_;
    }
    friend bool operator!=(const MSeries& a, const MSeries& b) {
        return !(a == b);
    }

    std::string to_string() const {
        if (t_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [m, c] : t_) {
            if (!first) os << " + ";
            first = false;
            os << "(" << coeff_to_string(c) << ")";
            if (!m.empty()) os << "*" << mono_to_string(m, sys_);
        }
        return os.str();
    }

  private:
    void match(const MSeries& o) const {
        if (sys_ != o.sys_)
            throw std::invalid_argument("mseries: mixing variable systems");
    }
    void prune() {
        for (auto it = t_.begin(); it != t_.end();) {
            if (mono_weight(it->first, sys_) > W_)
                it = t_.erase(it);
            else
                ++it;
        }
    }
    C unit_value() const { return unit_like(zero_); }

    static std::string coeff_to_string(const Rat& c) { return rat_to_string(c); }
    static std::string coeff_to_string(const LRat& c) { return c.to_string(); }
    static std::string coeff_to_string(const QElem& c) { return c.to_string(); }

    VarSystem sys_;
    long W_;
    C zero_;
    std::map<Mono, C> t_;
};

using SeriesL = MSeries<LRat>;   // hierarchy-side: Laurent-in-lambda coeffs
using SeriesR = MSeries<Rat>;    // a fixed lambda power extracted
using SeriesQ = MSeries<QElem>;  // coupling-side: q-ring coefficients

}  // namespace rspin
