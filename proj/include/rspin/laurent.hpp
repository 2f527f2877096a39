#pragma once

// Laurent polynomials in the spectral parameter lambda, with exact
// coefficients.  Supports the handful of ring operations the hierarchy
// needs; the exponent window is whatever the data requires (no fixed cap).

#include "rspin/rational.hpp"

#include <map>
#include <sstream>
#include <string>

namespace rspin {

template <class K>
class Laurent {
  public:
    Laurent() = default;

    static Laurent monomial(int e, K coeff) {
        Laurent out;
        if (!is_zero(coeff)) out.c_.emplace(e, std::move(coeff));
        return out;
    }
    static Laurent constant(K coeff) { return monomial(0, std::move(coeff)); }

    bool is_zero_elem() const { return c_.empty(); }

    /// Coefficient of lambda^e (zero if absent).
    K coefficient(int e) const {
        auto it = c_.find(e);
        return it == c_.end() ? K(0) : it->second;
    }

    const std::map<int, K>& terms() const { return c_; }

    void add(int e, const K& v) {
        if (is_zero(v)) return;
        auto [it, inserted] = c_.emplace(e, v);
        if (!inserted) {
            it->second += v;
            if (is_zero(it->second)) c_.erase(it);
        }
    }

    Laurent& operator+=(const Laurent& o) {
        for (const auto& [e, v] : o.c_) add(e, v);
        return *this;
    }
    Laurent& operator-=(const Laurent& o) {
        for (const auto& [e, v] : o.c_) add(e, K(-v));
        return *this;
    }
    friend Laurent operator+(Laurent a, const Laurent& b) { return a += b; }
    friend Laurent operator-(Laurent a, const Laurent& b) { return a -= b; }
    friend Laurent operator-(const Laurent& a) {
        Laurent out;
        for (const auto& [e, v] : a.c_) out.c_.emplace(e, K(-v));
        return out;
    }

    friend Laurent operator*(const Laurent& a, const Laurent& b) {
        Laurent out;
        for (const auto& [ea, va] : a.c_)
            for (const auto& [eb, vb] : b.c_) out.add(ea + eb, K(va * vb));
        return out;
    }
    Laurent& operator*=(const Laurent& o) { return *this = *this * o; }

    Laurent& scale(const K& s) {
        if (is_zero(s)) {
            c_.clear();
            return *this;
        }
        for (auto& [e, v] : c_) v *= s;
        return *this;
    }
    friend Laurent operator*(const K& s, Laurent a) { return a.scale(s); }

    /// Multiply by lambda^e.
    Laurent shifted(int e) const {
        Laurent out;
        for (const auto& [k, v] : c_) out.c_.emplace(k + e, v);
        return out;
    }

    friend bool operator==(const Laurent& a, const Laurent& b) {
        return a.c_ == b.c_;
    }
    friend bool operator!=(const Laurent& a, const Laurent& b) {
        return !(a == b);
    }

    std::string to_string() const {
        if (c_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [e, v] : c_) {
            if (!first) os << " + ";
            first = false;
            os << v;
            if (e != 0) os << "*L^" << e;
        }
        return os.str();
    }

  private:
    std::map<int, K> c_;  // exponent -> coefficient, no zeros stored
};

template <class K>
inline bool is_zero(const Laurent<K>& x) {
    return x.is_zero_elem();
}

using LRat = Laurent<Rat>;

}  // namespace rspin
