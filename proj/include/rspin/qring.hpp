#pragma once

// The scalar ring Q[q] / (q^{2(r+1)} + r).
//
// q is a formal (2(r+1))-th root of -r, so q^{r+1} squares to -r and every
// half-integer power of -r that the open/closed change of variables needs
// becomes an integer power of q.  The quotient is a ring, not necessarily a
// field (the modulus can factor over Q); the only divisions we ever perform
// are by nonzero monomials c*q^k, which are always invertible because
// q^{2(r+1)} = -r makes q a unit.
//
// Elements are dense coefficient vectors of length 2(r+1) over exact
// rationals.

#include "rspin/rational.hpp"

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rspin {

class QElem {
  public:
    QElem() : r_(0) {}  // empty sentinel; real elements carry r >= 2
    explicit QElem(int r) : r_(r), c_(order(r)) { check_r(r); }

    static QElem zero(int r) { return QElem(r); }

    static QElem one(int r) { return from_rational(r, Rat(1)); }

    static QElem from_rational(int r, const Rat& x) {
        QElem e(r);
        e.c_[0] = x;
        return e;
    }

    /// c * q^e with e an arbitrary integer, reduced by q^{2(r+1)} = -r.
    static QElem q_monomial(int r, const Rat& coeff, long e) {
        QElem out(r);
        const long n = order(r);
        long k = e % n;
        long flips = (e - k) / n;  // e = flips*n + k with k in (-n, n)
        if (k < 0) {
            k += n;
            flips -= 1;
        }
        out.c_[static_cast<size_t>(k)] = coeff * pow_rat(Rat(-r), flips);
        return out;
    }

    /// q^e reduced into the ring.
    static QElem q_power(int r, long e) { return q_monomial(r, Rat(1), e); }

    int r() const { return r_; }

    bool is_zero() const {
        for (const auto& x : c_)
            if (sgn(x) != 0) return false;
        return true;
    }

    /// The q^0 coefficient if the element is purely rational, else nullopt.
    std::optional<Rat> rational_part() const {
        for (size_t i = 1; i < c_.size(); ++i)
            if (sgn(c_[i]) != 0) return std::nullopt;
        return c_.empty() ? Rat(0) : c_[0];
    }

    const Rat& coeff(size_t i) const { return c_[i]; }

    QElem& operator+=(const QElem& o) {
        match(o);
        for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    QElem& operator-=(const QElem& o) {
        match(o);
        for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    friend QElem operator+(QElem a, const QElem& b) { return a += b; }
    friend QElem operator-(QElem a, const QElem& b) { return a -= b; }
    friend QElem operator-(const QElem& a) {
        QElem out(a.r_);
        for (size_t i = 0; i < a.c_.size(); ++i) out.c_[i] = -a.c_[i];
        return out;
    }

    friend QElem operator*(const QElem& a, const QElem& b) {
        a.match(b);
        const size_t n = a.c_.size();
        QElem out(a.r_);
        for (size_t i = 0; i < n; ++i) {
            if (sgn(a.c_[i]) == 0) continue;
            for (size_t j = 0; j < n; ++j) {
                if (sgn(b.c_[j]) == 0) continue;
                Rat prod = a.c_[i] * b.c_[j];
                size_t k = i + j;
                if (k >= n) {  // q^n = -r
                    k -= n;
                    prod *= Rat(-a.r_);
                }
                out.c_[k] += prod;
            }
        }
        return out;
    }
    QElem& operator*=(const QElem& o) { return *this = *this * o; }

    QElem& scale(const Rat& s) {
        for (auto& x : c_) x *= s;
        return *this;
    }
    friend QElem operator*(const Rat& s, QElem a) { return a.scale(s); }

    /// Divide by a monomial c*q^k (the only division the algorithms need).
    QElem divide_by_monomial(const QElem& m) const {
        match(m);
        long k = -1;
        for (size_t i = 0; i < m.c_.size(); ++i) {
            if (sgn(m.c_[i]) == 0) continue;
            if (k >= 0)
                throw std::invalid_argument("qring: divisor is not a monomial");
            k = static_cast<long>(i);
        }
        if (k < 0) throw std::invalid_argument("qring: division by zero");
        // inverse of c*q^k is (1/c) * q^{-k}
        return *this * q_monomial(r_, Rat(1) / m.c_[static_cast<size_t>(k)], -k);
    }

    friend bool operator==(const QElem& a, const QElem& b) {
        return a.r_ == b.r_ && a.c_ == b.c_;
    }
    friend bool operator!=(const QElem& a, const QElem& b) { return !(a == b); }

    /// Canonical text: "3/2 + 1/5*q^4", ascending powers, "0" when zero.
    std::string to_string() const {
        std::ostringstream os;
        bool first = true;
        for (size_t i = 0; i < c_.size(); ++i) {
            if (sgn(c_[i]) == 0) continue;
            Rat v = c_[i];
            if (first) {
                if (sgn(v) < 0) {
                    os << "-";
                    v = -v;
                }
            } else {
                os << (sgn(v) < 0 ? " - " : " + ");
                if (sgn(v) < 0) v = -v;
            }
            first = false;
            if (i == 0) {
                os << rat_to_string(v);
            } else {
                if (v != Rat(1)) os << rat_to_string(v) << "*";
                os << "q";
                if (i > 1) os << "^" << i;
            }
        }
        if (first) os << "0";
        return os.str();
    }

    static QElem parse(int r, const std::string& text) {
        QElem out(r);
        size_t pos = 0;
        const auto skip_ws = [&] {
            while (pos < text.size() && text[pos] == ' ') ++pos;
        };
        bool first = true;
        while (true) {
            skip_ws();
            if (pos >= text.size()) {
                if (first)
                    throw std::invalid_argument("qring: empty element text");
                break;
            }
            int sign = 1;
            if (text[pos] == '+' || text[pos] == '-') {
                if (text[pos] == '-') sign = -1;
                ++pos;
                skip_ws();
            } else if (!first) {
                throw std::invalid_argument("qring: expected '+' or '-' in '" +
                                            text + "'");
            }
            first = false;
            // optional rational coefficient
            size_t start = pos;
            while (pos < text.size() &&
                   (std::isdigit(static_cast<unsigned char>(text[pos])) ||
                    text[pos] == '/' || text[pos] == '-'))
                ++pos;
            Rat coeff(1);
            bool have_coeff = pos > start;
            if (have_coeff) coeff = rat_from_string(text.substr(start, pos - start));
            skip_ws();
            long e = 0;
            if (pos < text.size() && (text[pos] == '*' || text[pos] == 'q')) {
                if (text[pos] == '*') {
                    ++pos;
                    skip_ws();
                }
                if (pos >= text.size() || text[pos] != 'q')
                    throw std::invalid_argument("qring: expected 'q' in '" +
                                                text + "'");
                ++pos;
                if (pos < text.size() && text[pos] == '^') {
                    ++pos;
                    size_t es = pos;
                    if (pos < text.size() && (text[pos] == '-' || text[pos] == '+'))
                        ++pos;
                    while (pos < text.size() &&
                           std::isdigit(static_cast<unsigned char>(text[pos])))
                        ++pos;
                    if (pos == es)
                        throw std::invalid_argument("qring: bad exponent in '" +
                                                    text + "'");
                    e = std::stol(text.substr(es, pos - es));
                } else {
                    e = 1;
                }
            } else if (!have_coeff) {
                throw std::invalid_argument("qring: dangling sign in '" + text +
                                            "'");
            }
            out += q_monomial(r, sign < 0 ? Rat(-coeff) : coeff, e);
        }
        return out;
    }

  private:
    static long order(int r) { return 2L * (r + 1); }
    static void check_r(int r) {
        if (r < 2)
            throw std::invalid_argument("qring: spin parameter r must be >= 2");
    }
    void match(const QElem& o) const {
        if (r_ != o.r_)
            throw std::invalid_argument("qring: mixing elements of different rings");
    }

    int r_;
    std::vector<Rat> c_;
};

inline bool is_zero(const QElem& x) { return x.is_zero(); }

}  // namespace rspin
