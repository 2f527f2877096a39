#pragma once

// Correlator keys, exact dimension gates, and the recursive evaluator that
// computes open r-spin intersection numbers from universal identities:
// the two genus-0 recursions (one trading a psi power against a boundary
// node, one against an interior node), the genus-1 recursion, string and
// dilaton, together with the closed extended sector feeding them.  Base
// data comes either from extraction out of the disk/cylinder potentials or
// from an exact linear fit of the extended primaries against disk values.

#include <rspin/potentials.hpp>

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rspin {

// ---------------------------------------------------------------------------
// Keys

enum class Sector { open, ext };

/// A correlator key: genus, a multiset of interior insertions tau^a_d stored
/// as sorted (twist, psi-power) pairs, and a count k of boundary points.
/// Extended-sector keys are genus 0, boundary-free, and may carry one twist
/// equal to -1; open-sector twists range over 0..r-1.
struct CorrelatorKey {
    Sector sector = Sector::open;
    int g = 0;
    std::vector<std::pair<int, int>> ins;
    int k = 0;

    void canonicalize() { std::sort(ins.begin(), ins.end()); }
    int l() const { return static_cast<int>(ins.size()); }
    long sum_a() const {
        long s = 0;
        for (const auto& [a, d] : ins) s += a;
        return s;
    }
    long sum_d() const {
        long s = 0;
        for (const auto& [a, d] : ins) s += d;
        return s;
    }
    /// Weighted degree of the corresponding coupling monomial.
    long weight(int r) const {
        long w = static_cast<long>(r) * k;
        for (const auto& [a, d] : ins) w += a + 1 + static_cast<long>(r) * d;
        return w;
    }
    std::string str() const {
        std::ostringstream os;
        os << (sector == Sector::open ? "open" : "ext") << " g" << g << " [";
        for (std::size_t i = 0; i < ins.size(); ++i) {
            if (i) os << ",";
            os << ins[i].first << ":" << ins[i].second;
        }
        os << "]";
        if (sector == Sector::open) os << " k" << k;
        return os.str();
    }

    friend bool operator==(const CorrelatorKey&, const CorrelatorKey&) = default;
    friend bool operator<(const CorrelatorKey& x, const CorrelatorKey& y) {
        return std::tie(x.sector, x.g, x.k, x.ins) <
               std::tie(y.sector, y.g, y.k, y.ins);
    }
};

inline CorrelatorKey open_key(int g, std::vector<std::pair<int, int>> ins,
                              int k) {
    CorrelatorKey key{Sector::open, g, std::move(ins), k};
    key.canonicalize();
    return key;
}

inline CorrelatorKey ext_key(std::vector<std::pair<int, int>> ins) {
    CorrelatorKey key{Sector::ext, 0, std::move(ins), 0};
    key.canonicalize();
    return key;
}

// ---------------------------------------------------------------------------
// Dimension gate

/// Exact selection rule: true when the key can carry a nonzero value.
/// Open keys: 2*sum(d) + (2*sum(a) + (k + g - 1)(r - 2))/r = 2l + k + 3g - 3
/// with an integer quotient.  Extended keys: sum(d) = l - 3 -
/// (sum(a) - (r - 2))/r with an integer quotient; a second twist -1 puts the
/// key outside the sector, hence value zero.  Malformed keys are rejected.
inline bool dimension_gate(const CorrelatorKey& key, int r) {
    if (r < 2) throw std::invalid_argument("dimension_gate: need r >= 2");
    if (key.sector == Sector::open) {
        if (key.g < 0 || key.k < 0)
            throw std::invalid_argument("dimension_gate: bad open key");
        for (const auto& [a, d] : key.ins)
            if (a < 0 || a > r - 1 || d < 0)
                throw std::invalid_argument(
                    "dimension_gate: open twist out of range");
        const long num =
            2 * key.sum_a() + (static_cast<long>(key.k) + key.g - 1) * (r - 2);
        if (num % r != 0) return false;
        return 2 * key.sum_d() + num / r ==
               2 * static_cast<long>(key.l()) + key.k + 3 * static_cast<long>(key.g) - 3;
    }
    if (key.g != 0 || key.k != 0)
        throw std::invalid_argument("dimension_gate: bad extended key");
    int negatives = 0;
    for (const auto& [a, d] : key.ins) {
        if (a < -1 || a > r - 1 || d < 0)
            throw std::invalid_argument(
                "dimension_gate: extended twist out of range");
        if (a == -1) ++negatives;
    }
    if (negatives >= 2) return false;
    const long num = key.sum_a() - (r - 2);
    if (num % r != 0) return false;
    return key.sum_d() == static_cast<long>(key.l()) - 3 - num / r;
}

/// Extended keys whose twist multiset contains the top twist r-1 but no
/// compensating twist -1 carry a vanishing class: they are identically zero,
/// psi powers or not.
inline bool ext_known_zero(const CorrelatorKey& key, int r) {
    bool top = false, neg = false;
    for (const auto& [a, d] : key.ins) {
        top = top || a == r - 1;
        neg = neg || a == -1;
    }
    return top && !neg;
}

// ---------------------------------------------------------------------------
// Value store

enum class Provenance { base, pipeline_a, recursion };

inline const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::base: return "base";
        case Provenance::pipeline_a: return "pipeline-A";
        default: return "recursion";
    }
}

/// Sparse map key -> exact value with provenance; re-inserting a key with a
/// different value is a hard error.
class CorrelatorTable {
  public:
    using Entry = std::pair<Rat, Provenance>;

    void insert(CorrelatorKey key, const Rat& value, Provenance prov) {
        key.canonicalize();
        auto [it, fresh] = entries_.try_emplace(std::move(key), value, prov);
        if (!fresh && it->second.first != value)
            throw std::runtime_error("CorrelatorTable: conflicting values for " +
                                     it->first.str() + ": " +
                                     rat_to_string(it->second.first) + " vs " +
                                     rat_to_string(value));
    }
    std::optional<Rat> find(CorrelatorKey key) const {
        key.canonicalize();
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        return it->second.first;
    }
    void merge(const CorrelatorTable& other) {
        for (const auto& [key, entry] : other.entries_)
            insert(key, entry.first, entry.second);
    }
    std::size_t size() const { return entries_.size(); }
    const std::map<CorrelatorKey, Entry>& entries() const { return entries_; }

  private:
    std::map<CorrelatorKey, Entry> entries_;
};

/// Raised when a reduction bottoms out at a primary with no stored value.
struct NeedsBaseError : std::runtime_error {
    CorrelatorKey blocking;
    explicit NeedsBaseError(const CorrelatorKey& key)
        : std::runtime_error("needs base value for " + key.str()),
          blocking(key) {}
};

// ---------------------------------------------------------------------------
// Multiset combinatorics

namespace detail {

using Insertions = std::vector<std::pair<int, int>>;

/// Distinct (twist, psi-power) types of a sorted list with multiplicities.
inline std::vector<std::pair<std::pair<int, int>, int>> grouped(
    const Insertions& ins) {
    std::vector<std::pair<std::pair<int, int>, int>> out;
    for (const auto& t : ins) {
        if (!out.empty() && out.back().first == t)
            ++out.back().second;
        else
            out.emplace_back(t, 1);
    }
    return out;
}

/// Remove one copy of a type from a sorted list (the type must be present).
inline Insertions minus_one(const Insertions& ins, std::pair<int, int> t) {
    Insertions out = ins;
    auto it = std::find(out.begin(), out.end(), t);
    if (it == out.end())
        throw std::logic_error("minus_one: type not present");
    out.erase(it);
    return out;
}

/// Enumerate the splits S + R of a multiset of insertions.  fn(S, R, m) runs
/// once per distinct split; m counts the labelled two-colourings collapsing
/// onto it (a product of binomials), so summing m*f(S)*g(R) over the calls
/// equals the sum of f*g over labelled subsets.
template <class Fn>
void for_each_split(const Insertions& ins, Fn&& fn) {
    const auto types = grouped(ins);
    Insertions left, right;
    auto rec = [&](auto&& self, std::size_t idx, const Rat& mult) -> void {
        if (idx == types.size()) {
            fn(left, right, mult);
            return;
        }
        const auto [t, cnt] = types[idx];
        for (int take = 0; take <= cnt; ++take) {
            left.insert(left.end(), take, t);
            right.insert(right.end(), cnt - take, t);
            self(self, idx + 1, mult * binomial(cnt, take));
            left.resize(left.size() - take);
            right.resize(right.size() - (cnt - take));
        }
    };
    rec(rec, 0, Rat(1));
}

// ---------------------------------------------------------------------------
// Right-hand sides of the recursions, parameterized by the value functions.
// The evaluator plugs its own recursive eval in; identity checks plug raw
// potential extraction in.  Each builder receives the distinguished
// insertion already lowered by one psi power (a1, d1), the remaining
// insertions, and the boundary count of the left-hand side.

/// Boundary-node genus-0 recursion (needs k >= 1 on the left-hand side):
/// an extended factor absorbs the lowered insertion against a disk factor
/// (co-twists summing to r-2), or two disk factors share the boundary
/// points binomially with one distinguished point and one node point each.
template <class OpenFn, class ExtFn>
Rat boundary_node_rhs(int r, int a1, int d1, const Insertions& rest, int k,
                      OpenFn&& open, ExtFn&& ext) {
    Rat total(0);
    for_each_split(rest, [&](const Insertions& s, const Insertions& rr,
                             const Rat& mult) {
        for (int a = -1; a <= r - 2; ++a) {
            auto left = s;
            left.emplace_back(a, 0);
            left.emplace_back(a1, d1);
            const Rat lv = ext(ext_key(std::move(left)));
            if (is_zero(lv)) continue;
            auto right = rr;
            right.emplace_back(r - 2 - a, 0);
            total += mult * lv * open(open_key(0, std::move(right), k));
        }
        for (int k1 = 0; k1 <= k - 1; ++k1) {
            auto left = s;
            left.emplace_back(a1, d1);
            const Rat lv = open(open_key(0, std::move(left), k1));
            if (is_zero(lv)) continue;
            total += mult * binomial(k - 1, k1) * lv *
                     open(open_key(0, Insertions(rr), k - 1 - k1 + 2));
        }
    });
    return total;
}

/// Interior-node genus-0 recursion (needs a second insertion t2, which
/// rides in the factor opposite the lowered psi power); all k boundary
/// points stay together in the interior-node sum and split binomially with
/// one extra node point in the boundary-node sum.
template <class OpenFn, class ExtFn>
Rat interior_node_rhs(int r, int a1, int d1, std::pair<int, int> t2,
                      const Insertions& rest2, int k, OpenFn&& open,
                      ExtFn&& ext) {
    Rat total(0);
    for_each_split(rest2, [&](const Insertions& s, const Insertions& rr,
                              const Rat& mult) {
        for (int a = -1; a <= r - 2; ++a) {
            auto left = s;
            left.emplace_back(a, 0);
            left.emplace_back(a1, d1);
            const Rat lv = ext(ext_key(std::move(left)));
            if (is_zero(lv)) continue;
            auto right = rr;
            right.emplace_back(r - 2 - a, 0);
            right.push_back(t2);
            total += mult * lv * open(open_key(0, std::move(right), k));
        }
        for (int k1 = 0; k1 <= k; ++k1) {
            auto left = s;
            left.emplace_back(a1, d1);
            const Rat lv = open(open_key(0, std::move(left), k1));
            if (is_zero(lv)) continue;
            auto right = rr;
            right.push_back(t2);
            total += mult * binomial(k, k1) * lv *
                     open(open_key(0, std::move(right), k - k1 + 1));
        }
    });
    return total;
}

/// Genus-1 recursion: extended times genus-1, genus-0 times genus-1 with
/// the boundary points split binomially and one new point on the genus-1
/// side, plus half the genus-0 value of the key with every insertion kept
/// (the distinguished one lowered) and one extra boundary point.
template <class Open0Fn, class Open1Fn, class ExtFn>
Rat genus_one_rhs(int r, int a1, int d1, const Insertions& rest, int k,
                  Open0Fn&& open0, Open1Fn&& open1, ExtFn&& ext) {
    Rat total(0);
    for_each_split(rest, [&](const Insertions& s, const Insertions& rr,
                             const Rat& mult) {
        for (int a = -1; a <= r - 2; ++a) {
            auto left = s;
            left.emplace_back(a, 0);
            left.emplace_back(a1, d1);
            const Rat lv = ext(ext_key(std::move(left)));
            if (is_zero(lv)) continue;
            auto right = rr;
            right.emplace_back(r - 2 - a, 0);
            total += mult * lv * open1(open_key(1, std::move(right), k));
        }
        for (int k1 = 0; k1 <= k; ++k1) {
            auto left = s;
            left.emplace_back(a1, d1);
            const Rat lv = open0(open_key(0, std::move(left), k1));
            if (is_zero(lv)) continue;
            total += mult * binomial(k, k1) * lv *
                     open1(open_key(1, Insertions(rr), k - k1 + 1));
        }
    });
    auto closed_up = rest;
    closed_up.emplace_back(a1, d1);
    total += Rat(1, 2) * open0(open_key(0, std::move(closed_up), k + 1));
    return total;
}

/// Extended-sector recursion: the two distinguished co-insertions j1, j2
/// are forced into the factor opposite the lowered psi power.
template <class ExtFn>
Rat extended_rhs(int r, int a1, int d1, std::pair<int, int> j1,
                 std::pair<int, int> j2, const Insertions& rest2,
                 ExtFn&& ext) {
    Rat total(0);
    for_each_split(rest2, [&](const Insertions& s, const Insertions& rr,
                              const Rat& mult) {
        for (int a = -1; a <= r - 2; ++a) {
            auto left = s;
            left.emplace_back(a, 0);
            left.emplace_back(a1, d1);
            const Rat lv = ext(ext_key(std::move(left)));
            if (is_zero(lv)) continue;
            auto right = rr;
            right.emplace_back(r - 2 - a, 0);
            right.push_back(j1);
            right.push_back(j2);
            total += mult * lv * ext(ext_key(std::move(right)));
        }
    });
    return total;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Recursive evaluator

/// Which of the legal distinguished insertions a reduction step uses.  The
/// value of a correlator is independent of this choice; exposing the knob
/// lets tests assert that equality literally.
enum class ChoicePolicy { first_descendent, last_descendent };

class Evaluator {
  public:
    Evaluator(int r, CorrelatorTable base,
              ChoicePolicy policy = ChoicePolicy::first_descendent)
        : r_(r), base_(std::move(base)), policy_(policy) {}

    int r() const { return r_; }
    const CorrelatorTable& base() const { return base_; }
    const std::map<CorrelatorKey, Rat>& memo() const { return memo_; }

    /// Exact value of any key (either sector, open genus 0 or 1), fully
    /// reduced to stored primaries.  Gate-failing keys give 0.
    Rat eval(CorrelatorKey key) {
        key.canonicalize();
        if (!dimension_gate(key, r_)) return Rat(0);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        Rat value;
        if (key.sector == Sector::ext)
            value = reduce_ext(key);
        else if (key.g == 0)
            value = reduce_g0(key);
        else if (key.g == 1)
            value = reduce_g1(key);
        else
            throw std::invalid_argument("eval: genus out of range: " + key.str());
        memo_.emplace(std::move(key), value);
        return value;
    }

    Rat eval_g0(const CorrelatorKey& key) {
        require(key, Sector::open, 0);
        return eval(key);
    }
    Rat eval_g1(const CorrelatorKey& key) {
        require(key, Sector::open, 1);
        return eval(key);
    }
    Rat eval_extended(const CorrelatorKey& key) {
        require(key, Sector::ext, 0);
        return eval(key);
    }

  private:
    static void require(const CorrelatorKey& key, Sector s, int g) {
        if (key.sector != s || key.g != g)
            throw std::invalid_argument("evaluator: wrong sector/genus: " +
                                        key.str());
    }

    bool has_type(const CorrelatorKey& key, int a, int d) const {
        return std::binary_search(key.ins.begin(), key.ins.end(),
                                  std::pair{a, d});
    }

    std::pair<int, int> pick_descendent(const detail::Insertions& ins) const {
        if (policy_ == ChoicePolicy::first_descendent) {
            for (const auto& t : ins)
                if (t.second >= 1) return t;
        } else {
            for (auto it = ins.rbegin(); it != ins.rend(); ++it)
                if (it->second >= 1) return *it;
        }
        throw std::logic_error("pick_descendent: no psi power available");
    }

    // Genus 0: a psi-free twist-0 insertion shifts one psi power down off
    // any other insertion; a twist-0 insertion carrying a single psi power
    // drops out against the factor g + l + k - 1.  Both moves preserve the
    // dimension balance and need the remaining key to be stable
    // (2g - 2 + k + 2l > 0).  With psi powers left, trade one against a
    // node; otherwise look the primary up.
    Rat reduce_g0(const CorrelatorKey& key) {
        if (has_type(key, 0, 0)) {
            const long rest_l = key.l() - 1;
            if (2 * static_cast<long>(key.g) - 2 + key.k + 2 * rest_l > 0) {
                const auto rest = detail::minus_one(key.ins, {0, 0});
                Rat total(0);
                for (const auto& [t, cnt] : detail::grouped(rest)) {
                    if (t.second == 0) continue;
                    auto shifted = detail::minus_one(rest, t);
                    shifted.emplace_back(t.first, t.second - 1);
                    total += Rat(cnt) *
                             eval(open_key(key.g, std::move(shifted), key.k));
                }
                return total;
            }
        }
        if (has_type(key, 0, 1)) {
            const long rest_l = key.l() - 1;
            if (2 * static_cast<long>(key.g) - 2 + key.k + 2 * rest_l > 0)
                return Rat(key.g + rest_l + key.k - 1) *
                       eval(open_key(key.g,
                                     detail::minus_one(key.ins, {0, 1}),
                                     key.k));
        }
        if (key.sum_d() > 0) {
            if (key.k >= 1) return trr_boundary(key);
            if (key.l() >= 2) return trr_interior(key);
            throw std::logic_error("reduce_g0: no applicable reduction for " +
                                   key.str());
        }
        auto v = base_.find(key);
        if (!v) throw NeedsBaseError(key);
        return *v;
    }

    // Genus 0, k >= 1: trade one psi power on a distinguished insertion
    // against either an interior node (extended factor times disk factor,
    // co-twists summing to r-2) or a boundary node (two disk factors).
    Rat trr_boundary(const CorrelatorKey& key) {
        const auto t1 = pick_descendent(key.ins);
        const auto rest = detail::minus_one(key.ins, t1);
        auto self = [this](const CorrelatorKey& k) { return eval(k); };
        return detail::boundary_node_rhs(r_, t1.first, t1.second - 1, rest,
                                         key.k, self, self);
    }

    // Genus 0, l >= 2: same trade, but the node pinches off two interior
    // insertions; the second distinguished one rides in the factor opposite
    // the lowered psi power.
    Rat trr_interior(const CorrelatorKey& key) {
        const auto t1 = pick_descendent(key.ins);
        const auto rest = detail::minus_one(key.ins, t1);
        if (rest.empty())
            throw std::logic_error("trr_interior: needs a second insertion");
        const auto t2 = policy_ == ChoicePolicy::first_descendent
                            ? rest.front()
                            : rest.back();
        auto self = [this](const CorrelatorKey& k) { return eval(k); };
        return detail::interior_node_rhs(r_, t1.first, t1.second - 1, t2,
                                         detail::minus_one(rest, t2), key.k,
                                         self, self);
    }

    // Genus 1.  Psi-free keys vanish identically; otherwise trade one psi
    // power against an interior node, a boundary node, or the node closing
    // the genus-1 surface up into a disk.
    Rat reduce_g1(const CorrelatorKey& key) {
        if (key.sum_d() == 0) return Rat(0);
        const auto t1 = pick_descendent(key.ins);
        auto self = [this](const CorrelatorKey& k) { return eval(k); };
        return detail::genus_one_rhs(r_, t1.first, t1.second - 1,
                                     detail::minus_one(key.ins, t1), key.k,
                                     self, self, self);
    }

    // Extended sector.  Known zeros short-circuit; psi-free keys are table
    // lookups; otherwise trade one psi power against an interior node with
    // two distinguished co-insertions forced into the far factor.
    Rat reduce_ext(const CorrelatorKey& key) {
        if (ext_known_zero(key, r_)) return Rat(0);
        if (key.sum_d() == 0) {
            auto v = base_.find(key);
            if (!v) throw NeedsBaseError(key);
            return *v;
        }
        const auto t1 = pick_descendent(key.ins);
        const auto rest = detail::minus_one(key.ins, t1);
        if (rest.size() < 2)
            throw std::logic_error("reduce_ext: needs two co-insertions");
        std::pair<int, int> j1, j2;
        if (policy_ == ChoicePolicy::first_descendent) {
            j1 = rest[0];
            j2 = rest[1];
        } else {
            j1 = rest[rest.size() - 1];
            j2 = rest[rest.size() - 2];
        }
        auto self = [this](const CorrelatorKey& k) { return eval(k); };
        return detail::extended_rhs(
            r_, t1.first, t1.second - 1, j1, j2,
            detail::minus_one(detail::minus_one(rest, j1), j2), self);
    }

    int r_;
    CorrelatorTable base_;
    ChoicePolicy policy_;
    std::map<CorrelatorKey, Rat> memo_;
};

// ---------------------------------------------------------------------------
// Key enumeration and pipeline-A seeding

/// Every open-sector key of the given genus with weight <= bound, sorted;
/// optionally only the keys passing the dimension gate.
inline std::vector<CorrelatorKey> all_open_keys(int r, int g, long bound,
                                                bool candidates_only) {
    std::vector<std::pair<int, int>> types;
    for (int a = 0; a <= r - 1; ++a)
        for (int d = 0; a + 1 + static_cast<long>(r) * d <= bound; ++d)
            types.emplace_back(a, d);
    std::sort(types.begin(), types.end());
    std::vector<CorrelatorKey> out;
    detail::Insertions cur;
    auto rec = [&](auto&& self, std::size_t idx, long wleft) -> void {
        if (idx == types.size()) {
            for (int k = 0; static_cast<long>(r) * k <= wleft; ++k) {
                CorrelatorKey key = open_key(g, cur, k);
                if (!candidates_only || dimension_gate(key, r))
                    out.push_back(std::move(key));
            }
            return;
        }
        const auto [a, d] = types[idx];
        const long tw = a + 1 + static_cast<long>(r) * d;
        self(self, idx + 1, wleft);
        int taken = 0;
        while (wleft - static_cast<long>(taken + 1) * tw >= 0) {
            ++taken;
            cur.emplace_back(a, d);
            self(self, idx + 1, wleft - static_cast<long>(taken) * tw);
        }
        cur.resize(cur.size() - taken);
    };
    rec(rec, 0, bound);
    std::sort(out.begin(), out.end());
    return out;
}

/// Insert every gate-passing psi-free key of the potential's genus up to the
/// weight bound, valued by extraction.  These are the seeds the recursions
/// bottom out on.
inline void seed_primaries(CorrelatorTable& table, const OpenPotential& pot,
                           long bound,
                           Provenance prov = Provenance::pipeline_a) {
    if (bound > pot.W)
        throw std::invalid_argument("seed_primaries: bound beyond potential weight");
    for (const auto& key : all_open_keys(pot.r, pot.g, bound, true)) {
        if (key.sum_d() != 0) continue;
        table.insert(key, extract_open(pot, key.ins, key.k), prov);
    }
}

// ---------------------------------------------------------------------------
// Exact fit of extended primaries

struct ExtendedFit {
    CorrelatorTable primaries;                   // determined unknowns
    std::vector<CorrelatorKey> underdetermined;  // seen but not pinned
    long equations = 0;
    long unknowns = 0;
};

namespace detail {

struct FitRow {
    std::map<int, Rat> coeff;  // column -> coefficient
    Rat rhs;
    std::string label;
};

/// Row-reduce an exact linear system.  Returns values for the columns that
/// are fully determined; throws on any inconsistent equation.
inline std::map<int, Rat> solve_exact(std::vector<FitRow> rows, long ncols,
                                      std::vector<int>* free_cols) {
    std::vector<std::vector<Rat>> m;
    std::vector<Rat> rhs;
    std::vector<std::string> labels;
    m.reserve(rows.size());
    for (auto& row : rows) {
        std::vector<Rat> dense(ncols, Rat(0));
        for (auto& [j, c] : row.coeff) dense[j] = c;
        m.push_back(std::move(dense));
        rhs.push_back(row.rhs);
        labels.push_back(row.label);
    }
    const std::size_t nrows = m.size();
    std::vector<long> pivot_row_of(ncols, -1);
    std::size_t rank = 0;
    for (long col = 0; col < ncols && rank < nrows; ++col) {
        std::size_t piv = rank;
        while (piv < nrows && is_zero(m[piv][col])) ++piv;
        if (piv == nrows) continue;
        std::swap(m[piv], m[rank]);
        std::swap(rhs[piv], rhs[rank]);
        std::swap(labels[piv], labels[rank]);
        const Rat inv = Rat(1) / m[rank][col];
        for (long j = col; j < ncols; ++j) m[rank][j] *= inv;
        rhs[rank] *= inv;
        for (std::size_t i = 0; i < nrows; ++i) {
            if (i == rank || is_zero(m[i][col])) continue;
            const Rat f = m[i][col];
            for (long j = col; j < ncols; ++j) m[i][j] -= f * m[rank][j];
            rhs[i] -= f * rhs[rank];
        }
        pivot_row_of[col] = static_cast<long>(rank);
        ++rank;
    }
    for (std::size_t i = rank; i < nrows; ++i)
        if (!is_zero(rhs[i]))
            throw std::runtime_error("extended fit: inconsistent system at " +
                                     labels[i]);
    std::map<int, Rat> values;
    for (long col = 0; col < ncols; ++col) {
        const long row = pivot_row_of[col];
        if (row < 0) {
            if (free_cols) free_cols->push_back(static_cast<int>(col));
            continue;
        }
        bool entangled = false;
        for (long j = 0; j < ncols; ++j)
            if (j != col && !is_zero(m[row][j])) {
                entangled = true;
                break;
            }
        if (entangled) {
            if (free_cols) free_cols->push_back(static_cast<int>(col));
            continue;
        }
        values.emplace(static_cast<int>(col), rhs[row]);
    }
    return values;
}

}  // namespace detail

/// Determine the extended-sector primaries from disk data alone: assemble
/// every instance of the two genus-0 recursions whose left side has exactly
/// one psi power (so each extended factor is a primary), read all disk
/// factors off the genus-0 potential, and solve the resulting overdetermined
/// linear system exactly.  Inconsistency is a hard error.  Unknowns the
/// system does not pin are reported, never guessed.
inline ExtendedFit fit_extended_primaries(const OpenPotential& disk,
                                          long instance_bound = 0) {
    if (disk.g != 0)
        throw std::invalid_argument("fit_extended_primaries: need the genus-0 potential");
    const int r = disk.r;
    const long bound = instance_bound > 0 ? instance_bound : disk.W;
    if (bound > disk.W)
        throw std::invalid_argument("fit_extended_primaries: bound beyond potential weight");

    auto open_value = [&](detail::Insertions ins, int k) {
        CorrelatorKey key = open_key(0, std::move(ins), k);
        if (!dimension_gate(key, r)) return Rat(0);
        return extract_open(disk, key.ins, key.k);
    };

    std::map<CorrelatorKey, int> column_of;
    std::vector<CorrelatorKey> key_of;
    // nullopt: the factor is a symbolic unknown (registered as a column)
    auto ext_const = [&](const CorrelatorKey& key) -> std::optional<Rat> {
        if (!dimension_gate(key, r) || ext_known_zero(key, r)) return Rat(0);
        return std::nullopt;
    };
    auto column = [&](const CorrelatorKey& key) {
        auto [it, fresh] = column_of.try_emplace(key, static_cast<int>(key_of.size()));
        if (fresh) key_of.push_back(key);
        return it->second;
    };

    std::vector<detail::FitRow> rows;
    // adds  c * <ext factor> * open_co  to the row under assembly
    auto accumulate = [&](detail::FitRow& row, const Rat& c,
                          detail::Insertions ext_ins, const Rat& open_co) {
        if (is_zero(c) || is_zero(open_co)) return;
        CorrelatorKey ek = ext_key(std::move(ext_ins));
        if (auto cv = ext_const(ek)) {
            row.rhs -= c * (*cv) * open_co;  // constant: fold into the rhs
            return;
        }
        row.coeff[column(ek)] += c * open_co;
    };

    for (const auto& key : all_open_keys(r, 0, bound, true)) {
        if (key.sum_d() != 1) continue;  // exactly one psi power on the left
        const auto t1 = [&] {
            for (const auto& t : key.ins)
                if (t.second == 1) return t;
            throw std::logic_error("fit: missing psi insertion");
        }();
        const auto rest = detail::minus_one(key.ins, t1);
        const int a1 = t1.first;
        const int k = key.k;

        if (k >= 1) {  // boundary-node instance
            detail::FitRow row;
            row.label = key.str() + " / boundary node";
            row.rhs = open_value(key.ins, k);
            detail::for_each_split(
                rest, [&](const detail::Insertions& s,
                          const detail::Insertions& rr, const Rat& mult) {
                    for (int a = -1; a <= r - 2; ++a) {
                        auto left = s;
                        left.emplace_back(a, 0);
                        left.emplace_back(a1, 0);
                        auto right = rr;
                        right.emplace_back(r - 2 - a, 0);
                        accumulate(row, mult, std::move(left),
                                   open_value(std::move(right), k));
                    }
                    for (int k1 = 0; k1 <= k - 1; ++k1) {
                        auto left = s;
                        left.emplace_back(a1, 0);
                        const Rat prod = binomial(k - 1, k1) *
                                         open_value(std::move(left), k1) *
                                         open_value(detail::Insertions(rr),
                                                    k - 1 - k1 + 2);
                        row.rhs -= mult * prod;
                    }
                });
            rows.push_back(std::move(row));
        }

        for (const auto& [t2, cnt2] : detail::grouped(rest)) {
            // interior-node instance for each distinct co-insertion
            const auto rest2 = detail::minus_one(rest, t2);
            detail::FitRow row;
            row.label = key.str() + " / interior node at " +
                        std::to_string(t2.first) + ":" +
                        std::to_string(t2.second);
            row.rhs = open_value(key.ins, k);
            detail::for_each_split(
                rest2, [&](const detail::Insertions& s,
                           const detail::Insertions& rr, const Rat& mult) {
                    for (int a = -1; a <= r - 2; ++a) {
                        auto left = s;
                        left.emplace_back(a, 0);
                        left.emplace_back(a1, 0);
                        auto right = rr;
                        right.emplace_back(r - 2 - a, 0);
                        right.push_back(t2);
                        accumulate(row, mult, std::move(left),
                                   open_value(std::move(right), k));
                    }
                    for (int k1 = 0; k1 <= k; ++k1) {
                        auto left = s;
                        left.emplace_back(a1, 0);
                        auto right = rr;
                        right.push_back(t2);
                        const Rat prod = binomial(k, k1) *
                                         open_value(std::move(left), k1) *
                                         open_value(std::move(right), k - k1 + 1);
                        row.rhs -= mult * prod;
                    }
                });
            rows.push_back(std::move(row));
        }
    }

    ExtendedFit fit;
    fit.equations = static_cast<long>(rows.size());
    fit.unknowns = static_cast<long>(key_of.size());
    std::vector<int> free_cols;
    const auto values = detail::solve_exact(rows, fit.unknowns, &free_cols);
    for (const auto& [col, value] : values)
        fit.primaries.insert(key_of[col], value, Provenance::base);
    for (int col : free_cols) fit.underdetermined.push_back(key_of[col]);
    // residual back-check on every equation whose unknowns were all pinned
    for (const auto& row : rows) {
        Rat lhs(0);
        bool complete = true;
        for (const auto& [col, c] : row.coeff) {
            auto it = values.find(col);
            if (it == values.end()) {
                complete = false;
                break;
            }
            lhs += c * it->second;
        }
        if (complete && lhs != row.rhs)
            throw std::runtime_error("extended fit: nonzero residual at " +
                                     row.label);
    }
    return fit;
}

// ---------------------------------------------------------------------------
// Base-table files (JSON lines)

/// One key-value entry per line:
///   {"sector":"open"|"ext","g":0|1,"ins":[[a,d],...],"k":int,"value":"p/q"}
/// Rejects malformed lines, conflicting duplicates, extended keys with two
/// twists -1, and nonzero values on gate-failing keys, all with the line
/// number.
inline CorrelatorTable load_base_table(const std::string& path, int r) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_base_table: cannot open " + path);
    CorrelatorTable table;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            CorrelatorKey key;
            const std::string sector = j.at("sector").get<std::string>();
            if (sector == "open")
                key.sector = Sector::open;
            else if (sector == "ext")
                key.sector = Sector::ext;
            else
                throw std::runtime_error("unknown sector '" + sector + "'");
            key.g = j.at("g").get<int>();
            for (const auto& pair : j.at("ins")) {
                if (!pair.is_array() || pair.size() != 2)
                    throw std::runtime_error("insertion must be a pair [a,d]");
                key.ins.emplace_back(pair[0].get<int>(), pair[1].get<int>());
            }
            key.k = j.at("k").get<int>();
            key.canonicalize();
            const Rat value = rat_from_string(j.at("value").get<std::string>());
            if (key.sector == Sector::ext) {
                int negatives = 0;
                for (const auto& [a, d] : key.ins)
                    if (a == -1) ++negatives;
                if (negatives >= 2)
                    throw std::runtime_error("more than one twist -1");
            }
            if (!dimension_gate(key, r) && !is_zero(value))
                throw std::runtime_error("nonzero value on a gate-failing key");
            table.insert(std::move(key), value, Provenance::base);
        } catch (const std::exception& e) {
            throw std::runtime_error("load_base_table: " + path + ":" +
                                     std::to_string(lineno) + ": " + e.what());
        }
    }
    return table;
}

inline void save_base_table(const CorrelatorTable& table,
                            const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_base_table: cannot open " + path);
    for (const auto& [key, entry] : table.entries()) {
        nlohmann::ordered_json j;
        j["sector"] = key.sector == Sector::open ? "open" : "ext";
        j["g"] = key.g;
        auto ins = nlohmann::ordered_json::array();
        for (const auto& [a, d] : key.ins) ins.push_back({a, d});
        j["ins"] = std::move(ins);
        j["k"] = key.k;
        j["value"] = rat_to_string(entry.first);
        out << j.dump() << "\n";
    }
}

}  // namespace rspin
