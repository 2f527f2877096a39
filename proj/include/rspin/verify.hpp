#pragma once

// Orchestrates the full property suite and emits a machine-readable report.
// Groups run in order: operator-algebra invariants, hierarchy invariants,
// potential structure, the universal recursions evaluated directly on
// extracted values, and the closure cross-check that the recursive
// evaluator reproduces every extracted correlator from primaries alone.
// Everything is exact rational arithmetic; a failing check always carries a
// concrete counterexample.  Reports from two runs are identical apart from
// the timing fields.

#include "rspin/correlators.hpp"
#include "rspin/hierarchy.hpp"
#include "rspin/potentials.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace rspin {

struct CheckRecord {
    std::string name;
    std::string parameters;
    bool pass = true;
    std::string counterexample;  // non-empty exactly when !pass
    long long millis = 0;
};

struct VerifyReport {
    std::vector<CheckRecord> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& c : checks) {
            nlohmann::ordered_json rec;
            rec["name"] = c.name;
            rec["parameters"] = c.parameters;
            rec["status"] = c.pass ? "pass" : "fail";
            rec["counterexample"] = c.counterexample;
            rec["millis"] = c.millis;
            arr.push_back(std::move(rec));
        }
        return arr;
    }
};

/// Deliberate corruptions for exercising the suite's failure paths.
enum class Fault { none, flow };

inline Fault fault_from_string(const std::string& s) {
    if (s.empty() || s == "none") return Fault::none;
    if (s == "flow") return Fault::flow;
    throw std::invalid_argument("unknown fault kind: " + s);
}

struct VerifyOptions {
    std::vector<int> rs{2, 3};
    long weight = 0;      // per-key bound; 0 = per-r default
    long fit_weight = 0;  // potential/fit depth; 0 = weight + r
    Fault fault = Fault::none;
    int threads = 1;
};

/// Default per-key weight bound: deep enough to be interesting, small
/// enough that the whole suite finishes in minutes.
inline long default_weight(int r) {
    if (r == 2) return 10;
    if (r == 3) return 9;
    return 8;
}

/// Default recursion-instance bound for the extended fit.  The linear
/// system needs instances a few weight levels above the keys it serves to
/// disentangle the three-point extended unknowns; 12 is the empirical
/// threshold at which every r in {2,3,4} pins everything the desk-scale
/// suites consume.
inline long default_fit_weight(int r, long W) {
    return std::max(W + r, 12L);
}

namespace detail {

using Clock = std::chrono::steady_clock;
using Cex = std::optional<std::string>;

template <class Fn>
void run_check(VerifyReport& report, std::string name, std::string params,
               Fn&& fn) {
    CheckRecord rec;
    rec.name = std::move(name);
    rec.parameters = std::move(params);
    const auto t0 = Clock::now();
    try {
        Cex cex = fn();
        rec.pass = !cex.has_value();
        if (cex) rec.counterexample = std::move(*cex);
    } catch (const std::exception& e) {
        rec.pass = false;
        rec.counterexample = std::string("exception: ") + e.what();
    }
    rec.millis = std::chrono::duration_cast<std::chrono::milliseconds>(
                     Clock::now() - t0)
                     .count();
    report.checks.push_back(std::move(rec));
}

/// Name of the first reduction step eval() would take on the key, for
/// mismatch diagnostics.
inline std::string first_step(const CorrelatorKey& key, int r) {
    if (!dimension_gate(key, r)) return "gate";
    if (key.sector == Sector::ext) {
        if (ext_known_zero(key, r)) return "known-zero";
        return key.sum_d() == 0 ? "base" : "extended-node";
    }
    const auto has = [&](int a, int d) {
        return std::binary_search(key.ins.begin(), key.ins.end(),
                                  std::pair{a, d});
    };
    const long stable = 2 * static_cast<long>(key.g) - 2 + key.k +
                        2 * (static_cast<long>(key.l()) - 1);
    if (key.g == 1) return key.sum_d() == 0 ? "psi-free" : "genus-one-node";
    if (has(0, 0) && stable > 0) return "string";
    if (has(0, 1) && stable > 0) return "dilaton";
    if (key.sum_d() > 0)
        return key.k >= 1 ? "boundary-node" : "interior-node";
    return "base";
}

/// Pseudo-random monic operators and triples for the algebra checks; the
/// fixed seed keeps the report deterministic.
struct AlgebraRng {
    std::mt19937 rng{987654321u};
    std::uniform_int_distribution<int> coeff{-3, 3};
    std::uniform_int_distribution<int> xdeg{0, 2};
    std::uniform_int_distribution<int> lam{-2, 1};

    SeriesL series(const VarSystem& sys, long W) {
        SeriesL f(sys, W);
        f += SeriesL::constant(sys, W, LRat::monomial(lam(rng), Rat(coeff(rng))));
        SeriesL x = SeriesL::variable(sys, W, 1, LRat::constant(Rat(1)));
        SeriesL xp = SeriesL::constant(sys, W, LRat::constant(Rat(1)));
        const int deg = xdeg(rng);
        for (int i = 0; i < deg; ++i) xp = xp * x;
        f += xp.scaled_by(LRat::constant(Rat(coeff(rng))));
        f += SeriesL::variable(sys, W, 2, LRat::monomial(lam(rng), Rat(coeff(rng))));
        return f;
    }

    PsiDO monic(const VarSystem& sys, long W, int e_min, int order) {
        PsiDO a(sys, W, e_min);
        a.set_coefficient(order,
                          SeriesL::constant(sys, W, LRat::constant(Rat(1))));
        for (int e = -2; e < order; ++e) a.set_coefficient(e, series(sys, W));
        return a;
    }

    PsiDO generic(const VarSystem& sys, long W, int e_min) {
        PsiDO a(sys, W, e_min);
        for (int e = -2; e <= 2; ++e) a.set_coefficient(e, series(sys, W));
        return a;
    }
};

/// Coefficient-wise equality of two operators for all orders >= floor.
inline bool agree_above(const PsiDO& a, const PsiDO& b, int floor, long W) {
    const int top = std::max(a.max_order(), b.max_order());
    for (int e = floor; e <= top; ++e)
        if (!(a.coefficient(e).truncated(W) == b.coefficient(e).truncated(W)))
            return false;
    return true;
}

// ---------------------------------------------------------------------------
// check groups; each appends records to the report

inline void algebra_checks(VerifyReport& rep, const GDSolution& sol,
                           int roots, int triples) {
    const int r = sol.r;
    std::ostringstream base;
    base << "r=" << r << " W=" << sol.W;

    run_check(rep, "psido/root-power-identity", base.str() + " target=solved",
              [&]() -> Cex {
                  PsiDO pw = sol.root.power(r, sol.W);
                  if (!agree_above(pw, sol.L, sol.e_min + r - 1, sol.W))
                      return "root^r differs from the solved operator";
                  return std::nullopt;
              });

    const long Wr = 6;
    const int e_min = -12;
    run_check(rep, "psido/root-power-identity",
              base.str() + " targets=random#" + std::to_string(roots),
              [&]() -> Cex {
                  AlgebraRng rng;
                  for (int t = 0; t < roots; ++t) {
                      PsiDO a = rng.monic(sol.jets, Wr, e_min, r);
                      PsiDO b = rth_root(a, r, Wr);
                      if (!agree_above(b.power(r, Wr), a, e_min + r - 1, Wr))
                          return "random monic operator #" + std::to_string(t);
                  }
                  return std::nullopt;
              });

    run_check(rep, "psido/compose-associativity",
              base.str() + " triples=" + std::to_string(triples),
              [&]() -> Cex {
                  AlgebraRng rng;
                  for (int t = 0; t < triples; ++t) {
                      PsiDO a = rng.generic(sol.jets, Wr, e_min);
                      PsiDO b = rng.generic(sol.jets, Wr, e_min);
                      PsiDO c = rng.generic(sol.jets, Wr, e_min);
                      PsiDO lhs = compose(compose(a, b, Wr), c, Wr);
                      PsiDO rhs = compose(a, compose(b, c, Wr), Wr);
                      if (!agree_above(lhs, rhs, e_min + 4, Wr))
                          return "triple #" + std::to_string(t);
                  }
                  return std::nullopt;
              });

    run_check(rep, "psido/root-window-stability",
              base.str() + " floor-delta=5", [&]() -> Cex {
                  PsiDO deep(sol.jets, sol.W, sol.e_min - 5);
                  for (const auto& [e, c] : sol.L.coefficients())
                      deep.set_coefficient(e, c);
                  PsiDO droot = rth_root(deep, r, sol.W);
                  for (int e = sol.e_min + r - 1; e <= droot.max_order(); ++e)
                      if (!(droot.coefficient(e) == sol.root.coefficient(e)))
                          return "Dx^" + std::to_string(e) +
                                 " coefficient moved with the window floor";
                  return std::nullopt;
              });
}

inline void hierarchy_checks(VerifyReport& rep, const GDSolution& sol,
                             Fault fault) {
    const int r = sol.r;
    const long W = sol.W;
    std::ostringstream base;
    base << "r=" << r << " W=" << W;
    const std::string fault_tag =
        fault == Fault::flow ? " fault=flow(Dx^0 += T_2)" : "";

    const GDSolution* flows = &sol;
    GDSolution faulty = sol;
    if (fault == Fault::flow) {
        faulty.L.add_to_coefficient(
            0, SeriesL::variable(sol.jets, W, 2, LRat::constant(Rat(1))));
        flows = &faulty;
    }

    run_check(rep, "hierarchy/t1-lax-flow", base.str() + fault_tag,
              [&]() -> Cex {
                  if (!check_lax_flow(*flows, 1)) return std::string("T_1");
                  return std::nullopt;
              });
    run_check(rep, "hierarchy/t1-wave-flow", base.str() + fault_tag,
              [&]() -> Cex {
                  if (!check_wave_flow(*flows, 1)) return std::string("T_1");
                  return std::nullopt;
              });
    run_check(rep, "hierarchy/lax-flow", base.str() + " n=2.." +
                                             std::to_string(W) + fault_tag,
              [&]() -> Cex {
                  for (int n = 2; n <= W; ++n)
                      if (!check_lax_flow(*flows, n))
                          return "T_" + std::to_string(n) + " flow";
                  return std::nullopt;
              });
    run_check(rep, "hierarchy/wave-flow", base.str() + " n=2.." +
                                              std::to_string(W) + fault_tag,
              [&]() -> Cex {
                  for (int n = 2; n <= W; ++n)
                      if (!check_wave_flow(*flows, n))
                          return "T_" + std::to_string(n) + " flow";
                  return std::nullopt;
              });
    run_check(rep, "hierarchy/commutator-support", base.str(), [&]() -> Cex {
        for (int n = 1; n <= W; ++n) {
            if (n % r == 0) continue;
            const long cap = W - sol.jets.weight(n);
            PsiDO g = commutator(sol.power_plus(n), sol.L, cap);
            for (const auto& [e, c] : g.coefficients())
                if ((e < 0 || e > r - 2) && !c.truncated(cap).empty())
                    return "T_" + std::to_string(n) + " commutator at Dx^" +
                           std::to_string(e);
        }
        return std::nullopt;
    });
    run_check(rep, "hierarchy/integer-power-residues", base.str(),
              [&]() -> Cex {
                  for (int n = r; n <= W; n += r)
                      if (!sol.power_residue(n).empty())
                          return "res of power " + std::to_string(n) + "/" +
                                 std::to_string(r);
                  return std::nullopt;
              });
    run_check(rep, "hierarchy/two-point-symmetry", base.str(), [&]() -> Cex {
        for (int n = 1; n <= W; ++n) {
            if (n % r == 0) continue;
            for (int m = n + 1; m <= W; ++m) {
                if (m % r == 0) continue;
                if (!check_two_point_symmetry(sol, m, n))
                    return "(m,n)=(" + std::to_string(m) + "," +
                           std::to_string(n) + ")";
            }
        }
        return std::nullopt;
    });
}

inline void potential_checks(VerifyReport& rep, const OpenPotential& F0,
                             const OpenPotential& F1, long W) {
    const int r = F0.r;
    std::ostringstream base;
    base << "r=" << r << " W=" << W;

    run_check(rep, "potential/rationality", base.str(), [&]() -> Cex {
        if (!potential_is_rational(F0)) return std::string("genus 0");
        if (!potential_is_rational(F1)) return std::string("genus 1");
        return std::nullopt;
    });
    run_check(rep, "potential/selection-rules", base.str(), [&]() -> Cex {
        for (int g = 0; g <= 1; ++g) {
            const auto& F = g == 0 ? F0 : F1;
            for (const auto& key : all_open_keys(r, g, W, false)) {
                if (dimension_gate(key, r)) continue;
                Rat v = extract_open(F, key.ins, key.k);
                if (!is_zero(v))
                    return key.str() + " = " + rat_to_string(v) +
                           " outside the dimension gate";
            }
        }
        return std::nullopt;
    });
    run_check(rep, "potential/psi-free-genus1", base.str(), [&]() -> Cex {
        for (const auto& key : all_open_keys(r, 1, W, false)) {
            if (key.sum_d() != 0) continue;
            Rat v = extract_open(F1, key.ins, key.k);
            if (!is_zero(v))
                return key.str() + " = " + rat_to_string(v);
        }
        return std::nullopt;
    });
}

inline void recursion_checks(VerifyReport& rep, const OpenPotential& F0,
                             const OpenPotential& F1, long W, long fitW,
                             Evaluator& ev_first, Evaluator& ev_last,
                             const ExtendedFit& fit) {
    const int r = F0.r;
    std::ostringstream base;
    base << "r=" << r << " W=" << W;

    run_check(rep, "recursion/extended-fit-consistency",
              base.str() + " fit-weight=" + std::to_string(fitW) +
                  " equations=" + std::to_string(fit.equations) +
                  " unknowns=" + std::to_string(fit.unknowns) +
                  " underdetermined=" +
                  std::to_string(fit.underdetermined.size()),
              [&]() -> Cex {
                  // the fit throws on any inconsistent equation; reaching
                  // here means the overdetermined solve closed exactly
                  return std::nullopt;
              });

    const auto openA0 = [&](const CorrelatorKey& k) {
        return extract_open(F0, k.ins, k.k);
    };
    const auto openA1 = [&](const CorrelatorKey& k) {
        return extract_open(F1, k.ins, k.k);
    };
    const auto extB = [&](const CorrelatorKey& k) { return ev_first.eval(k); };

    const auto cand0 = all_open_keys(r, 0, W, true);
    const auto cand1 = all_open_keys(r, 1, W, true);

    run_check(rep, "recursion/boundary-node", base.str(), [&]() -> Cex {
        for (const auto& key : cand0) {
            if (key.k < 1 || key.sum_d() == 0) continue;
            const Rat lhs = openA0(key);
            for (const auto& [t1, cnt] : detail::grouped(key.ins)) {
                if (t1.second < 1) continue;
                const Rat rhs = detail::boundary_node_rhs(
                    r, t1.first, t1.second - 1,
                    detail::minus_one(key.ins, t1), key.k, openA0, extB);
                if (lhs != rhs)
                    return key.str() + " via " + std::to_string(t1.first) +
                           ":" + std::to_string(t1.second) + " lhs=" +
                           rat_to_string(lhs) + " rhs=" + rat_to_string(rhs);
            }
        }
        return std::nullopt;
    });

    run_check(rep, "recursion/interior-node", base.str(), [&]() -> Cex {
        for (const auto& key : cand0) {
            if (key.l() < 2 || key.sum_d() == 0) continue;
            const Rat lhs = openA0(key);
            for (const auto& [t1, cnt] : detail::grouped(key.ins)) {
                if (t1.second < 1) continue;
                const auto rest = detail::minus_one(key.ins, t1);
                for (const auto& [t2, cnt2] : detail::grouped(rest)) {
                    const Rat rhs = detail::interior_node_rhs(
                        r, t1.first, t1.second - 1, t2,
                        detail::minus_one(rest, t2), key.k, openA0, extB);
                    if (lhs != rhs)
                        return key.str() + " via " +
                               std::to_string(t1.first) + ":" +
                               std::to_string(t1.second) + "," +
                               std::to_string(t2.first) + ":" +
                               std::to_string(t2.second) + " lhs=" +
                               rat_to_string(lhs) + " rhs=" +
                               rat_to_string(rhs);
                }
            }
        }
        return std::nullopt;
    });

    run_check(rep, "recursion/genus-one", base.str(), [&]() -> Cex {
        for (const auto& key : cand1) {
            if (key.sum_d() == 0) continue;
            const Rat lhs = openA1(key);
            for (const auto& [t1, cnt] : detail::grouped(key.ins)) {
                if (t1.second < 1) continue;
                const Rat rhs = detail::genus_one_rhs(
                    r, t1.first, t1.second - 1,
                    detail::minus_one(key.ins, t1), key.k, openA0, openA1,
                    extB);
                if (lhs != rhs)
                    return key.str() + " via " + std::to_string(t1.first) +
                           ":" + std::to_string(t1.second) + " lhs=" +
                           rat_to_string(lhs) + " rhs=" + rat_to_string(rhs);
            }
        }
        return std::nullopt;
    });

    run_check(rep, "recursion/string",
              base.str() + " lhs-weight<=" + std::to_string(W - 1),
              [&]() -> Cex {
                  for (int g = 0; g <= 1; ++g) {
                      const auto& open = g == 0 ? F0 : F1;
                      for (const auto& key : all_open_keys(r, g, W - 1, true)) {
                          const auto& ins = key.ins;
                          if (!std::binary_search(ins.begin(), ins.end(),
                                                  std::pair{0, 0}))
                              continue;
                          const long rest_l = key.l() - 1;
                          if (2 * static_cast<long>(g) - 2 + key.k +
                                  2 * rest_l <=
                              0)
                              continue;
                          const auto rest =
                              detail::minus_one(ins, std::pair{0, 0});
                          Rat rhs(0);
                          for (const auto& [t, cnt] : detail::grouped(rest)) {
                              if (t.second == 0) continue;
                              auto shifted = detail::minus_one(rest, t);
                              shifted.emplace_back(t.first, t.second - 1);
                              CorrelatorKey rk = open_key(g, shifted, key.k);
                              rhs += Rat(cnt) *
                                     extract_open(open, rk.ins, rk.k);
                          }
                          const Rat lhs = extract_open(open, ins, key.k);
                          if (lhs != rhs)
                              return key.str() + " lhs=" + rat_to_string(lhs) +
                                     " rhs=" + rat_to_string(rhs);
                      }
                  }
                  return std::nullopt;
              });

    run_check(rep, "recursion/dilaton",
              base.str() + " lhs-weight<=" + std::to_string(W - 2),
              [&]() -> Cex {
                  for (int g = 0; g <= 1; ++g) {
                      const auto& open = g == 0 ? F0 : F1;
                      for (const auto& key : all_open_keys(r, g, W - 2, true)) {
                          const auto& ins = key.ins;
                          if (!std::binary_search(ins.begin(), ins.end(),
                                                  std::pair{0, 1}))
                              continue;
                          const long rest_l = key.l() - 1;
                          if (2 * static_cast<long>(g) - 2 + key.k +
                                  2 * rest_l <=
                              0)
                              continue;
                          const auto rest =
                              detail::minus_one(ins, std::pair{0, 1});
                          const Rat rhs =
                              Rat(g + rest_l + key.k - 1) *
                              extract_open(open, rest, key.k);
                          const Rat lhs = extract_open(open, ins, key.k);
                          if (lhs != rhs)
                              return key.str() + " lhs=" + rat_to_string(lhs) +
                                     " rhs=" + rat_to_string(rhs);
                      }
                  }
                  return std::nullopt;
              });

    run_check(rep, "recursion/choice-independence", base.str(), [&]() -> Cex {
        for (const auto* cand : {&cand0, &cand1})
            for (const auto& key : *cand) {
                const Rat a = ev_first.eval(key);
                const Rat b = ev_last.eval(key);
                if (a != b)
                    return key.str() + " first=" + rat_to_string(a) +
                           " last=" + rat_to_string(b);
            }
        return std::nullopt;
    });
}

inline void cross_checks(VerifyReport& rep, const OpenPotential& F0,
                         const OpenPotential& F1, long W, Evaluator& ev,
                         const CorrelatorTable& base_table, int threads) {
    const int r = F0.r;
    std::ostringstream base;
    base << "r=" << r << " W=" << W << " threads=" << threads;

    auto cand = all_open_keys(r, 0, W, true);
    {
        auto cand1 = all_open_keys(r, 1, W, true);
        cand.insert(cand.end(), cand1.begin(), cand1.end());
    }

    run_check(rep, "cross-check/closure", base.str(), [&]() -> Cex {
        std::vector<Rat> values(cand.size());
        if (threads <= 1) {
            for (std::size_t i = 0; i < cand.size(); ++i)
                values[i] = ev.eval(cand[i]);
        } else {
            std::vector<std::thread> pool;
            std::vector<std::string> errors(static_cast<std::size_t>(threads));
            for (int t = 0; t < threads; ++t)
                pool.emplace_back([&, t]() {
                    try {
                        Evaluator local(r, base_table);
                        for (std::size_t i = static_cast<std::size_t>(t);
                             i < cand.size();
                             i += static_cast<std::size_t>(threads))
                            values[i] = local.eval(cand[i]);
                    } catch (const std::exception& e) {
                        errors[static_cast<std::size_t>(t)] = e.what();
                    }
                });
            for (auto& th : pool) th.join();
            for (const auto& e : errors)
                if (!e.empty()) throw std::runtime_error(e);
        }
        for (std::size_t i = 0; i < cand.size(); ++i) {
            const auto& key = cand[i];
            const auto& F = key.g == 0 ? F0 : F1;
            const Rat a = extract_open(F, key.ins, key.k);
            if (values[i] != a)
                return key.str() + " extracted=" + rat_to_string(a) +
                       " recursed=" + rat_to_string(values[i]) +
                       " first-step=" + first_step(key, r);
        }
        return std::nullopt;
    });

    run_check(rep, "cross-check/gate-zeroes", base.str(), [&]() -> Cex {
        for (int g = 0; g <= 1; ++g)
            for (const auto& key : all_open_keys(r, g, W, false)) {
                if (dimension_gate(key, r)) continue;
                const Rat b = ev.eval(key);
                if (!is_zero(b))
                    return key.str() + " recursed=" + rat_to_string(b);
            }
        return std::nullopt;
    });
}

}  // namespace detail

/// The closure cross-check alone (both genera): recursion from primaries
/// reproduces extraction for every candidate key of weight <= W.
inline std::vector<CheckRecord> cross_check(int r, long W, long fit_weight = 0,
                                            int threads = 1) {
    const long fitW = fit_weight > 0 ? fit_weight : default_fit_weight(r, W);
    if (fitW < W)
        throw std::invalid_argument("cross_check: fit weight below key weight");
    VerifyReport rep;
    auto sol = solve_gd(r, fitW);
    auto F0 = open_potential(sol, 0);
    auto F1 = open_potential(sol, 1);
    auto fit = fit_extended_primaries(F0, fitW);
    CorrelatorTable table;
    seed_primaries(table, F0, fitW);
    table.merge(fit.primaries);
    Evaluator ev(r, table);
    detail::cross_checks(rep, F0, F1, W, ev, table, threads);
    return rep.checks;
}

/// The full suite over every requested r.  Any check failure leaves its
/// record in the report; the caller maps all_pass() onto the exit status.
inline VerifyReport run_suite(const VerifyOptions& opts) {
    VerifyReport rep;
    for (int r : opts.rs) {
        const long W = opts.weight > 0 ? opts.weight : default_weight(r);
        const long fitW =
            opts.fit_weight > 0 ? opts.fit_weight : default_fit_weight(r, W);
        if (fitW < W)
            throw std::invalid_argument(
                "run_suite: fit weight below key weight");
        auto sol = solve_gd(r, fitW);

        detail::algebra_checks(rep, sol, 20, 50);
        detail::hierarchy_checks(rep, sol, opts.fault);

        auto F0 = open_potential(sol, 0);
        auto F1 = open_potential(sol, 1);
        detail::potential_checks(rep, F0, F1, W);

        std::optional<ExtendedFit> fit;
        try {
            fit = fit_extended_primaries(F0, fitW);
        } catch (const std::exception& e) {
            CheckRecord rec;
            rec.name = "recursion/extended-fit-consistency";
            rec.parameters =
                "r=" + std::to_string(r) + " fit-weight=" + std::to_string(fitW);
            rec.pass = false;
            rec.counterexample = std::string("exception: ") + e.what();
            rep.checks.push_back(std::move(rec));
        }
        if (fit) {
            CorrelatorTable table;
            seed_primaries(table, F0, fitW);
            table.merge(fit->primaries);
            Evaluator ev_first(r, table, ChoicePolicy::first_descendent);
            Evaluator ev_last(r, table, ChoicePolicy::last_descendent);
            detail::recursion_checks(rep, F0, F1, W, fitW, ev_first, ev_last,
                                     *fit);
            detail::cross_checks(rep, F0, F1, W, ev_first, table,
                                 opts.threads);
        }
    }
    return rep;
}

}  // namespace rspin
