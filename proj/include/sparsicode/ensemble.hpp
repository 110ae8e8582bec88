// sparsicode/ensemble.hpp
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparsicode/common.hpp"
#include "sparsicode/csp.hpp"
#include "sparsicode/rational_lp.hpp"

namespace sparsicode {

namespace detail {

inline bool is_prime(int p) {
    if (p < 2) return false;
    for (int q = 2; q * q <= p; ++q)
        if (p % q == 0) return false;
    return true;
}

} // namespace detail

// Vector family with tagged zero-sum triples: each edge is an ordered index
// triple whose vectors sum to zero, and carries a linear functional that
// vanishes on all three vectors of its own edge and of no other edge.
struct Ensemble {
    int p = 3;
    std::size_t dim = 0;
    std::vector<std::vector<int>> vectors;
    std::vector<std::array<std::size_t, 3>> edges;
    std::vector<std::vector<int>> functionals;   // one coefficient vector per edge

    void validate() const {
        if (!detail::is_prime(p)) throw input_error("Ensemble: p must be prime");
        for (const auto& v : vectors) {
            if (v.size() != dim) throw input_error("Ensemble: vector dimension mismatch");
            for (int x : v)
                if (x < 0 || x >= p) throw input_error("Ensemble: vector entry out of range");
        }
        for (const auto& e : edges)
            for (std::size_t idx : e)
                if (idx >= vectors.size()) throw input_error("Ensemble: edge index out of range");
        if (functionals.size() != edges.size())
            throw input_error("Ensemble: need one functional per edge");
        for (const auto& f : functionals) {
            if (f.size() != dim) throw input_error("Ensemble: functional dimension mismatch");
            for (int x : f)
                if (x < 0 || x >= p) throw input_error("Ensemble: functional entry out of range");
        }
    }

    int apply(const std::vector<int>& functional, std::size_t vec) const {
        long long acc = 0;
        for (std::size_t i = 0; i < dim; ++i)
            acc += static_cast<long long>(functional[i]) * vectors[vec][i];
        return static_cast<int>(acc % p);
    }
};

struct EnsembleCheck {
    bool ok = true;
    std::string violation;   // first violation, empty when ok
};

inline EnsembleCheck verify_ensemble(const Ensemble& E) {
    E.validate();
    EnsembleCheck out;
    for (std::size_t e = 0; e < E.edges.size(); ++e) {
        for (std::size_t i = 0; i < E.dim; ++i) {
            long long s = 0;
            for (std::size_t idx : E.edges[e]) s += E.vectors[idx][i];
            if (s % E.p != 0) {
                out.ok = false;
                out.violation = "edge " + std::to_string(e) + ": vectors do not sum to zero";
                return out;
            }
        }
    }
    for (std::size_t e = 0; e < E.edges.size(); ++e) {
        for (std::size_t e2 = 0; e2 < E.edges.size(); ++e2) {
            bool kills_all = true;
            for (std::size_t idx : E.edges[e2])
                if (E.apply(E.functionals[e], idx) != 0) { kills_all = false; break; }
            if (e2 == e && !kills_all) {
                out.ok = false;
                out.violation = "functional " + std::to_string(e) + ": does not vanish on its own edge";
                return out;
            }
            if (e2 != e && kills_all) {
                out.ok = false;
                out.violation = "functional " + std::to_string(e) + ": vanishes on all vectors of edge " +
                                std::to_string(e2);
                return out;
            }
        }
    }
    return out;
}

// Three-block construction over F_p^(3t+2): blocks of t coordinates for each
// of the three index positions plus two shared coordinates, with multipliers
// g1 = g2 = 1 and g3 = p-2 (so g1 + g2 + g3 = 0 mod p). Produces 3t^2
// vectors and t^3 edges.
inline Ensemble construct_3lin(int p, int t) {
    if (p < 3) throw input_error("construct_3lin: need p >= 3");
    if (!detail::is_prime(p)) throw input_error("construct_3lin: p must be prime");
    if (t < 1) throw input_error("construct_3lin: t must be positive");
    const std::size_t tu = static_cast<std::size_t>(t);
    if (tu * tu * tu > (std::size_t{1} << 20)) throw budget_error("construct_3lin: t too large");

    Ensemble E;
    E.p = p;
    E.dim = 3 * tu + 2;
    const int g1 = 1, g2 = 1, g3 = p - 2;
    const auto neg = [p](int x) { return ((-x) % p + p) % p; };

    const std::size_t s1 = 0, s2 = tu, s3 = 2 * tu, sa = 3 * tu, sb = 3 * tu + 1;
    E.vectors.assign(3 * tu * tu, std::vector<int>(E.dim, 0));
    auto u_idx = [&](std::size_t i1, std::size_t i2) { return i1 * tu + i2; };
    auto v_idx = [&](std::size_t i2, std::size_t i3) { return tu * tu + i2 * tu + i3; };
    auto w_idx = [&](std::size_t i1, std::size_t i3) { return 2 * tu * tu + i1 * tu + i3; };

    for (std::size_t i1 = 0; i1 < tu; ++i1)
        for (std::size_t i2 = 0; i2 < tu; ++i2) {
            auto& u = E.vectors[u_idx(i1, i2)];
            u[s1 + i1] = g1;
            u[s2 + i2] = g2;
            u[sa] = g3;
        }
    for (std::size_t i2 = 0; i2 < tu; ++i2)
        for (std::size_t i3 = 0; i3 < tu; ++i3) {
            auto& v = E.vectors[v_idx(i2, i3)];
            v[s2 + i2] = neg(g2);
            v[s3 + i3] = neg(g3);
            v[sb] = neg(g1);
        }
    for (std::size_t i1 = 0; i1 < tu; ++i1)
        for (std::size_t i3 = 0; i3 < tu; ++i3) {
            auto& w = E.vectors[w_idx(i1, i3)];
            w[s1 + i1] = neg(g1);
            w[s3 + i3] = g3;
            w[sa] = neg(g3);
            w[sb] = g1;
        }

    for (std::size_t i1 = 0; i1 < tu; ++i1)
        for (std::size_t i2 = 0; i2 < tu; ++i2)
            for (std::size_t i3 = 0; i3 < tu; ++i3) {
                E.edges.push_back({u_idx(i1, i2), v_idx(i2, i3), w_idx(i1, i3)});
                std::vector<int> phi(E.dim, 0);
                phi[s1 + i1] = 1;
                phi[s2 + i2] = 1;
                phi[s3 + i3] = 1;
                phi[sa] = 1;
                phi[sb] = 1;
                E.functionals.push_back(std::move(phi));
            }

    auto check = verify_ensemble(E);
    if (!check.ok) throw verify_error("construct_3lin: " + check.violation);
    return E;
}

struct EnsembleInstance {
    CspInstance instance;                 // over the punctured 3-variable linear predicate
    std::vector<Assignment> assignments;  // per clause: sigma_e(x) = phi_e(v_x)
};

// Variables = vectors, clauses = edges; the per-clause assignments read off
// the functionals certify conditional non-redundancy without enumeration.
inline EnsembleInstance ensemble_to_instance(const Ensemble& E) {
    auto check = verify_ensemble(E);
    if (!check.ok) throw input_error("ensemble_to_instance: invalid ensemble: " + check.violation);
    EnsembleInstance out;
    out.instance.n = E.vectors.size();
    for (const auto& e : E.edges)
        out.instance.clauses.push_back({e[0], e[1], e[2]});
    for (std::size_t e = 0; e < E.edges.size(); ++e) {
        Assignment sigma(E.vectors.size(), 0);
        for (std::size_t x = 0; x < E.vectors.size(); ++x)
            sigma[x] = E.apply(E.functionals[e], x);
        out.assignments.push_back(std::move(sigma));
    }
    return out;
}

// Inverse direction: the kernel of the clause equations gives one vector per
// variable (its column in a reduced kernel basis), edges are the clauses,
// and each witness assignment, expressed in the basis, is the functional.
inline Ensemble instance_to_ensemble(const CspInstance& inst, int p,
                                     const std::vector<Assignment>& witnesses) {
    if (!detail::is_prime(p)) throw input_error("instance_to_ensemble: p must be prime");
    const Predicate P = make_lin3(p, true);
    const Predicate Q = make_lin3(p, false);
    inst.validate(P);
    if (!check_conditional_witnesses(P, Q, inst, witnesses))
        throw input_error("instance_to_ensemble: witnesses fail certification");

    std::vector<std::vector<int>> rows;
    rows.reserve(inst.clauses.size());
    for (const auto& y : inst.clauses) {
        std::vector<int> row(inst.n, 0);
        for (std::size_t v : y) row[v] = (row[v] + 1) % p;
        rows.push_back(std::move(row));
    }
    auto kb = detail::kernel_basis_mod_p(std::move(rows), inst.n, p);

    Ensemble E;
    E.p = p;
    E.dim = kb.basis.size();
    E.vectors.assign(inst.n, std::vector<int>(E.dim, 0));
    for (std::size_t b = 0; b < kb.basis.size(); ++b)
        for (std::size_t x = 0; x < inst.n; ++x)
            E.vectors[x][b] = kb.basis[b][x];
    for (const auto& y : inst.clauses)
        E.edges.push_back({y[0], y[1], y[2]});
    for (const auto& sigma : witnesses) {
        std::vector<int> z(E.dim, 0);
        for (std::size_t b = 0; b < kb.basis.size(); ++b)
            z[b] = sigma[kb.free_cols[b]];
        E.functionals.push_back(std::move(z));
    }

    auto check = verify_ensemble(E);
    if (!check.ok) throw verify_error("instance_to_ensemble: " + check.violation);
    return E;
}

// Binomial bound C(dim + 2p - 2, 2p - 2) on the number of edges inside a
// subspace of the given dimension.
inline BigInt polynomial_bound(std::size_t dim, int p) {
    if (p < 2) throw input_error("polynomial_bound: p must be at least 2");
    const std::size_t k = 2 * static_cast<std::size_t>(p) - 2;
    BigInt num = 1, den = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        num *= BigInt(dim + i);
        den *= BigInt(i);
    }
    return num / den;
}

inline std::size_t span_dimension(const std::vector<std::vector<int>>& vectors, std::size_t dim,
                                  int p) {
    if (!detail::is_prime(p)) throw input_error("span_dimension: p must be prime");
    for (const auto& v : vectors)
        if (v.size() != dim) throw input_error("span_dimension: vector dimension mismatch");
    return detail::rank_mod_p(vectors, dim, p);
}

struct TripleCountCheck {
    std::uint64_t ordered_count = 0;   // unordered distinct-position triples, times 6
    double bound = 0.0;                // 6 |V| log2 |V|
    bool holds = true;
};

// Counts zero-sum triples of distinct list positions meeting the independent
// set I, in the ordered convention.
inline TripleCountCheck triple_count_check(const std::vector<std::vector<int>>& vectors,
                                           std::size_t dim, int p, const IndexSet& I) {
    if (!detail::is_prime(p)) throw input_error("triple_count_check: p must be prime");
    const std::size_t n = vectors.size();
    for (const auto& v : vectors)
        if (v.size() != dim) throw input_error("triple_count_check: vector dimension mismatch");
    I.check_bounds(n == 0 ? 1 : n);
    if (n * n * n > (std::size_t{1} << 27))
        throw budget_error("triple_count_check: too many triples to enumerate");

    std::vector<std::vector<int>> selected;
    for (std::size_t i : I) selected.push_back(vectors[i]);
    if (detail::rank_mod_p(selected, dim, p) != I.size())
        throw input_error("triple_count_check: I is linearly dependent");

    TripleCountCheck out;
    std::uint64_t unordered = 0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            for (std::size_t c = b + 1; c < n; ++c) {
                if (!(I.contains(a) || I.contains(b) || I.contains(c))) continue;
                bool zero = true;
                for (std::size_t i = 0; i < dim && zero; ++i)
                    if ((vectors[a][i] + vectors[b][i] + vectors[c][i]) % p != 0) zero = false;
                if (zero) ++unordered;
            }
    out.ordered_count = 6 * unordered;
    out.bound = n <= 1 ? 0.0
                       : 6.0 * static_cast<double>(n) * std::log2(static_cast<double>(n));
    out.holds = static_cast<double>(out.ordered_count) <= out.bound ||
                (out.ordered_count == 0);
    return out;
}

struct DegeneracyCheck {
    std::uint64_t min_degree = 0;
    double bound = 0.0;
    bool holds = true;
};

// Two-case degeneracy bound: either the polynomial bound over the span caps
// the edge count (so the average degree is small), or a basis has few
// incident edges (so some basis vector has small degree).
inline DegeneracyCheck check_degeneracy(const Ensemble& E) {
    E.validate();
    DegeneracyCheck out;
    const std::size_t n = E.vectors.size();
    if (n == 0 || E.edges.empty()) return out;

    std::vector<std::uint64_t> degree(n, 0);
    for (const auto& e : E.edges) {
        std::size_t a = e[0], b = e[1], c = e[2];
        degree[a] += 1;
        if (b != a) degree[b] += 1;
        if (c != a && c != b) degree[c] += 1;
    }
    out.min_degree = degree[0];
    for (std::uint64_t d : degree) out.min_degree = std::min(out.min_degree, d);

    const std::size_t rank = detail::rank_mod_p(E.vectors, E.dim, E.p);
    const double avg_bound =
        3.0 * static_cast<double>(polynomial_bound(rank, E.p)) / static_cast<double>(n);
    const double basis_bound =
        rank == 0 ? 0.0
                  : 6.0 * (static_cast<double>(n) / static_cast<double>(rank)) *
                        std::log2(static_cast<double>(n));
    out.bound = std::max(avg_bound, basis_bound);
    out.holds = static_cast<double>(out.min_degree) <= out.bound;
    return out;
}

} // namespace sparsicode
