// sparsicode/csp.hpp
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sparsicode/bitvec.hpp"
#include "sparsicode/code.hpp"
#include "sparsicode/common.hpp"

namespace sparsicode {

using Tuple = std::vector<int>;
using Assignment = std::vector<int>;

namespace detail {

inline std::uint64_t checked_pow(std::uint64_t base, std::size_t exp, std::uint64_t cap,
                                 const char* op) {
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (base != 0 && total > cap / base)
            throw budget_error(std::string(op) + ": enumeration space exceeds cap");
        total *= base;
    }
    if (total > cap) throw budget_error(std::string(op) + ": enumeration space exceeds cap");
    return total;
}

// Big-endian mixed radix: index order equals lexicographic tuple order.
inline std::uint64_t encode_tuple(const std::vector<int>& t, int domain) {
    std::uint64_t idx = 0;
    for (int v : t) idx = idx * static_cast<std::uint64_t>(domain) + static_cast<std::uint64_t>(v);
    return idx;
}

inline void decode_tuple(std::uint64_t idx, int domain, std::size_t len, std::vector<int>& out) {
    out.assign(len, 0);
    for (std::size_t k = len; k-- > 0;) {
        out[k] = static_cast<int>(idx % static_cast<std::uint64_t>(domain));
        idx /= static_cast<std::uint64_t>(domain);
    }
}

} // namespace detail

// Relation over a finite domain: the set of satisfying tuples.
class Predicate {
public:
    Predicate(int domain_size, int arity, std::vector<Tuple> tuples)
        : d_(domain_size), r_(arity) {
        if (d_ < 1) throw input_error("Predicate: domain size must be positive");
        if (r_ < 1) throw input_error("Predicate: arity must be positive");
        for (const auto& t : tuples) {
            if (static_cast<int>(t.size()) != r_) throw input_error("Predicate: tuple arity mismatch");
            for (int v : t)
                if (v < 0 || v >= d_) throw input_error("Predicate: tuple value out of domain");
        }
        std::sort(tuples.begin(), tuples.end());
        tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
        tuples_ = std::move(tuples);
    }

    int domain_size() const { return d_; }
    int arity() const { return r_; }
    const std::vector<Tuple>& tuples() const { return tuples_; }
    std::size_t size() const { return tuples_.size(); }
    bool empty() const { return tuples_.empty(); }

    std::uint64_t tuple_space() const {
        return detail::checked_pow(static_cast<std::uint64_t>(d_), static_cast<std::size_t>(r_),
                                   std::uint64_t{1} << 30, "Predicate");
    }

    bool is_trivial() const { return tuples_.size() == tuple_space(); }

    bool contains(const Tuple& t) const {
        return std::binary_search(tuples_.begin(), tuples_.end(), t);
    }

    // Membership bitmap indexed by encode_tuple.
    std::vector<bool> sat_mask() const {
        std::vector<bool> mask(tuple_space(), false);
        for (const auto& t : tuples_) mask[detail::encode_tuple(t, d_)] = true;
        return mask;
    }

    Predicate complement() const {
        std::vector<Tuple> out;
        const std::uint64_t total = tuple_space();
        Tuple t;
        for (std::uint64_t idx = 0; idx < total; ++idx) {
            detail::decode_tuple(idx, d_, static_cast<std::size_t>(r_), t);
            if (!contains(t)) out.push_back(t);
        }
        return Predicate(d_, r_, std::move(out));
    }

    bool operator==(const Predicate& o) const {
        return d_ == o.d_ && r_ == o.r_ && tuples_ == o.tuples_;
    }

private:
    int d_;
    int r_;
    std::vector<Tuple> tuples_;
};

// Ordered clause list over n variables; repeated clauses and repeated
// variables within a clause are allowed.
struct CspInstance {
    std::size_t n = 0;
    std::vector<std::vector<std::size_t>> clauses;

    void validate(const Predicate& R) const {
        if (n == 0) throw input_error("CspInstance: need at least one variable");
        for (const auto& y : clauses) {
            if (y.size() != static_cast<std::size_t>(R.arity()))
                throw input_error("CspInstance: clause arity mismatch");
            for (std::size_t v : y)
                if (v >= n) throw input_error("CspInstance: variable out of range");
        }
    }
};

inline bool satisfies(const Predicate& R, const std::vector<std::size_t>& clause,
                      const Assignment& sigma) {
    Tuple t(clause.size());
    for (std::size_t k = 0; k < clause.size(); ++k) t[k] = sigma[clause[k]];
    return R.contains(t);
}

namespace detail {

constexpr std::uint64_t kAssignmentCap = std::uint64_t{1} << 24;
constexpr std::uint64_t kClauseUniverseCap = 4096;
constexpr std::uint64_t kCspMemoryBitsCap = std::uint64_t{1} << 28;

inline std::uint64_t assignment_space(const Predicate& R, std::size_t n, const char* op) {
    return checked_pow(static_cast<std::uint64_t>(R.domain_size()), n, kAssignmentCap, op);
}

// Satisfying-assignment set per clause over the full assignment universe.
inline std::vector<IdxSet> clause_sat_sets(const Predicate& R,
                                           const std::vector<std::vector<std::size_t>>& clauses,
                                           std::size_t n, std::uint64_t total, const char* op) {
    if (clauses.size() * total > kCspMemoryBitsCap)
        throw budget_error(std::string(op) + ": clause-by-assignment table exceeds memory cap");
    const std::vector<bool> mask = R.sat_mask();
    const int d = R.domain_size();
    std::vector<IdxSet> sat(clauses.size(), IdxSet(total));
    Assignment sigma;
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        decode_tuple(idx, d, n, sigma);
        for (std::size_t j = 0; j < clauses.size(); ++j) {
            std::uint64_t t = 0;
            for (std::size_t v : clauses[j])
                t = t * static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(sigma[v]);
            if (mask[t]) sat[j].set(idx);
        }
    }
    return sat;
}

// All clauses over n variables in lexicographic order.
inline std::vector<std::vector<std::size_t>> clause_universe(const Predicate& R, std::size_t n,
                                                             const char* op) {
    const std::uint64_t count = checked_pow(n, static_cast<std::size_t>(R.arity()),
                                            kClauseUniverseCap, op);
    std::vector<std::vector<std::size_t>> ys;
    ys.reserve(count);
    std::vector<std::size_t> y(static_cast<std::size_t>(R.arity()), 0);
    for (std::uint64_t idx = 0; idx < count; ++idx) {
        std::uint64_t rem = idx;
        for (std::size_t k = y.size(); k-- > 0;) {
            y[k] = static_cast<std::size_t>(rem % n);
            rem /= n;
        }
        ys.push_back(y);
    }
    return ys;
}

inline Assignment decode_assignment(std::uint64_t idx, const Predicate& R, std::size_t n) {
    Assignment sigma;
    decode_tuple(idx, R.domain_size(), n, sigma);
    return sigma;
}

} // namespace detail

// Code of clause-satisfaction patterns over all assignments.
inline BinaryCode satisfiability_code(const Predicate& R, const CspInstance& inst) {
    inst.validate(R);
    const std::size_t m = inst.clauses.size();
    if (m == 0) return BinaryCode(0, {BitVec(0)});
    const std::uint64_t total = detail::assignment_space(R, inst.n, "satisfiability_code");
    const std::vector<bool> mask = R.sat_mask();
    const int d = R.domain_size();
    std::set<BitVec> out;
    Assignment sigma;
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        detail::decode_tuple(idx, d, inst.n, sigma);
        BitVec c(m);
        for (std::size_t j = 0; j < m; ++j) {
            std::uint64_t t = 0;
            for (std::size_t v : inst.clauses[j])
                t = t * static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(sigma[v]);
            c.set(j, mask[t]);
        }
        out.insert(std::move(c));
    }
    return BinaryCode(m, std::vector<BitVec>(out.begin(), out.end()));
}

// Non-redundancy of a fixed instance: for each clause, an assignment that
// satisfies every other clause and violates this one.
inline std::optional<std::vector<Assignment>> csp_instance_witnesses(const Predicate& R,
                                                                     const CspInstance& inst) {
    inst.validate(R);
    const std::uint64_t total = detail::assignment_space(R, inst.n, "csp_instance_witnesses");
    auto sat = detail::clause_sat_sets(R, inst.clauses, inst.n, total, "csp_instance_witnesses");
    std::vector<Assignment> out;
    for (std::size_t j = 0; j < inst.clauses.size(); ++j) {
        IdxSet w = IdxSet::all(total);
        for (std::size_t j2 = 0; j2 < inst.clauses.size(); ++j2)
            if (j2 != j) w.and_with(sat[j2]);
        w.and_not_with(sat[j]);
        if (!w.any()) return std::nullopt;
        out.push_back(detail::decode_assignment(w.first(), R, inst.n));
    }
    return out;
}

struct CspNrdResult {
    std::size_t value = 0;
    CspInstance instance;
    std::vector<Assignment> witnesses;
};

// Largest non-redundant instance of CSP(R) on n variables, by exhaustive
// branch and bound over the clause universe.
inline CspNrdResult csp_nrd(const Predicate& R, std::size_t n,
                            const ExactSearchLimits& limits = {}) {
    if (n == 0) throw input_error("csp_nrd: need at least one variable");
    auto ys = detail::clause_universe(R, n, "csp_nrd");
    const std::uint64_t total = detail::assignment_space(R, n, "csp_nrd");
    auto sat = detail::clause_sat_sets(R, ys, n, total, "csp_nrd");

    // Violation sets drive the search: each chosen clause needs an
    // assignment violating it and satisfying the rest.
    std::vector<IdxSet> viol;
    viol.reserve(sat.size());
    for (const auto& s : sat) {
        IdxSet v = IdxSet::all(total);
        v.and_not_with(s);
        viol.push_back(std::move(v));
    }

    Budget budget(limits.node_budget);
    auto sel = detail::max_distinguished_set(viol, total, budget, "csp_nrd");

    CspNrdResult r;
    r.value = sel.chosen.size();
    r.instance.n = n;
    for (std::size_t idx : sel.chosen) r.instance.clauses.push_back(ys[idx]);
    for (std::size_t widx : sel.witness_idx)
        r.witnesses.push_back(detail::decode_assignment(widx, R, n));

    auto check = csp_instance_witnesses(R, r.instance);
    if (!check && !r.instance.clauses.empty())
        throw verify_error("csp_nrd: witness validation failed");
    return r;
}

struct CspChainResult {
    std::size_t value = 0;
    std::vector<std::vector<std::size_t>> clauses;   // in chain order
    std::vector<Assignment> witnesses;               // one per chain step
};

// Longest strictly increasing chain of satisfying-assignment sets over
// instances on n variables. Equals 1 plus the longest clause sequence where
// each step has an assignment satisfying all earlier clauses and violating
// the current one. A trivial predicate gives 1.
inline CspChainResult csp_chain_length(const Predicate& R, std::size_t n,
                                       const ExactSearchLimits& limits = {}) {
    if (n == 0) throw input_error("csp_chain_length: need at least one variable");
    auto ys = detail::clause_universe(R, n, "csp_chain_length");
    const std::uint64_t total = detail::assignment_space(R, n, "csp_chain_length");
    auto sat = detail::clause_sat_sets(R, ys, n, total, "csp_chain_length");
    std::vector<IdxSet> viol;
    viol.reserve(sat.size());
    for (const auto& s : sat) {
        IdxSet v = IdxSet::all(total);
        v.and_not_with(s);
        viol.push_back(std::move(v));
    }

    Budget budget(limits.node_budget);
    auto chain = detail::max_compatible_chain(viol, total, budget, "csp_chain_length");

    CspChainResult r;
    r.value = chain.elems.size() + 1;
    for (std::size_t t = 0; t < chain.elems.size(); ++t) {
        r.clauses.push_back(ys[chain.elems[t]]);
        r.witnesses.push_back(detail::decode_assignment(chain.witness_idx[t], R, n));
    }
    return r;
}

// Conditional non-redundancy: P subseteq Q, and each clause has an
// assignment landing in Q minus P on it while satisfying P on all others.
inline std::optional<std::vector<Assignment>> conditional_nonredundancy_witnesses(
        const Predicate& P, const Predicate& Q, const CspInstance& inst) {
    if (P.domain_size() != Q.domain_size() || P.arity() != Q.arity())
        throw input_error("conditional_nonredundancy_witnesses: P and Q shapes differ");
    for (const auto& t : P.tuples())
        if (!Q.contains(t))
            throw input_error("conditional_nonredundancy_witnesses: P must be contained in Q");
    inst.validate(P);
    const std::uint64_t total =
        detail::assignment_space(P, inst.n, "conditional_nonredundancy_witnesses");
    auto satP = detail::clause_sat_sets(P, inst.clauses, inst.n, total,
                                        "conditional_nonredundancy_witnesses");
    auto satQ = detail::clause_sat_sets(Q, inst.clauses, inst.n, total,
                                        "conditional_nonredundancy_witnesses");
    std::vector<Assignment> out;
    for (std::size_t j = 0; j < inst.clauses.size(); ++j) {
        IdxSet w = satQ[j];
        w.and_not_with(satP[j]);
        for (std::size_t j2 = 0; j2 < inst.clauses.size(); ++j2)
            if (j2 != j) w.and_with(satP[j2]);
        if (!w.any()) return std::nullopt;
        out.push_back(detail::decode_assignment(w.first(), P, inst.n));
    }
    return out;
}

// Witness-based certificate check for conditional non-redundancy: no
// assignment enumeration, just P/Q evaluations against the supplied
// assignments, so it scales to large variable counts.
inline bool check_conditional_witnesses(const Predicate& P, const Predicate& Q,
                                        const CspInstance& inst,
                                        const std::vector<Assignment>& ws) {
    if (P.domain_size() != Q.domain_size() || P.arity() != Q.arity())
        throw input_error("check_conditional_witnesses: P and Q shapes differ");
    inst.validate(P);
    if (ws.size() != inst.clauses.size())
        throw input_error("check_conditional_witnesses: need one witness per clause");
    for (const auto& sigma : ws) {
        if (sigma.size() != inst.n)
            throw input_error("check_conditional_witnesses: witness length mismatch");
        for (int v : sigma)
            if (v < 0 || v >= P.domain_size())
                throw input_error("check_conditional_witnesses: witness value out of domain");
    }
    for (std::size_t j = 0; j < inst.clauses.size(); ++j) {
        if (satisfies(P, inst.clauses[j], ws[j]) || !satisfies(Q, inst.clauses[j], ws[j]))
            return false;
        for (std::size_t j2 = 0; j2 < inst.clauses.size(); ++j2)
            if (j2 != j && !satisfies(P, inst.clauses[j2], ws[j])) return false;
    }
    return true;
}

// ---- gadget operations -----------------------------------------------------

// R = { (a_{pi[0]}, ..., a_{pi[s-1]}) : a in P }.
inline Predicate gadget_project(const Predicate& P, const std::vector<int>& pi) {
    if (pi.empty()) throw input_error("gadget_project: empty projection");
    for (int j : pi)
        if (j < 0 || j >= P.arity()) throw input_error("gadget_project: position out of range");
    std::vector<Tuple> out;
    for (const auto& t : P.tuples()) {
        Tuple s(pi.size());
        for (std::size_t k = 0; k < pi.size(); ++k) s[k] = t[static_cast<std::size_t>(pi[k])];
        out.push_back(std::move(s));
    }
    return Predicate(P.domain_size(), static_cast<int>(pi.size()), std::move(out));
}

// R = { a in E^r : (f_0(a_0), ..., f_{r-1}(a_{r-1})) in P }, where maps[k]
// tabulates f_k on the new domain E.
inline Predicate gadget_restrict(const Predicate& P, const std::vector<std::vector<int>>& maps,
                                 int new_domain) {
    if (new_domain < 1) throw input_error("gadget_restrict: new domain must be positive");
    if (static_cast<int>(maps.size()) != P.arity())
        throw input_error("gadget_restrict: need one map per position");
    for (const auto& f : maps) {
        if (static_cast<int>(f.size()) != new_domain)
            throw input_error("gadget_restrict: map must tabulate the whole new domain");
        for (int v : f)
            if (v < 0 || v >= P.domain_size())
                throw input_error("gadget_restrict: map value out of old domain");
    }
    const std::size_t r = static_cast<std::size_t>(P.arity());
    const std::uint64_t total = detail::checked_pow(static_cast<std::uint64_t>(new_domain), r,
                                                    std::uint64_t{1} << 30, "gadget_restrict");
    std::vector<Tuple> out;
    Tuple a, img(r);
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        detail::decode_tuple(idx, new_domain, r, a);
        for (std::size_t k = 0; k < r; ++k) img[k] = maps[k][static_cast<std::size_t>(a[k])];
        if (P.contains(img)) out.push_back(a);
    }
    return Predicate(new_domain, P.arity(), std::move(out));
}

inline Predicate gadget_conjoin(const Predicate& P, const Predicate& Q) {
    if (P.domain_size() != Q.domain_size() || P.arity() != Q.arity())
        throw input_error("gadget_conjoin: shapes differ");
    std::vector<Tuple> out;
    for (const auto& t : P.tuples())
        if (Q.contains(t)) out.push_back(t);
    return Predicate(P.domain_size(), P.arity(), std::move(out));
}

inline Predicate gadget_disjoin(const Predicate& P, const Predicate& Q) {
    if (P.domain_size() != Q.domain_size() || P.arity() != Q.arity())
        throw input_error("gadget_disjoin: shapes differ");
    std::vector<Tuple> out = P.tuples();
    out.insert(out.end(), Q.tuples().begin(), Q.tuples().end());
    return Predicate(P.domain_size(), P.arity(), std::move(out));
}

// Position-split copy: variable v used at clause position k becomes variable
// v*arity + k, so distinct positions never share a variable.
inline CspInstance split_positions(const CspInstance& inst, int arity) {
    if (arity < 1) throw input_error("split_positions: arity must be positive");
    CspInstance out;
    out.n = inst.n * static_cast<std::size_t>(arity);
    for (const auto& y : inst.clauses) {
        if (y.size() != static_cast<std::size_t>(arity))
            throw input_error("split_positions: clause arity mismatch");
        std::vector<std::size_t> y2(y.size());
        for (std::size_t k = 0; k < y.size(); ++k)
            y2[k] = y[k] * static_cast<std::size_t>(arity) + k;
        out.clauses.push_back(std::move(y2));
    }
    return out;
}

// ---- predicate catalog -----------------------------------------------------

inline Predicate make_or(int k) {
    if (k < 1) throw input_error("make_or: arity must be positive");
    std::vector<Tuple> out;
    Tuple t;
    const std::uint64_t total = detail::checked_pow(2, static_cast<std::size_t>(k),
                                                    std::uint64_t{1} << 30, "make_or");
    for (std::uint64_t idx = 1; idx < total; ++idx) {
        detail::decode_tuple(idx, 2, static_cast<std::size_t>(k), t);
        out.push_back(t);
    }
    return Predicate(2, k, std::move(out));
}

inline Predicate make_and(int k) {
    if (k < 1) throw input_error("make_and: arity must be positive");
    return Predicate(2, k, {Tuple(static_cast<std::size_t>(k), 1)});
}

inline Predicate make_nae(int r) {
    if (r < 2) throw input_error("make_nae: arity must be at least 2");
    std::vector<Tuple> out;
    Tuple t;
    const std::uint64_t total = detail::checked_pow(2, static_cast<std::size_t>(r),
                                                    std::uint64_t{1} << 30, "make_nae");
    for (std::uint64_t idx = 1; idx + 1 < total; ++idx) {
        detail::decode_tuple(idx, 2, static_cast<std::size_t>(r), t);
        out.push_back(t);
    }
    return Predicate(2, r, std::move(out));
}

inline Predicate make_cut() { return Predicate(2, 2, {{0, 1}, {1, 0}}); }

inline Predicate make_eq() { return Predicate(2, 2, {{0, 0}, {1, 1}}); }

// x + y + z = 0 over Z_p; the starred variant excludes the origin.
inline Predicate make_lin3(int p, bool punctured) {
    if (p < 2) throw input_error("make_lin3: modulus must be at least 2");
    std::vector<Tuple> out;
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
            int c = ((-(a + b)) % p + p) % p;
            if (punctured && a == 0 && b == 0 && c == 0) continue;
            out.push_back({a, b, c});
        }
    return Predicate(p, 3, std::move(out));
}

inline Predicate make_bck() {
    return Predicate(3, 3, {{1, 1, 1}, {2, 2, 2}, {0, 1, 2}, {1, 2, 0}, {2, 0, 1}});
}

inline Predicate make_bck_plus() {
    auto base = make_bck().tuples();
    base.push_back({0, 0, 0});
    return Predicate(3, 3, std::move(base));
}

// Image of the BCK predicate under the coordinatewise maps
// (swap01, x -> x+1 mod 3, swap01) applied to each tuple slot.
inline Predicate make_bck_extended() {
    return Predicate(3, 3, {{0, 0, 1}, {0, 2, 0}, {1, 2, 2}, {2, 0, 2}, {2, 1, 0}});
}

// Hamming weight mod m lands in S.
inline Predicate make_lin(int k, int mod, const std::vector<int>& S) {
    if (k < 1) throw input_error("make_lin: arity must be positive");
    if (mod < 1) throw input_error("make_lin: modulus must be positive");
    std::vector<bool> in(static_cast<std::size_t>(mod), false);
    for (int s : S) {
        if (s < 0 || s >= mod) throw input_error("make_lin: residue out of range");
        in[static_cast<std::size_t>(s)] = true;
    }
    std::vector<Tuple> out;
    Tuple t;
    const std::uint64_t total = detail::checked_pow(2, static_cast<std::size_t>(k),
                                                    std::uint64_t{1} << 30, "make_lin");
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        detail::decode_tuple(idx, 2, static_cast<std::size_t>(k), t);
        int ham = 0;
        for (int v : t) ham += v;
        if (in[static_cast<std::size_t>(ham % mod)]) out.push_back(t);
    }
    return Predicate(2, k, std::move(out));
}

namespace detail {

struct PolyTerm {
    long long coef = 1;
    std::vector<std::pair<int, int>> vars;  // (index, power)
};

// Sums of products: "x0*x1^2 + 2*x2 + 1". No subtraction; coefficients are
// reduced mod p at evaluation time.
inline std::vector<PolyTerm> parse_poly(const std::string& f) {
    std::string s;
    for (char ch : f)
        if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
    if (s.empty()) throw input_error("parse_poly: empty polynomial");
    std::vector<PolyTerm> terms;
    std::size_t pos = 0;
    auto read_int = [&]() -> long long {
        if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
            throw input_error("parse_poly: expected integer at position " + std::to_string(pos));
        long long v = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            v = v * 10 + (s[pos] - '0');
            if (v > 1'000'000'000) throw input_error("parse_poly: integer too large");
            ++pos;
        }
        return v;
    };
    while (true) {
        PolyTerm term;
        bool first_factor = true;
        while (true) {
            if (s[pos] == 'x') {
                ++pos;
                int var = static_cast<int>(read_int());
                int pow = 1;
                if (pos < s.size() && s[pos] == '^') {
                    ++pos;
                    pow = static_cast<int>(read_int());
                    if (pow < 1) throw input_error("parse_poly: exponent must be positive");
                }
                term.vars.emplace_back(var, pow);
            } else {
                long long c = read_int();
                term.coef *= c;
                if (term.coef > 1'000'000'000) throw input_error("parse_poly: coefficient too large");
            }
            first_factor = false;
            if (pos < s.size() && s[pos] == '*') { ++pos; continue; }
            break;
        }
        (void)first_factor;
        terms.push_back(std::move(term));
        if (pos >= s.size()) break;
        if (s[pos] != '+') throw input_error("parse_poly: unexpected character '" +
                                             std::string(1, s[pos]) + "'");
        ++pos;
    }
    return terms;
}

inline int eval_poly(const std::vector<PolyTerm>& terms, const Tuple& x, int p) {
    long long acc = 0;
    for (const auto& term : terms) {
        long long v = term.coef % p;
        for (const auto& [var, pow] : term.vars) {
            for (int e = 0; e < pow; ++e) v = (v * x[static_cast<std::size_t>(var)]) % p;
        }
        acc = (acc + v) % p;
    }
    return static_cast<int>(acc);
}

} // namespace detail

// Zero set of a polynomial over Z_p; the starred variant excludes the origin.
inline Predicate make_poly(int p, int r, const std::string& f, bool punctured) {
    if (p < 2) throw input_error("make_poly: modulus must be at least 2");
    if (r < 1) throw input_error("make_poly: arity must be positive");
    auto terms = detail::parse_poly(f);
    for (const auto& term : terms)
        for (const auto& [var, pow] : term.vars) {
            (void)pow;
            if (var >= r) throw input_error("make_poly: variable index out of arity");
        }
    const std::uint64_t total = detail::checked_pow(static_cast<std::uint64_t>(p),
                                                    static_cast<std::size_t>(r),
                                                    std::uint64_t{1} << 24, "make_poly");
    std::vector<Tuple> out;
    Tuple x;
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        detail::decode_tuple(idx, p, static_cast<std::size_t>(r), x);
        if (detail::eval_poly(terms, x, p) != 0) continue;
        if (punctured && std::all_of(x.begin(), x.end(), [](int v) { return v == 0; })) continue;
        out.push_back(x);
    }
    return Predicate(p, r, std::move(out));
}

namespace detail {

inline std::map<std::string, std::string> parse_params(const std::string& s) {
    std::map<std::string, std::string> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t eq = s.find('=', pos);
        if (eq == std::string::npos) throw input_error("predicate params: expected key=value");
        std::string key = s.substr(pos, eq - pos);
        std::size_t end = s.find(',', eq + 1);
        if (end == std::string::npos) end = s.size();
        out[key] = s.substr(eq + 1, end - eq - 1);
        pos = end + (end < s.size() ? 1 : 0);
    }
    return out;
}

inline int param_int(const std::map<std::string, std::string>& ps, const std::string& key) {
    auto it = ps.find(key);
    if (it == ps.end()) throw input_error("predicate params: missing '" + key + "'");
    try {
        return std::stoi(it->second);
    } catch (const std::exception&) {
        throw input_error("predicate params: '" + key + "' is not an integer");
    }
}

inline std::vector<int> param_int_list(const std::map<std::string, std::string>& ps,
                                       const std::string& key) {
    auto it = ps.find(key);
    if (it == ps.end()) throw input_error("predicate params: missing '" + key + "'");
    std::vector<int> out;
    std::size_t pos = 0;
    const std::string& s = it->second;
    while (pos <= s.size()) {
        std::size_t end = s.find('|', pos);
        if (end == std::string::npos) end = s.size();
        try {
            out.push_back(std::stoi(s.substr(pos, end - pos)));
        } catch (const std::exception&) {
            throw input_error("predicate params: '" + key + "' has a non-integer entry");
        }
        if (end == s.size()) break;
        pos = end + 1;
    }
    return out;
}

} // namespace detail

// Catalog lookup: "name" or "name:k=v,k=v". Known names: or, and, nae, cut,
// eq, 3lin, 3lin*, bck, bck+, bck-extended, lin, poly, poly*.
inline Predicate parse_predicate(const std::string& spec) {
    std::string name = spec;
    std::map<std::string, std::string> ps;
    if (auto colon = spec.find(':'); colon != std::string::npos) {
        name = spec.substr(0, colon);
        ps = detail::parse_params(spec.substr(colon + 1));
    }
    if (name == "or") return make_or(detail::param_int(ps, "k"));
    if (name == "and") return make_and(detail::param_int(ps, "k"));
    if (name == "nae") return make_nae(detail::param_int(ps, "r"));
    if (name == "cut") return make_cut();
    if (name == "eq") return make_eq();
    if (name == "3lin") return make_lin3(detail::param_int(ps, "p"), false);
    if (name == "3lin*") return make_lin3(detail::param_int(ps, "p"), true);
    if (name == "bck") return make_bck();
    if (name == "bck+") return make_bck_plus();
    if (name == "bck-extended") return make_bck_extended();
    if (name == "lin")
        return make_lin(detail::param_int(ps, "k"), detail::param_int(ps, "m"),
                        detail::param_int_list(ps, "S"));
    if (name == "poly" || name == "poly*") {
        auto it = ps.find("f");
        if (it == ps.end()) throw input_error("predicate params: missing 'f'");
        return make_poly(detail::param_int(ps, "p"), detail::param_int(ps, "r"), it->second,
                         name == "poly*");
    }
    throw input_error("parse_predicate: unknown predicate '" + name + "'");
}

// ---- kernelization ----------------------------------------------------------

enum class KernelizeMode { exact, structured };

struct KernelizeResult {
    CspInstance kernel;
    std::vector<std::size_t> removed;   // original clause indices, increasing
};

// Structural test for the punctured three-variable linear predicate.
inline std::optional<int> lin3_star_modulus(const Predicate& R) {
    if (R.arity() != 3) return std::nullopt;
    const int p = R.domain_size();
    if (p < 2) return std::nullopt;
    if (R == make_lin3(p, true)) return p;
    return std::nullopt;
}

namespace detail {

struct KernelBasis {
    // basis[b][free_cols[b]] == 1 and basis[b][free_cols[b']] == 0 for b' != b,
    // so a kernel element's basis coefficients are its values at the free columns.
    std::vector<std::vector<int>> basis;
    std::vector<std::size_t> free_cols;
};

// Gaussian elimination mod prime p; returns a kernel basis of the row space.
inline KernelBasis kernel_basis_mod_p(std::vector<std::vector<int>> rows,
                                      std::size_t n, int p) {
    auto inv_mod = [&](int a) {
        int r = 1, base = ((a % p) + p) % p, e = p - 2;
        while (e > 0) {
            if (e & 1) r = static_cast<int>((static_cast<long long>(r) * base) % p);
            base = static_cast<int>((static_cast<long long>(base) * base) % p);
            e >>= 1;
        }
        return r;
    };
    std::vector<std::size_t> pivot_col;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < n && rank < rows.size(); ++col) {
        std::size_t sel = rows.size();
        for (std::size_t r = rank; r < rows.size(); ++r)
            if (rows[r][col] % p != 0) { sel = r; break; }
        if (sel == rows.size()) continue;
        std::swap(rows[rank], rows[sel]);
        const int iv = inv_mod(rows[rank][col]);
        for (std::size_t c = 0; c < n; ++c)
            rows[rank][c] = static_cast<int>((static_cast<long long>(rows[rank][c]) * iv) % p);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r == rank || rows[r][col] % p == 0) continue;
            const int f = ((rows[r][col] % p) + p) % p;
            for (std::size_t c = 0; c < n; ++c) {
                long long v = rows[r][c] - static_cast<long long>(f) * rows[rank][c];
                rows[r][c] = static_cast<int>(((v % p) + p) % p);
            }
        }
        pivot_col.push_back(col);
        ++rank;
    }
    std::vector<bool> is_pivot(n, false);
    for (std::size_t c : pivot_col) is_pivot[c] = true;
    KernelBasis out;
    for (std::size_t free = 0; free < n; ++free) {
        if (is_pivot[free]) continue;
        std::vector<int> h(n, 0);
        h[free] = 1;
        for (std::size_t r = 0; r < rank; ++r) {
            int v = rows[r][free] % p;
            h[pivot_col[r]] = ((-v) % p + p) % p;
        }
        out.basis.push_back(std::move(h));
        out.free_cols.push_back(free);
    }
    return out;
}

// Rank of the row set over Z_p.
inline std::size_t rank_mod_p(const std::vector<std::vector<int>>& rows, std::size_t n, int p) {
    if (rows.empty()) return 0;
    return n - kernel_basis_mod_p(rows, n, p).basis.size();
}

} // namespace detail

// Removes clauses whose satisfaction is implied by the rest, repeatedly, in
// clause order. Exact mode enumerates assignments. Structured mode works for
// the punctured three-variable linear predicate only: candidates for a
// counterexample lie in the kernel of the other clauses' equation rows, and
// the kernel is enumerated when small enough, keeping the clause otherwise.
inline KernelizeResult kernelize(const Predicate& R, const CspInstance& inst,
                                 KernelizeMode mode = KernelizeMode::exact) {
    inst.validate(R);
    const std::size_t m = inst.clauses.size();
    std::vector<bool> kept(m, true);

    if (mode == KernelizeMode::exact) {
        const std::uint64_t total = detail::assignment_space(R, inst.n, "kernelize");
        auto sat = detail::clause_sat_sets(R, inst.clauses, inst.n, total, "kernelize");
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t j = 0; j < m && !changed; ++j) {
                if (!kept[j]) continue;
                IdxSet others = IdxSet::all(total);
                for (std::size_t j2 = 0; j2 < m; ++j2)
                    if (j2 != j && kept[j2]) others.and_with(sat[j2]);
                others.and_not_with(sat[j]);
                if (!others.any()) {
                    kept[j] = false;
                    changed = true;
                }
            }
        }
        // Sanity: removal must preserve the satisfying-assignment set.
        IdxSet before = IdxSet::all(total), after = IdxSet::all(total);
        for (std::size_t j = 0; j < m; ++j) {
            before.and_with(sat[j]);
            if (kept[j]) after.and_with(sat[j]);
        }
        if (!(before == after)) throw verify_error("kernelize: satisfying set changed");
    } else {
        auto popt = lin3_star_modulus(R);
        if (!popt) throw input_error("kernelize: structured mode needs the punctured 3-variable linear predicate");
        const int p = *popt;

        auto row_of = [&](const std::vector<std::size_t>& y) {
            std::vector<int> row(inst.n, 0);
            for (std::size_t v : y) row[v] = (row[v] + 1) % p;
            return row;
        };

        const std::uint64_t enum_cap = std::uint64_t{1} << 20;
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t j = 0; j < m && !changed; ++j) {
                if (!kept[j]) continue;
                std::vector<std::vector<int>> rows;
                std::vector<std::size_t> other_idx;
                for (std::size_t j2 = 0; j2 < m; ++j2)
                    if (j2 != j && kept[j2]) {
                        rows.push_back(row_of(inst.clauses[j2]));
                        other_idx.push_back(j2);
                    }
                auto kb = detail::kernel_basis_mod_p(std::move(rows), inst.n, p);
                const auto& basis = kb.basis;
                std::uint64_t count = 1;
                bool overflow = false;
                for (std::size_t b = 0; b < basis.size(); ++b) {
                    if (count > enum_cap / static_cast<std::uint64_t>(p)) { overflow = true; break; }
                    count *= static_cast<std::uint64_t>(p);
                }
                if (overflow) continue;  // keep conservatively

                bool counterexample = false;
                Assignment sigma(inst.n, 0);
                Tuple coeffs(basis.size(), 0);
                for (std::uint64_t idx = 0; idx < count && !counterexample; ++idx) {
                    detail::decode_tuple(idx, p, basis.size(), coeffs);
                    std::fill(sigma.begin(), sigma.end(), 0);
                    for (std::size_t b = 0; b < basis.size(); ++b) {
                        if (coeffs[b] == 0) continue;
                        for (std::size_t v = 0; v < inst.n; ++v)
                            sigma[v] = (sigma[v] + coeffs[b] * basis[b][v]) % p;
                    }
                    bool others_ok = true;
                    for (std::size_t j2 : other_idx)
                        if (!satisfies(R, inst.clauses[j2], sigma)) { others_ok = false; break; }
                    if (others_ok && !satisfies(R, inst.clauses[j], sigma)) counterexample = true;
                }
                if (!counterexample) {
                    kept[j] = false;
                    changed = true;
                }
            }
        }
    }

    KernelizeResult r;
    r.kernel.n = inst.n;
    for (std::size_t j = 0; j < m; ++j) {
        if (kept[j]) r.kernel.clauses.push_back(inst.clauses[j]);
        else r.removed.push_back(j);
    }
    return r;
}

// ---- group codes -------------------------------------------------------------

struct GroupCodeResult {
    BinaryCode code;
    std::size_t subgroup_order = 0;
};

namespace detail {

constexpr std::size_t kGroupClosureCap = std::size_t{1} << 20;

// BFS closure of words under elementwise addition of the generators; the
// identity word is index pattern all-zero. add(a, b) works on element indices.
template <typename AddFn>
GroupCodeResult group_closure(std::size_t m, std::size_t group_order,
                              const std::vector<std::vector<int>>& generators, AddFn add) {
    if (m == 0) throw input_error("group_code: need at least one coordinate");
    if (generators.empty()) throw input_error("group_code: need at least one generator");
    for (const auto& g : generators) {
        if (g.size() != m) throw input_error("group_code: generator length mismatch");
        for (int e : g)
            if (e < 0 || static_cast<std::size_t>(e) >= group_order)
                throw input_error("group_code: generator entry out of range");
    }
    std::set<std::vector<int>> seen;
    std::queue<std::vector<int>> frontier;
    std::vector<int> id(m, 0);
    seen.insert(id);
    frontier.push(std::move(id));
    while (!frontier.empty()) {
        std::vector<int> h = std::move(frontier.front());
        frontier.pop();
        for (const auto& g : generators) {
            std::vector<int> h2(m);
            for (std::size_t i = 0; i < m; ++i) h2[i] = add(h[i], g[i]);
            if (seen.insert(h2).second) {
                if (seen.size() > kGroupClosureCap)
                    throw budget_error("group_code: subgroup exceeds closure cap");
                frontier.push(std::move(h2));
            }
        }
    }
    std::vector<BitVec> words;
    words.reserve(seen.size());
    for (const auto& h : seen) {
        BitVec c(m);
        for (std::size_t i = 0; i < m; ++i) c.set(i, h[i] != 0);
        words.push_back(std::move(c));
    }
    std::size_t order = seen.size();
    return GroupCodeResult{BinaryCode(m, std::move(words)), order};
}

} // namespace detail

// Subgroup code over a product of cyclic groups. Each generator lists one
// group element per coordinate, encoded in mixed radix over the moduli; the
// code records, per subgroup element, which coordinates are non-identity.
inline GroupCodeResult group_code(const std::vector<int>& moduli, std::size_t m,
                                  const std::vector<std::vector<int>>& generators) {
    if (moduli.empty()) throw input_error("group_code: need at least one cyclic factor");
    std::uint64_t order = 1;
    for (int q : moduli) {
        if (q < 1) throw input_error("group_code: moduli must be positive");
        order *= static_cast<std::uint64_t>(q);
        if (order > (std::uint64_t{1} << 20)) throw budget_error("group_code: group order exceeds cap");
    }
    // Mixed radix over the moduli, last factor least significant.
    auto add = [&moduli](int a, int b) {
        std::vector<int> da(moduli.size()), db(moduli.size());
        int x = a, y = b;
        for (std::size_t k = moduli.size(); k-- > 0;) {
            da[k] = x % moduli[k];
            x /= moduli[k];
            db[k] = y % moduli[k];
            y /= moduli[k];
        }
        int out = 0;
        for (std::size_t k = 0; k < moduli.size(); ++k)
            out = out * moduli[k] + (da[k] + db[k]) % moduli[k];
        return out;
    };
    return detail::group_closure(m, static_cast<std::size_t>(order), generators, add);
}

// Same construction from an explicit addition table. Index 0 must be the
// identity and every row and column must be a permutation; associativity is
// the caller's responsibility.
inline GroupCodeResult group_code_from_table(const std::vector<std::vector<int>>& table,
                                             std::size_t m,
                                             const std::vector<std::vector<int>>& generators) {
    const std::size_t n = table.size();
    if (n == 0) throw input_error("group_code_from_table: empty table");
    for (const auto& row : table) {
        if (row.size() != n) throw input_error("group_code_from_table: table must be square");
        for (int v : row)
            if (v < 0 || static_cast<std::size_t>(v) >= n)
                throw input_error("group_code_from_table: entry out of range");
    }
    for (std::size_t x = 0; x < n; ++x)
        if (table[0][x] != static_cast<int>(x) || table[x][0] != static_cast<int>(x))
            throw input_error("group_code_from_table: index 0 must be the identity");
    for (std::size_t x = 0; x < n; ++x) {
        std::vector<bool> row_seen(n, false), col_seen(n, false);
        for (std::size_t y = 0; y < n; ++y) {
            if (row_seen[static_cast<std::size_t>(table[x][y])] ||
                col_seen[static_cast<std::size_t>(table[y][x])])
                throw input_error("group_code_from_table: rows and columns must be permutations");
            row_seen[static_cast<std::size_t>(table[x][y])] = true;
            col_seen[static_cast<std::size_t>(table[y][x])] = true;
        }
    }
    auto add = [&table](int a, int b) { return table[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; };
    return detail::group_closure(m, n, generators, add);
}

} // namespace sparsicode
