// sparsicode/entropy.hpp
#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sparsicode/code.hpp"
#include "sparsicode/game.hpp"
#include "sparsicode/rng.hpp"

namespace sparsicode {

inline double binary_entropy(double x) {
    if (x < 0.0 || x > 1.0) throw input_error("binary_entropy: argument outside [0,1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

// Distribution over codewords of one length. Atoms are distinct by map key;
// probabilities must be nonnegative and sum to 1 within 1e-9.
struct CodeDistribution {
    std::size_t length = 0;
    std::map<BitVec, double> atoms;

    void validate() const {
        double sum = 0.0;
        for (const auto& [c, p] : atoms) {
            if (c.length() != length) throw input_error("CodeDistribution: atom length mismatch");
            if (p < 0.0) throw input_error("CodeDistribution: negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw input_error("CodeDistribution: probabilities sum to " + std::to_string(sum));
    }

    // Marginal P[c_i = 1].
    double marginal(std::size_t i) const {
        double s = 0.0;
        for (const auto& [c, p] : atoms)
            if (c.get(i)) s += p;
        return s;
    }
};

struct CoordinateDistribution {
    std::map<std::size_t, double> atoms;

    void validate(std::size_t m) const {
        double sum = 0.0;
        for (const auto& [i, p] : atoms) {
            if (i >= m) throw input_error("CoordinateDistribution: coordinate out of range");
            if (p < 0.0) throw input_error("CoordinateDistribution: negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw input_error("CoordinateDistribution: probabilities sum to " + std::to_string(sum));
    }
};

template <typename Map>
inline double map_entropy(const Map& atoms) {
    double h = 0.0;
    for (const auto& [k, p] : atoms)
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

inline double distribution_entropy(const CodeDistribution& d) { return map_entropy(d.atoms); }
inline double distribution_entropy(const CoordinateDistribution& d) { return map_entropy(d.atoms); }

namespace detail {

inline std::map<BitVec, double> or_convolve(const std::map<BitVec, double>& a,
                                            const std::map<BitVec, double>& b,
                                            std::size_t atom_cap) {
    std::map<BitVec, double> out;
    for (const auto& [ca, pa] : a)
        for (const auto& [cb, pb] : b) {
            out[ca | cb] += pa * pb;
            if (out.size() > atom_cap)
                throw budget_error("or_power_distribution: atom budget exhausted");
        }
    return out;
}

} // namespace detail

// Distribution of the coordinatewise OR of N independent draws. Binary
// exponentiation, so a power of two costs log2(N) squarings.
inline CodeDistribution or_power_distribution(const CodeDistribution& d, std::uint64_t N) {
    d.validate();
    if (N == 0) throw input_error("or_power_distribution: N must be >= 1");
    if (d.length > 20) {
        double est = std::pow(static_cast<double>(d.atoms.size()), static_cast<double>(N));
        if (!(est <= static_cast<double>(std::size_t{1} << 20)))
            throw budget_error("or_power_distribution: support growth bound exceeded (m > 20)");
    }
    const std::size_t atom_cap = std::size_t{1} << 22;

    CodeDistribution result;
    result.length = d.length;
    result.atoms[BitVec(d.length)] = 1.0;   // OR of zero draws
    std::map<BitVec, double> base = d.atoms;
    std::uint64_t n = N;
    for (;;) {
        if (n & 1) result.atoms = detail::or_convolve(result.atoms, base, atom_cap);
        n >>= 1;
        if (n == 0) break;
        base = detail::or_convolve(base, base, atom_cap);
    }
    result.validate();
    return result;
}

struct SawinCheck {
    double lhs = 0.0;   // H(OR of N draws)
    double rhs = 0.0;   // H(D) h(1-(1-p)^N) / h(p)
    double p = 0.0;     // max coordinate marginal
    bool holds = false;
};

// Entropy lower bound for an OR of independent draws, applicable while
// 1-(1-p)^{N/2} stays below (3-sqrt 5)/2. Tight when D is a product of
// independent Bernoulli(p) coordinates.
inline SawinCheck check_sawin_bound(const CodeDistribution& d, std::uint64_t N) {
    d.validate();
    if (N < 2 || (N % 2) != 0) throw input_error("check_sawin_bound: N must be even and >= 2");
    SawinCheck r;
    if (d.atoms.size() <= 1) {
        // Point mass: both sides are 0.
        r.holds = true;
        return r;
    }
    double p = 0.0;
    for (std::size_t i = 0; i < d.length; ++i) p = std::max(p, d.marginal(i));
    r.p = p;
    const double golden = (3.0 - std::sqrt(5.0)) / 2.0;
    double reach = 1.0 - std::pow(1.0 - p, static_cast<double>(N) / 2.0);
    if (reach > golden + 1e-12)
        throw input_error("check_sawin_bound: precondition fails, p = " + std::to_string(p));
    r.lhs = distribution_entropy(or_power_distribution(d, N));
    double q = 1.0 - std::pow(1.0 - p, static_cast<double>(N));
    r.rhs = distribution_entropy(d) * binary_entropy(q) / binary_entropy(p);
    r.holds = r.lhs >= r.rhs - 1e-9;
    return r;
}

// Entropy ceiling used by the sparse-removal bound.
inline double code_entropy_bound(std::size_t nrd, std::size_t m, double theta) {
    if (theta < 1.0) throw input_error("code_entropy_bound: theta must be >= 1");
    return (3.0 * std::log2(3.0 * theta) / theta) * static_cast<double>(nrd) *
           std::log2(static_cast<double>(m) + 1.0);
}

struct DichotomyResult {
    double theta = 0.0;
    double game_value = 0.0;
    std::optional<CoordinateDistribution> cover;   // min_c sum_{i in supp(c)} Q_i >= 1/theta
    std::optional<CodeDistribution> sparse;        // max_i E_{c~P}[c_i] <= 1/theta
};

namespace detail {

inline CoordinateDistribution build_cover_checked(const BinaryCode& code, const GameSolution& g,
                                                  double theta) {
    CoordinateDistribution q;
    for (std::size_t i = 0; i < code.length(); ++i) {
        double p = static_cast<double>(g.coord_dist[i]);
        if (p > 0.0) q.atoms[i] = p;
    }
    q.validate(code.length());
    for (const auto& c : code.words()) {
        double pay = 0.0;
        for (const auto& [i, p] : q.atoms)
            if (c.get(i)) pay += p;
        if (pay < 1.0 / theta - 1e-7)
            throw verify_error("cover guarantee failed");
    }
    return q;
}

inline CodeDistribution build_sparse_checked(const BinaryCode& code, const GameSolution& g,
                                             double theta) {
    CodeDistribution p;
    p.length = code.length();
    for (std::size_t j = 0; j < code.size(); ++j) {
        double v = static_cast<double>(g.codeword_dist[j]);
        if (v > 0.0) p.atoms[code.word(j)] = v;
    }
    p.validate();
    for (std::size_t i = 0; i < code.length(); ++i)
        if (p.marginal(i) > 1.0 / theta + 1e-7)
            throw verify_error("sparseness guarantee failed");
    return p;
}

// Cover iff the game value reaches 1/theta; ties go to the cover.
inline bool classify_cover(const GameSolution& g, double theta) {
    if (g.exact) return g.value >= Rat(1) / Rat(theta);
    double v = static_cast<double>(g.value);
    if (std::abs(v - 1.0 / theta) <= 2.0 * g.gap)
        throw budget_error("minimax: approximate game value too close to 1/theta");
    return v >= 1.0 / theta;
}

} // namespace detail

// Minimax dichotomy: either a coordinate mixture covering every codeword to
// at least 1/theta, or a theta-sparse codeword mixture. Ties go to the cover.
inline DichotomyResult solve_cover_or_sparse(const BinaryCode& code, double theta) {
    if (code.length() == 0) throw input_error("solve_cover_or_sparse: need m >= 1");
    if (theta < 1.0) throw input_error("solve_cover_or_sparse: theta must be >= 1");
    DichotomyResult res;
    res.theta = theta;

    if (code.empty()) {
        res.game_value = 1.0;
        CoordinateDistribution q;
        q.atoms[0] = 1.0;
        res.cover = std::move(q);
        return res;
    }

    GameSolution g = solve_game(code);
    res.game_value = static_cast<double>(g.value);
    if (detail::classify_cover(g, theta))
        res.cover = detail::build_cover_checked(code, g, theta);
    else
        res.sparse = detail::build_sparse_checked(code, g, theta);
    return res;
}

struct SparseRemovalResult {
    std::vector<BitVec> removed;                    // S, in lex order
    CoordinateDistribution cover;                   // cover of everything outside S
    std::optional<CodeDistribution> mixture;        // final theta-sparse mixture; absent if input already covered
    std::size_t iterations = 0;
    double game_value_at_stop = 0.0;
};

// Repeatedly mix theta-sparse distributions so that the exact-argmax set S
// grows by at least one codeword per round, stopping once the remainder has a
// cover. The mixture stays theta-sparse, so log2 |S| <= H(mixture).
inline SparseRemovalResult sparse_removal(const BinaryCode& code, double theta) {
    if (code.length() == 0) throw input_error("sparse_removal: need m >= 1");
    if (theta <= 1.0) throw input_error("sparse_removal: theta must be > 1");
    const std::size_t n = code.size();

    SparseRemovalResult out;
    std::vector<bool> inS(n, false);
    std::vector<Rat> nu(n, 0);
    bool have_nu = false;

    for (std::size_t iter = 0;; ++iter) {
        if (iter > n + 1) throw verify_error("sparse_removal: iteration bound exceeded");

        std::vector<BitVec> rest;
        std::vector<std::size_t> rest_idx;
        for (std::size_t j = 0; j < n; ++j)
            if (!inS[j]) { rest.push_back(code.word(j)); rest_idx.push_back(j); }

        if (rest.empty()) {
            // Everything removed; the empty remainder is trivially covered.
            CoordinateDistribution q;
            q.atoms[0] = 1.0;
            out.cover = std::move(q);
            out.iterations = iter;
            out.game_value_at_stop = 1.0;
            break;
        }

        // rest is already sorted and distinct, so word order is preserved.
        BinaryCode rest_code(code.length(), rest);
        GameSolution g = solve_game(rest_code);
        if (detail::classify_cover(g, theta)) {
            out.cover = detail::build_cover_checked(rest_code, g, theta);
            out.iterations = iter;
            out.game_value_at_stop = static_cast<double>(g.value);
            break;
        }

        // theta-sparse mu over the remainder, zero on S.
        std::vector<Rat> mu(n, 0);
        for (std::size_t k = 0; k < rest_code.size(); ++k)
            mu[rest_idx[k]] = g.codeword_dist[k];

        if (!have_nu) {
            nu = mu;
            have_nu = true;
        } else {
            Rat p_cur = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (inS[j]) p_cur = nu[j];   // every S entry holds the max value
            Rat q(1);
            bool found = false;
            for (std::size_t j = 0; j < n; ++j) {
                if (inS[j]) continue;
                Rat gapv = p_cur - nu[j];    // > 0 since j is outside the argmax set
                Rat qc = gapv / (gapv + mu[j]);
                if (!found || qc < q) { q = qc; found = true; }
            }
            if (!found) throw verify_error("sparse_removal: no codeword outside S");
            for (std::size_t j = 0; j < n; ++j)
                nu[j] = (1 - q) * nu[j] + q * mu[j];
        }

        // S = exact argmax of nu.
        Rat mx = 0;
        for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, nu[j]);
        std::size_t grew = 0;
        for (std::size_t j = 0; j < n; ++j) {
            bool now = (nu[j] == mx);
            if (now && !inS[j]) ++grew;
            inS[j] = now;
        }
        if (grew == 0) throw verify_error("sparse_removal: argmax set failed to grow");
    }

    for (std::size_t j = 0; j < n; ++j)
        if (inS[j]) out.removed.push_back(code.word(j));
    if (have_nu) {
        CodeDistribution mix;
        mix.length = code.length();
        for (std::size_t j = 0; j < n; ++j) {
            double v = static_cast<double>(nu[j]);
            if (v > 0.0) mix.atoms[code.word(j)] = v;
        }
        mix.validate();
        out.mixture = std::move(mix);
    }
    return out;
}

struct DecompositionStep {
    std::size_t removed = 0;        // |S_j| this round
    std::size_t sampled_coord = 0;  // global coordinate added to I
    BigInt f_before;                // monovariant before the round
};

struct Decomposition {
    IndexSet I;
    std::vector<std::size_t> removed_counts;
    BinaryCode residual{0};             // weight-<=d part of the code, punctured to the complement of I
    double d = 0.0;
    double lambda = 0.0;
    std::uint64_t seed = 0;
    std::size_t nrd_used = 0;
    int case_used = 0;              // 1, 2, or 3
    std::vector<DecompositionStep> trace;
};

namespace detail {

inline BigInt decomposition_monovariant(const BinaryCode& code, const std::vector<bool>& inT,
                                        const IndexSet& I) {
    BigInt f = 0;
    for (std::size_t j = 0; j < code.size(); ++j) {
        if (inT[j]) continue;
        std::size_t ham = 0;
        const BitVec& c = code.word(j);
        for (std::size_t i = 0; i < c.length(); ++i)
            if (c.get(i) && !I.contains(i)) ++ham;
        f += BigInt(1) << ham;
    }
    return f;
}

} // namespace detail

// Coordinate/codeword decomposition: works on the weight-<=d part of the
// code (dropping heavier words only shrinks non-redundancy), growing a small
// coordinate set I and a removed set T until everything is removed, so that
// the low-weight words survive puncturing to few patterns. Randomized;
// retried on fresh derived seeds, with an explicit error if every attempt
// exhausts its step cap.
inline Decomposition decompose(const BinaryCode& code, double d, double lambda,
                               std::uint64_t seed,
                               std::optional<std::size_t> nrd_hint = std::nullopt,
                               const ExactSearchLimits& limits = {}) {
    if (code.length() == 0) throw input_error("decompose: need m >= 1");
    if (d < 1.0) throw input_error("decompose: d must be >= 1");
    if (lambda < 1.0) throw input_error("decompose: lambda must be >= 1");
    const std::size_t m = code.length();
    const double log4m = std::log2(4.0 * static_cast<double>(m));

    std::vector<BitVec> light;
    for (const auto& c : code.words())
        if (static_cast<double>(c.popcount()) <= d) light.push_back(c);
    const BinaryCode filtered(m, std::move(light));

    Decomposition out;
    out.d = d;
    out.lambda = lambda;
    out.seed = seed;
    const std::size_t nrd = nrd_hint ? *nrd_hint : nrd_exact(filtered, limits).value;
    out.nrd_used = nrd;

    if (d >= lambda * static_cast<double>(nrd)) {
        out.case_used = 1;
        out.residual = filtered;
        return out;
    }
    if (static_cast<double>(m) <= 2.0 * lambda * static_cast<double>(nrd) * log4m) {
        out.case_used = 2;
        std::vector<std::size_t> all(m);
        for (std::size_t i = 0; i < m; ++i) all[i] = i;
        out.I = IndexSet(std::move(all));
        out.residual = puncture(filtered, IndexSet{});
        return out;
    }

    out.case_used = 3;
    const double theta = lambda * static_cast<double>(nrd) / d;   // > 1 past case 1
    // Floor, not ceil: every sampling round adds a fresh coordinate to I, so
    // the round cap is what guarantees |I| <= 2*lambda*nrd*log2(4m).
    const std::size_t step_cap =
        static_cast<std::size_t>(std::floor(2.0 * lambda * static_cast<double>(nrd) * log4m));

    Rng master(seed);
    std::string last_fail;
    for (int attempt = 0; attempt < 20; ++attempt) {
        Rng rng(attempt == 0 ? seed : master.derive());
        IndexSet I;
        std::vector<bool> inT(filtered.size(), false);
        std::vector<std::size_t> removed_counts;
        std::vector<DecompositionStep> trace;
        BigInt f_prev = detail::decomposition_monovariant(filtered, inT, I);
        bool done = false;

        for (std::size_t step = 0; step < step_cap && !done; ++step) {
            std::vector<BitVec> active;
            std::vector<std::size_t> active_idx;
            for (std::size_t j = 0; j < filtered.size(); ++j)
                if (!inT[j]) { active.push_back(filtered.word(j)); active_idx.push_back(j); }
            if (active.empty()) { done = true; break; }

            IndexSet keep = I.complement(m);
            if (keep.empty()) {
                // Every coordinate is in I; the empty-restriction words are
                // uncoverable, so the remainder is removed wholesale.
                for (std::size_t j : active_idx) inT[j] = true;
                removed_counts.push_back(active_idx.size());
                done = true;
                break;
            }

            BinaryCode local = puncture(BinaryCode(m, active), keep);
            SparseRemovalResult sr = sparse_removal(local, theta);
            std::set<BitVec> Sset(sr.removed.begin(), sr.removed.end());

            for (std::size_t j : active_idx) {
                BitVec loc(keep.size());
                for (std::size_t k = 0; k < keep.size(); ++k)
                    loc.set(k, filtered.word(j).get(keep[k]));
                if (Sset.count(loc)) inT[j] = true;
            }
            removed_counts.push_back(sr.removed.size());

            // Sample a coordinate from the cover of what survived.
            double r = rng.real();
            double acc = 0.0;
            std::size_t local_pick = sr.cover.atoms.begin()->first;
            for (const auto& [li, p] : sr.cover.atoms) {
                acc += p;
                local_pick = li;
                if (r < acc) break;
            }
            std::size_t global_pick = keep[local_pick];
            I = I.union_with(IndexSet({global_pick}));

            DecompositionStep st;
            st.removed = sr.removed.size();
            st.sampled_coord = global_pick;
            st.f_before = f_prev;
            trace.push_back(st);

            BigInt f_now = detail::decomposition_monovariant(filtered, inT, I);
            if (f_now > f_prev)
                throw verify_error("decompose: monovariant increased");
            f_prev = f_now;

            bool any_left = false;
            for (std::size_t j = 0; j < filtered.size(); ++j)
                if (!inT[j]) { any_left = true; break; }
            if (!any_left) done = true;
        }

        if (done) {
            out.I = I;
            out.removed_counts = std::move(removed_counts);
            out.trace = std::move(trace);
            out.residual = puncture(filtered, I.complement(m));
            return out;
        }
        last_fail = "attempt " + std::to_string(attempt) + " used all " +
                    std::to_string(step_cap) + " steps";
    }
    throw budget_error("decompose: no attempt halted within the step cap (" + last_fail + ")");
}

} // namespace sparsicode
