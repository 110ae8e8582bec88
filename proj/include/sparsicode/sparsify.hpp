// sparsicode/sparsify.hpp
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sparsicode/code.hpp"
#include "sparsicode/common.hpp"
#include "sparsicode/entropy.hpp"
#include "sparsicode/rational_lp.hpp"
#include "sparsicode/rng.hpp"

namespace sparsicode {

// Nonnegative weights on coordinates; zero entries are omitted.
class WeightMap {
public:
    WeightMap() = default;
    explicit WeightMap(std::size_t length) : m_(length) {}

    static WeightMap all_ones(std::size_t length) {
        WeightMap w(length);
        for (std::size_t i = 0; i < length; ++i) w.w_.emplace(i, 1.0);
        return w;
    }

    std::size_t length() const { return m_; }
    std::size_t support_size() const { return w_.size(); }
    const std::map<std::size_t, double>& entries() const { return w_; }

    double at(std::size_t i) const {
        auto it = w_.find(i);
        return it == w_.end() ? 0.0 : it->second;
    }

    void set(std::size_t i, double v) {
        if (i >= m_) throw input_error("WeightMap: coordinate out of range");
        if (!std::isfinite(v) || v < 0.0) throw input_error("WeightMap: weights must be finite and nonnegative");
        if (v == 0.0) w_.erase(i);
        else w_[i] = v;
    }

    double dot(const BitVec& c) const {
        if (c.length() != m_) throw input_error("WeightMap::dot: length mismatch");
        double s = 0.0;
        for (const auto& [i, v] : w_)
            if (c.get(i)) s += v;
        return s;
    }

    double min_weight() const {
        double mn = 0.0;
        bool first = true;
        for (const auto& [i, v] : w_) {
            (void)i;
            if (first || v < mn) mn = v;
            first = false;
        }
        return first ? 0.0 : mn;
    }

    double max_weight() const {
        double mx = 0.0;
        for (const auto& [i, v] : w_) {
            (void)i;
            mx = std::max(mx, v);
        }
        return mx;
    }

private:
    std::size_t m_ = 0;
    std::map<std::size_t, double> w_;
};

struct SparsifyReport {
    bool valid = true;
    double worst_ratio_low = 1.0;    // min over codewords of <w,c>/<base,c>
    double worst_ratio_high = 1.0;   // max over codewords of <w,c>/<base,c>
    std::optional<BitVec> offending; // first codeword (lex) outside the band
    std::size_t support_size = 0;
};

// Checks (1-eps)<base,c> <= <w,c> <= (1+eps)<base,c> for every codeword.
// base defaults to all-ones, i.e. Hamming weight.
inline SparsifyReport verify_sparsifier(const BinaryCode& code, const WeightMap& w, double eps,
                                        const std::optional<WeightMap>& base = std::nullopt) {
    if (!(eps > 0.0 && eps < 1.0)) throw input_error("verify_sparsifier: eps must lie in (0,1)");
    if (w.length() != code.length()) throw input_error("verify_sparsifier: weight length mismatch");
    if (base && base->length() != code.length()) throw input_error("verify_sparsifier: base length mismatch");

    SparsifyReport rep;
    rep.support_size = w.support_size();
    for (const auto& c : code.words()) {
        double denom = base ? base->dot(c) : static_cast<double>(c.popcount());
        double num = w.dot(c);
        if (denom == 0.0) {
            if (num != 0.0) {
                rep.valid = false;
                if (!rep.offending) rep.offending = c;
            }
            continue;
        }
        double ratio = num / denom;
        rep.worst_ratio_low = std::min(rep.worst_ratio_low, ratio);
        rep.worst_ratio_high = std::max(rep.worst_ratio_high, ratio);
        if (!(num >= (1.0 - eps) * denom && num <= (1.0 + eps) * denom)) {
            rep.valid = false;
            if (!rep.offending) rep.offending = c;
        }
    }
    return rep;
}

namespace detail {

// One subsampling round shared by both pipelines: keep T as is, try to find
// a 1/3-sample S of the remaining coordinates such that S is small and
// 3*Ham(c|S) + Ham(c|T) approximates Ham(c) within eps0 for every codeword.
// Returns the sample, or nothing after 64 attempts.
inline std::optional<std::vector<std::size_t>> find_good_sample(const BinaryCode& code,
                                                                const IndexSet& T,
                                                                double eps0, Rng& rng) {
    const std::size_t m = code.length();
    IndexSet pool = T.complement(m);
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<std::size_t> S;
        for (std::size_t i : pool)
            if (rng.bernoulli(1.0 / 3.0)) S.push_back(i);
        if (2 * S.size() > m) continue;
        bool good = true;
        for (const auto& c : code.words()) {
            const double ham = static_cast<double>(c.popcount());
            const double est = 3.0 * static_cast<double>(c.count_on(S.begin(), S.end())) +
                               static_cast<double>(c.count_on(T.begin(), T.end()));
            if (!(est >= (1.0 - eps0) * ham && est <= (1.0 + eps0) * ham)) {
                good = false;
                break;
            }
        }
        if (good) return S;
    }
    return std::nullopt;
}

// Lift a sparsifier of the punctured code back: weight 1 on T, tripled
// recursive weights on the sample.
inline WeightMap combine_levels(std::size_t m, const IndexSet& T,
                                const std::vector<std::size_t>& S, const WeightMap& sub) {
    WeightMap w(m);
    for (std::size_t i : T) w.set(i, 1.0);
    for (const auto& [k, v] : sub.entries()) w.set(S[k], 3.0 * v);
    return w;
}

inline WeightMap simple_sparsifier_impl(const BinaryCode& code, double eps, double floor, Rng& rng) {
    const std::size_t m = code.length();
    if (support(code).empty()) return WeightMap(m);
    if (m <= 36) return WeightMap::all_ones(m);

    const double eps0 = eps / (2.0 * std::log2(2.0 * static_cast<double>(m)));
    const double eps_next = eps - 2.0 * eps0;
    if (eps_next <= floor) return WeightMap::all_ones(m);

    const double d0 = 9.0 * std::log2(4.0 * static_cast<double>(code.size())) / (eps0 * eps0);
    IndexSet T = low_weight_support(code, static_cast<std::size_t>(std::min(d0, static_cast<double>(m))));

    auto S = find_good_sample(code, T, eps0, rng);
    if (!S) return WeightMap::all_ones(m);

    BinaryCode sub = puncture(code, IndexSet(*S));
    WeightMap wsub = simple_sparsifier_impl(sub, eps_next, floor, rng);
    return combine_levels(m, T, *S, wsub);
}

inline WeightMap entropy_sparsifier_impl(const BinaryCode& code, double eps, double floor, Rng& rng,
                                         std::optional<std::size_t> nrd_bound,
                                         const ExactSearchLimits& limits) {
    const std::size_t m = code.length();
    if (support(code).empty()) return WeightMap(m);
    if (m <= 800) return WeightMap::all_ones(m);

    const double eps0 = eps / (2.0 * std::log2(4.0 * static_cast<double>(m)));
    const double eps_next = eps - 2.0 * eps0;
    if (eps_next <= floor) return WeightMap::all_ones(m);

    const double lg = std::log2(4.0 * static_cast<double>(m));
    const double lambda = 400.0 * lg * lg * lg * lg * lg / (eps * eps);
    const double d0 = 2.0 * lambda * lg;

    IndexSet I = low_weight_support(code, static_cast<std::size_t>(std::min(d0, static_cast<double>(m))));

    std::size_t bands = 0;
    if (d0 < static_cast<double>(m)) {
        double r = static_cast<double>(m) / d0;
        bands = static_cast<std::size_t>(std::ceil(std::log2(r)));
    }
    for (std::size_t j = 1; j <= bands; ++j) {
        const double lo = std::ldexp(d0, static_cast<int>(j) - 1);
        const double hi = std::ldexp(d0, static_cast<int>(j));
        std::vector<BitVec> band_words;
        for (const auto& c : code.words()) {
            const double ham = static_cast<double>(c.popcount());
            if (ham > lo && ham <= hi) band_words.push_back(c);
        }
        if (band_words.empty()) continue;
        BinaryCode band(m, std::move(band_words));
        Decomposition dec = decompose(band, hi, lambda, rng.derive(), nrd_bound, limits);
        I = I.union_with(dec.I);
    }

    auto S = find_good_sample(code, I, eps0, rng);
    if (!S) return WeightMap::all_ones(m);

    BinaryCode sub = puncture(code, IndexSet(*S));
    WeightMap wsub = entropy_sparsifier_impl(sub, eps_next, floor, rng, nrd_bound, limits);
    return combine_levels(m, I, *S, wsub);
}

} // namespace detail

// Recursive halving sparsifier. The result is re-verified; on failure the
// construction is retried with derived seeds before giving up.
inline WeightMap simple_sparsifier(const BinaryCode& code, double eps, std::uint64_t seed) {
    if (!(eps > 0.0 && eps < 1.0)) throw input_error("simple_sparsifier: eps must lie in (0,1)");
    Rng master(seed);
    for (int attempt = 0; attempt < 9; ++attempt) {
        Rng rng(attempt == 0 ? seed : master.derive());
        WeightMap w = detail::simple_sparsifier_impl(code, eps, eps / 4.0, rng);
        if (verify_sparsifier(code, w, eps).valid) return w;
    }
    throw verify_error("simple_sparsifier: verification failed after retries");
}

// Entropy-driven sparsifier: low-weight support plus decomposition of each
// dyadic weight band, then the same subsample-and-recurse step.
inline WeightMap entropy_sparsifier(const BinaryCode& code, double eps, std::uint64_t seed,
                                    std::optional<std::size_t> nrd_bound = std::nullopt,
                                    const ExactSearchLimits& limits = {}) {
    if (!(eps > 0.0 && eps < 1.0)) throw input_error("entropy_sparsifier: eps must lie in (0,1)");
    Rng master(seed);
    for (int attempt = 0; attempt < 9; ++attempt) {
        Rng rng(attempt == 0 ? seed : master.derive());
        WeightMap w = detail::entropy_sparsifier_impl(code, eps, eps / 4.0, rng, nrd_bound, limits);
        if (verify_sparsifier(code, w, eps).valid) return w;
    }
    throw verify_error("entropy_sparsifier: verification failed after retries");
}

// Weighted sparsifier for weights with bounded ratio: round weights to
// integer multiplicities, replicate coordinates, sparsify the replicated
// code, and fold the result back.
inline WeightMap rep_wspr(const BinaryCode& code, const WeightMap& w, double eps, std::uint64_t seed,
                          std::optional<std::size_t> nrd_bound = std::nullopt,
                          const ExactSearchLimits& limits = {}) {
    const std::size_t m = code.length();
    if (!(eps > 0.0 && eps < 1.0)) throw input_error("rep_wspr: eps must lie in (0,1)");
    if (w.length() != m) throw input_error("rep_wspr: weight length mismatch");
    if (w.support_size() != m) throw input_error("rep_wspr: weights must be strictly positive everywhere");
    if (support(code).empty()) return WeightMap(m);
    if (eps <= 1.0 / static_cast<double>(m)) return w;

    const double minw = w.min_weight();
    const double cap_b = 2.0 * std::pow(static_cast<double>(m), 5.0);
    const double cap_total = 2.0 * std::pow(static_cast<double>(m), 6.0);

    std::vector<std::uint64_t> b(m);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double val = std::floor(2.0 * w.at(i) / (eps * minw));
        if (val > cap_b)
            throw budget_error("rep_wspr: replication count exceeds 2*m^5; weight ratio too large");
        b[i] = static_cast<std::uint64_t>(val);
        total += val;
    }
    if (total > cap_total)
        throw budget_error("rep_wspr: total replication exceeds 2*m^6");
    const std::size_t mrep = static_cast<std::size_t>(total);
    if (mrep > BinaryCode::kMaxLength)
        throw budget_error("rep_wspr: replicated length exceeds representable cap");

    std::vector<std::size_t> offset(m + 1, 0);
    for (std::size_t i = 0; i < m; ++i) offset[i + 1] = offset[i] + static_cast<std::size_t>(b[i]);

    std::vector<BitVec> rep_words;
    rep_words.reserve(code.size());
    for (const auto& c : code.words()) {
        BitVec r(mrep);
        for (std::size_t i = 0; i < m; ++i)
            if (c.get(i))
                for (std::size_t j = offset[i]; j < offset[i + 1]; ++j) r.set(j, true);
        rep_words.push_back(std::move(r));
    }
    BinaryCode rep(mrep, std::move(rep_words));

    Rng master(seed);
    for (int attempt = 0; attempt < 9; ++attempt) {
        std::uint64_t sub_seed = attempt == 0 ? seed : master.derive();
        WeightMap wrep = entropy_sparsifier(rep, eps / 2.0, sub_seed, nrd_bound, limits);
        WeightMap out(m);
        const double unit = eps * minw / 2.0;
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t j = offset[i]; j < offset[i + 1]; ++j) s += wrep.at(j);
            out.set(i, unit * s);
        }
        if (verify_sparsifier(code, out, eps, w).valid) return out;
    }
    throw verify_error("rep_wspr: verification failed after retries");
}

// General weighted sparsifier: bucket coordinates by weight scale m^3, run
// the replication sparsifier per bucket on the codewords of that scale and
// the next, and let each bucket assign its own coordinates.
inline WeightMap weighted_sparsifier(const BinaryCode& code, const WeightMap& zeta, double eps,
                                     std::uint64_t seed,
                                     std::optional<std::size_t> nrd_bound = std::nullopt,
                                     const ExactSearchLimits& limits = {}) {
    const std::size_t m = code.length();
    if (!(eps > 0.0 && eps < 1.0)) throw input_error("weighted_sparsifier: eps must lie in (0,1)");
    if (zeta.length() != m) throw input_error("weighted_sparsifier: weight length mismatch");
    if (zeta.support_size() != m)
        throw input_error("weighted_sparsifier: base weights must be strictly positive everywhere");
    if (support(code).empty()) return WeightMap(m);
    if (eps <= 2.0 / static_cast<double>(m)) return zeta;

    const double log_m3 = 3.0 * std::log(static_cast<double>(m));
    auto bucket_of = [&](std::size_t i) -> long long {
        return static_cast<long long>(std::floor(std::log(zeta.at(i)) / log_m3));
    };

    std::map<long long, std::vector<std::size_t>> coords_by_bucket;
    for (std::size_t i = 0; i < m; ++i) coords_by_bucket[bucket_of(i)].push_back(i);

    std::map<long long, std::vector<BitVec>> words_by_type;
    for (const auto& c : code.words()) {
        if (!c.any()) continue;  // the zero codeword constrains nothing
        long long t = 0;
        bool first = true;
        for (std::size_t i = 0; i < m; ++i)
            if (c.get(i)) {
                long long bi = bucket_of(i);
                t = first ? bi : std::max(t, bi);
                first = false;
            }
        words_by_type[t].push_back(c);
    }

    Rng master(seed);
    for (int attempt = 0; attempt < 9; ++attempt) {
        std::uint64_t run_seed = attempt == 0 ? seed : master.derive();
        Rng run(run_seed);
        WeightMap out(m);
        for (const auto& [t, coords] : coords_by_bucket) {
            IndexSet It(coords);
            std::vector<BitVec> bucket_words;
            if (auto it = words_by_type.find(t); it != words_by_type.end())
                bucket_words.insert(bucket_words.end(), it->second.begin(), it->second.end());
            if (auto it = words_by_type.find(t + 1); it != words_by_type.end())
                bucket_words.insert(bucket_words.end(), it->second.begin(), it->second.end());
            if (bucket_words.empty()) continue;  // coordinates of an empty scale get weight 0

            BinaryCode local = puncture(BinaryCode(m, std::move(bucket_words)), It);
            WeightMap local_zeta(It.size());
            for (std::size_t k = 0; k < It.size(); ++k) local_zeta.set(k, zeta.at(It[k]));

            WeightMap local_w = rep_wspr(local, local_zeta, eps / 2.0, run.derive(), nrd_bound, limits);
            for (const auto& [k, v] : local_w.entries()) out.set(It[k], v);
        }
        if (verify_sparsifier(code, out, eps, zeta).valid) return out;
    }
    throw verify_error("weighted_sparsifier: verification failed after retries");
}

// Adversarial weights for a chain: geometric weights along the chain, in
// chain order, and a uniform floor elsewhere. Any (w,eps)-sparsifier must
// keep the whole chain in its support.
inline WeightMap chain_adversarial_weights(const BinaryCode& code, const Chain& chain, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw input_error("chain_adversarial_weights: eps must lie in (0,1)");
    chain.validate(code);
    const std::size_t m = code.length();
    if (m == 0) throw input_error("chain_adversarial_weights: empty code length");
    const double lambda = 4.0 / (1.0 - eps);
    const std::size_t l = chain.length();
    WeightMap w(m);
    for (std::size_t i = 0; i < m; ++i) w.set(i, 1.0 / static_cast<double>(m));
    for (std::size_t k = 0; k < l; ++k)
        w.set(chain.coords[k], std::pow(lambda, static_cast<double>(l - k)));
    return w;
}

// Exact feasibility of a sparsifier supported on S: is there a nonnegative
// weight vector on S with (1-eps)<base,c> <= <w,c> <= (1+eps)<base,c> for
// all codewords? Decided by rational-arithmetic LP.
inline std::optional<std::vector<Rat>> sparsifier_on_support(
    const BinaryCode& code, const IndexSet& S, double eps,
    const std::optional<WeightMap>& base = std::nullopt) {
    if (!(eps > 0.0 && eps < 1.0)) throw input_error("sparsifier_on_support: eps must lie in (0,1)");
    S.check_bounds(code.length());
    if (base && base->length() != code.length())
        throw input_error("sparsifier_on_support: base length mismatch");

    // eps and base weights are converted to exact rationals via their binary
    // representation, so the LP decides feasibility for the exact doubles.
    const Rat reps = detail::rat_from_double(eps);
    std::vector<BandRow> rows;
    rows.reserve(code.size());
    for (const auto& c : code.words()) {
        Rat denom = 0;
        if (base) {
            for (const auto& [i, v] : base->entries())
                if (c.get(i)) denom += detail::rat_from_double(v);
        } else {
            denom = static_cast<long long>(c.popcount());
        }
        BandRow row;
        row.a.assign(S.size(), Rat(0));
        for (std::size_t k = 0; k < S.size(); ++k)
            if (c.get(S[k])) row.a[k] = 1;
        row.lo = (Rat(1) - reps) * denom;
        row.hi = (Rat(1) + reps) * denom;
        rows.push_back(std::move(row));
    }
    return band_system_solve(rows, S.size());
}

inline bool sparsifier_exists_on_support(const BinaryCode& code, const IndexSet& S, double eps,
                                         const std::optional<WeightMap>& base = std::nullopt) {
    return sparsifier_on_support(code, S, eps, base).has_value();
}

} // namespace sparsicode
