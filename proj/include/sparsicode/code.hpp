// sparsicode/code.hpp
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "sparsicode/bitvec.hpp"
#include "sparsicode/common.hpp"

namespace sparsicode {

// Strictly increasing coordinate list.
class IndexSet {
public:
    IndexSet() = default;

    explicit IndexSet(std::vector<std::size_t> v) : v_(std::move(v)) {
        std::sort(v_.begin(), v_.end());
        v_.erase(std::unique(v_.begin(), v_.end()), v_.end());
    }

    static IndexSet from_bits(const BitVec& b) {
        std::vector<std::size_t> v;
        for (std::size_t i = 0; i < b.length(); ++i)
            if (b.get(i)) v.push_back(i);
        return IndexSet(std::move(v));
    }

    std::size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }

    bool contains(std::size_t i) const {
        return std::binary_search(v_.begin(), v_.end(), i);
    }

    std::size_t operator[](std::size_t k) const { return v_[k]; }

    auto begin() const { return v_.begin(); }
    auto end() const { return v_.end(); }
    const std::vector<std::size_t>& indices() const { return v_; }

    bool operator==(const IndexSet& o) const { return v_ == o.v_; }

    IndexSet union_with(const IndexSet& o) const {
        std::vector<std::size_t> v;
        std::set_union(v_.begin(), v_.end(), o.v_.begin(), o.v_.end(), std::back_inserter(v));
        return IndexSet(std::move(v));
    }

    // Sorted complement within [0, m).
    IndexSet complement(std::size_t m) const {
        std::vector<std::size_t> v;
        std::size_t k = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (k < v_.size() && v_[k] == i) { ++k; continue; }
            v.push_back(i);
        }
        return IndexSet(std::move(v));
    }

    void check_bounds(std::size_t m) const {
        if (!v_.empty() && v_.back() >= m)
            throw input_error("IndexSet: coordinate " + std::to_string(v_.back()) +
                              " out of range for length " + std::to_string(m));
    }

private:
    std::vector<std::size_t> v_;
};

// Set of distinct codewords of one length. Immutable; words are kept sorted.
class BinaryCode {
public:
    static constexpr std::size_t kMaxLength = std::size_t{1} << 20;

    explicit BinaryCode(std::size_t length) : m_(length) { check_len(); }

    BinaryCode(std::size_t length, std::vector<BitVec> words) : m_(length) {
        check_len();
        for (const auto& w : words)
            if (w.length() != m_)
                throw input_error("BinaryCode: codeword length mismatch");
        std::sort(words.begin(), words.end());
        words.erase(std::unique(words.begin(), words.end()), words.end());
        words_ = std::move(words);
    }

    static BinaryCode from_strings(std::size_t length, const std::vector<std::string>& ss) {
        std::vector<BitVec> ws;
        ws.reserve(ss.size());
        for (const auto& s : ss) ws.push_back(BitVec::from_string(s));
        return BinaryCode(length, std::move(ws));
    }

    static BinaryCode from_strings(const std::vector<std::string>& ss) {
        if (ss.empty()) throw input_error("BinaryCode::from_strings: need explicit length for empty code");
        return from_strings(ss.front().size(), ss);
    }

    std::size_t length() const { return m_; }
    std::size_t size() const { return words_.size(); }
    bool empty() const { return words_.empty(); }
    const std::vector<BitVec>& words() const { return words_; }
    const BitVec& word(std::size_t j) const { return words_[j]; }

    bool contains(const BitVec& c) const {
        return std::binary_search(words_.begin(), words_.end(), c);
    }

private:
    void check_len() const {
        if (m_ > kMaxLength)
            throw input_error("BinaryCode: length exceeds " + std::to_string(kMaxLength));
    }

    std::size_t m_ = 0;
    std::vector<BitVec> words_;
};

// Chain witness: coordinates a(1..l) and codewords c(1..l) with
// c(i)_{a(i)} = 1 and c(j)_{a(i)} = 0 whenever i < j.
struct Chain {
    std::vector<std::size_t> coords;
    std::vector<BitVec> words;

    std::size_t length() const { return coords.size(); }

    void validate(const BinaryCode& code) const {
        if (coords.size() != words.size())
            throw input_error("Chain: coords/words size mismatch");
        std::set<std::size_t> seen;
        for (std::size_t i = 0; i < coords.size(); ++i) {
            if (coords[i] >= code.length())
                throw input_error("Chain: coordinate out of range");
            if (!seen.insert(coords[i]).second)
                throw input_error("Chain: repeated coordinate");
            if (!code.contains(words[i]))
                throw input_error("Chain: codeword not in code");
            if (!words[i].get(coords[i]))
                throw input_error("Chain: c(i) must be 1 at a(i)");
            for (std::size_t j = i + 1; j < coords.size(); ++j)
                if (words[j].get(coords[i]))
                    throw input_error("Chain: c(j) must vanish at a(i) for i<j");
        }
    }
};

// Non-redundancy witness: for each index i in the set, a codeword that is 1
// at i and 0 at every other index of the set.
struct NonRedundancyWitness {
    IndexSet indices;
    std::vector<BitVec> words;

    void validate(const BinaryCode& code) const {
        indices.check_bounds(code.length());
        if (indices.size() != words.size())
            throw input_error("NonRedundancyWitness: indices/words size mismatch");
        for (std::size_t k = 0; k < indices.size(); ++k) {
            if (!code.contains(words[k]))
                throw input_error("NonRedundancyWitness: codeword not in code");
            if (!words[k].get(indices[k]))
                throw input_error("NonRedundancyWitness: witness must be 1 at its index");
            for (std::size_t k2 = 0; k2 < indices.size(); ++k2)
                if (k2 != k && words[k].get(indices[k2]))
                    throw input_error("NonRedundancyWitness: witness must vanish on the rest of the set");
        }
    }
};

inline BinaryCode puncture(const BinaryCode& code, const IndexSet& keep) {
    keep.check_bounds(code.length());
    std::set<BitVec> out;
    for (const auto& c : code.words()) {
        BitVec r(keep.size());
        for (std::size_t k = 0; k < keep.size(); ++k) r.set(k, c.get(keep[k]));
        out.insert(std::move(r));
    }
    return BinaryCode(keep.size(), std::vector<BitVec>(out.begin(), out.end()));
}

inline IndexSet support(const BinaryCode& code) {
    BitVec acc(code.length());
    for (const auto& c : code.words()) acc = acc | c;
    return IndexSet::from_bits(acc);
}

// Support of the subcode of Hamming weight <= d.
inline IndexSet low_weight_support(const BinaryCode& code, std::size_t d) {
    BitVec acc(code.length());
    for (const auto& c : code.words())
        if (c.popcount() <= d) acc = acc | c;
    return IndexSet::from_bits(acc);
}

inline std::optional<NonRedundancyWitness> is_nonredundant_set(const BinaryCode& code,
                                                               const IndexSet& I) {
    I.check_bounds(code.length());
    NonRedundancyWitness w;
    w.indices = I;
    for (std::size_t k = 0; k < I.size(); ++k) {
        const BitVec* found = nullptr;
        for (const auto& c : code.words()) {
            if (!c.get(I[k])) continue;
            bool ok = true;
            for (std::size_t k2 = 0; k2 < I.size() && ok; ++k2)
                if (k2 != k && c.get(I[k2])) ok = false;
            if (ok) { found = &c; break; }
        }
        if (!found) return std::nullopt;
        w.words.push_back(*found);
    }
    w.validate(code);
    return w;
}

// Inclusion-minimal subset of the support hitting every nonzero codeword.
// Minimality makes the result a non-redundant set.
inline IndexSet minimal_hitting_set(const BinaryCode& code) {
    IndexSet supp = support(code);
    std::vector<std::size_t> cnt(code.size(), 0);
    for (std::size_t j = 0; j < code.size(); ++j)
        cnt[j] = code.word(j).count_on(supp.begin(), supp.end());

    std::vector<bool> kept(supp.size(), true);
    for (std::size_t k = 0; k < supp.size(); ++k) {
        bool removable = true;
        for (std::size_t j = 0; j < code.size() && removable; ++j) {
            if (cnt[j] == 0) continue;  // zero codeword, nothing to hit
            if (code.word(j).get(supp[k]) && cnt[j] == 1) removable = false;
        }
        if (removable) {
            kept[k] = false;
            for (std::size_t j = 0; j < code.size(); ++j)
                if (code.word(j).get(supp[k])) --cnt[j];
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < supp.size(); ++k)
        if (kept[k]) out.push_back(supp[k]);
    IndexSet result(std::move(out));
    if (!is_nonredundant_set(code, result))
        throw verify_error("minimal_hitting_set: result failed non-redundancy check");
    return result;
}

namespace detail {

// Shared search cores. Elements k come with a set ones[k] over a finite
// universe of points; zeros[k] is its complement.
//
// A set S is "distinguished" when every k in S owns a point lying in ones[k]
// and in zeros[k'] for all other members k'. This is code non-redundancy
// (points = codewords) and CSP non-redundancy (points = assignments) alike.
//
// A "compatible chain" is a sequence k_1, k_2, ... where each k_i owns a
// point in ones[k_i] intersected with zeros of all earlier elements. This is
// the chain structure of codes and, shifted by one, of CSPs.

struct SelectionResult {
    std::vector<std::size_t> chosen;        // increasing element indices
    std::vector<std::size_t> witness_idx;   // universe point per chosen element
};

inline SelectionResult max_distinguished_set(const std::vector<IdxSet>& ones,
                                             std::size_t universe, Budget& budget,
                                             const char* op) {
    const std::size_t k = ones.size();
    std::vector<IdxSet> zeros;
    zeros.reserve(k);
    for (const auto& on : ones) {
        IdxSet z = IdxSet::all(universe);
        z.and_not_with(on);
        zeros.push_back(std::move(z));
    }

    std::vector<std::size_t> bestI, bestW;

    // Greedy maximal extension in index order seeds the bound.
    {
        std::vector<IdxSet> W;
        IdxSet Z = IdxSet::all(universe);
        for (std::size_t idx = 0; idx < k; ++idx) {
            IdxSet Wc = ones[idx];
            Wc.and_with(Z);
            if (!Wc.any()) continue;
            bool ok = true;
            for (const auto& w : W)
                if (!w.intersects(zeros[idx])) { ok = false; break; }
            if (!ok) continue;
            for (auto& w : W) w.and_with(zeros[idx]);
            W.push_back(std::move(Wc));
            Z.and_with(zeros[idx]);
            bestI.push_back(idx);
        }
        for (const auto& w : W) bestW.push_back(w.first());
    }

    std::vector<std::size_t> curI;
    std::vector<IdxSet> curW;
    IdxSet curZ = IdxSet::all(universe);

    auto dfs = [&](auto&& self, std::size_t start) -> void {
        for (std::size_t idx = start; idx < k; ++idx) {
            if (curI.size() + (k - idx) <= bestI.size()) return;
            budget.tick(op);
            // Infeasibility is monotone along a branch: witness sets only
            // shrink, so a failed element can be skipped, not postponed.
            IdxSet Wc = ones[idx];
            Wc.and_with(curZ);
            if (!Wc.any()) continue;
            bool ok = true;
            for (const auto& w : curW)
                if (!w.intersects(zeros[idx])) { ok = false; break; }
            if (!ok) continue;

            std::vector<IdxSet> savedW = curW;
            IdxSet savedZ = curZ;
            for (auto& w : curW) w.and_with(zeros[idx]);
            curW.push_back(std::move(Wc));
            curZ.and_with(zeros[idx]);
            curI.push_back(idx);

            if (curI.size() > bestI.size()) {
                bestI = curI;
                bestW.clear();
                for (const auto& w : curW) bestW.push_back(w.first());
            }
            self(self, idx + 1);

            curI.pop_back();
            curW = std::move(savedW);
            curZ = std::move(savedZ);
        }
    };
    dfs(dfs, 0);

    return SelectionResult{std::move(bestI), std::move(bestW)};
}

struct ChainSearchResult {
    std::vector<std::size_t> elems;         // in chain order
    std::vector<std::size_t> witness_idx;   // universe point per element
};

// The best extension depends only on the set of points compatible with all
// earlier elements, so the DFS memoizes on that set.
inline ChainSearchResult max_compatible_chain(const std::vector<IdxSet>& ones,
                                              std::size_t universe, Budget& budget,
                                              const char* op) {
    const std::size_t k = ones.size();
    std::vector<IdxSet> zeros;
    zeros.reserve(k);
    for (const auto& on : ones) {
        IdxSet z = IdxSet::all(universe);
        z.and_not_with(on);
        zeros.push_back(std::move(z));
    }

    std::unordered_map<IdxSet, std::size_t, IdxSetHash> memo;
    auto solve = [&](auto&& self, const IdxSet& Z) -> std::size_t {
        auto it = memo.find(Z);
        if (it != memo.end()) return it->second;
        std::size_t best = 0;
        for (std::size_t idx = 0; idx < k; ++idx) {
            budget.tick(op);
            IdxSet F = ones[idx];
            F.and_with(Z);
            if (!F.any()) continue;
            IdxSet Z2 = Z;
            Z2.and_with(zeros[idx]);
            best = std::max(best, 1 + self(self, Z2));
        }
        memo.emplace(Z, best);
        return best;
    };

    IdxSet Z = IdxSet::all(universe);
    std::size_t total = solve(solve, Z);

    ChainSearchResult r;
    for (std::size_t remaining = total; remaining > 0;) {
        for (std::size_t idx = 0; idx < k; ++idx) {
            IdxSet F = ones[idx];
            F.and_with(Z);
            if (!F.any()) continue;
            IdxSet Z2 = Z;
            Z2.and_with(zeros[idx]);
            if (1 + memo.at(Z2) == remaining) {
                r.elems.push_back(idx);
                r.witness_idx.push_back(F.first());
                Z = Z2;
                --remaining;
                break;
            }
        }
    }
    return r;
}

struct CoordSets {
    std::vector<std::size_t> coords;   // support coordinates, increasing
    std::vector<IdxSet> ones;          // codewords with a 1 at coords[k]
};

inline CoordSets coord_sets(const BinaryCode& code, std::size_t coord_cap, const char* op) {
    CoordSets cs;
    cs.coords = support(code).indices();
    if (cs.coords.size() > coord_cap)
        throw budget_error(std::string(op) + ": support size " + std::to_string(cs.coords.size()) +
                           " exceeds exact-search cap " + std::to_string(coord_cap));
    cs.ones.reserve(cs.coords.size());
    for (std::size_t c : cs.coords) {
        IdxSet on(code.size());
        for (std::size_t j = 0; j < code.size(); ++j)
            if (code.word(j).get(c)) on.set(j);
        cs.ones.push_back(std::move(on));
    }
    return cs;
}

} // namespace detail

struct NrdResult {
    std::size_t value = 0;
    NonRedundancyWitness witness;
};

// Exact largest non-redundant coordinate set, with a witness codeword per
// chosen coordinate.
inline NrdResult nrd_exact(const BinaryCode& code, const ExactSearchLimits& limits = {}) {
    auto cs = detail::coord_sets(code, limits.coord_cap, "nrd_exact");
    NrdResult r;
    if (cs.coords.empty()) {
        r.witness.validate(code);
        return r;
    }
    Budget budget(limits.node_budget);
    auto sel = detail::max_distinguished_set(cs.ones, code.size(), budget, "nrd_exact");
    r.value = sel.chosen.size();
    std::vector<std::size_t> coords;
    for (std::size_t idx : sel.chosen) coords.push_back(cs.coords[idx]);
    r.witness.indices = IndexSet(std::move(coords));
    for (std::size_t j : sel.witness_idx) r.witness.words.push_back(code.word(j));
    r.witness.validate(code);
    return r;
}

struct ClResult {
    std::size_t value = 0;
    Chain witness;
};

// Exact chain length with a witness chain.
inline ClResult chain_length_exact(const BinaryCode& code, const ExactSearchLimits& limits = {}) {
    auto cs = detail::coord_sets(code, limits.coord_cap, "chain_length_exact");
    ClResult r;
    if (cs.coords.empty()) {
        r.witness.validate(code);
        return r;
    }
    Budget budget(limits.node_budget);
    auto chain = detail::max_compatible_chain(cs.ones, code.size(), budget, "chain_length_exact");
    r.value = chain.elems.size();
    for (std::size_t t = 0; t < chain.elems.size(); ++t) {
        r.witness.coords.push_back(cs.coords[chain.elems[t]]);
        r.witness.words.push_back(code.word(chain.witness_idx[t]));
    }
    r.witness.validate(code);
    return r;
}

// Closure of the code under coordinatewise OR, including the empty OR 0^m.
inline BinaryCode or_closure(const BinaryCode& code, std::size_t max_words = std::size_t{1} << 20) {
    std::set<BitVec> closure;
    closure.insert(BitVec(code.length()));
    for (const auto& c : code.words()) {
        std::vector<BitVec> add;
        for (const auto& s : closure) {
            BitVec t = s | c;
            if (!closure.count(t)) add.push_back(std::move(t));
        }
        for (auto& t : add) closure.insert(std::move(t));
        if (closure.size() > max_words)
            throw budget_error("or_closure: closure exceeds " + std::to_string(max_words) + " words");
    }
    return BinaryCode(code.length(), std::vector<BitVec>(closure.begin(), closure.end()));
}

// Exact VC dimension of the codeword set as a set system over coordinates.
inline std::size_t vc_dimension(const BinaryCode& code, const ExactSearchLimits& limits = {}) {
    if (code.size() <= 1) return 0;
    // Only coordinates taking both values can participate in a shattered set.
    std::vector<std::size_t> cands;
    for (std::size_t i = 0; i < code.length(); ++i) {
        bool has0 = false, has1 = false;
        for (const auto& c : code.words()) (c.get(i) ? has1 : has0) = true;
        if (has0 && has1) cands.push_back(i);
    }
    if (cands.size() > limits.coord_cap)
        throw budget_error("vc_dimension: candidate coordinate count " + std::to_string(cands.size()) +
                           " exceeds exact-search cap " + std::to_string(limits.coord_cap));
    Budget budget(limits.node_budget);

    std::size_t log2cap = 0;
    while ((std::size_t{1} << (log2cap + 1)) <= code.size()) ++log2cap;

    std::size_t best = 0;
    std::vector<std::size_t> I;
    auto shattered = [&]() -> bool {
        budget.tick("vc_dimension");
        const std::size_t kk = I.size();
        std::vector<bool> seen(std::size_t{1} << kk, false);
        std::size_t found = 0;
        for (const auto& c : code.words()) {
            std::size_t pat = 0;
            for (std::size_t b = 0; b < kk; ++b)
                if (c.get(I[b])) pat |= std::size_t{1} << b;
            if (!seen[pat]) {
                seen[pat] = true;
                if (++found == (std::size_t{1} << kk)) return true;
            }
        }
        return false;
    };
    auto dfs = [&](auto&& self, std::size_t start) -> void {
        for (std::size_t idx = start; idx < cands.size(); ++idx) {
            if (I.size() + (cands.size() - idx) <= best) return;
            if (I.size() + 1 > log2cap) return;
            I.push_back(cands[idx]);
            if (shattered()) {
                best = std::max(best, I.size());
                self(self, idx + 1);
            }
            I.pop_back();
        }
    };
    dfs(dfs, 0);
    return best;
}

} // namespace sparsicode
