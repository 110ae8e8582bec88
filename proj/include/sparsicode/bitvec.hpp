// sparsicode/bitvec.hpp
#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sparsicode/common.hpp"

namespace sparsicode {

// Fixed-length bit vector packed into 64-bit words. Coordinate 0 is the least
// significant bit of word 0 and the leftmost character in string form.
class BitVec {
public:
    BitVec() = default;

    explicit BitVec(std::size_t length)
        : len_(length), w_((length + 63) / 64, 0) {}

    static BitVec from_string(const std::string& s) {
        BitVec v(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '1') v.set(i, true);
            else if (s[i] != '0') throw input_error("BitVec: expected '0'/'1', got '" + std::string(1, s[i]) + "'");
        }
        return v;
    }

    std::size_t length() const { return len_; }

    bool get(std::size_t i) const {
        return (w_[i >> 6] >> (i & 63)) & 1u;
    }

    void set(std::size_t i, bool b) {
        if (b) w_[i >> 6] |= (std::uint64_t{1} << (i & 63));
        else   w_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
    }

    std::size_t popcount() const {
        std::size_t n = 0;
        for (std::uint64_t w : w_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    bool any() const {
        for (std::uint64_t w : w_) if (w) return true;
        return false;
    }

    BitVec operator|(const BitVec& o) const {
        BitVec r(len_);
        for (std::size_t k = 0; k < w_.size(); ++k) r.w_[k] = w_[k] | o.w_[k];
        return r;
    }

    BitVec operator&(const BitVec& o) const {
        BitVec r(len_);
        for (std::size_t k = 0; k < w_.size(); ++k) r.w_[k] = w_[k] & o.w_[k];
        return r;
    }

    bool operator==(const BitVec& o) const { return len_ == o.len_ && w_ == o.w_; }

    // Lexicographic by coordinate 0 first; a set bit beats a clear bit at the
    // first differing coordinate.
    bool operator<(const BitVec& o) const {
        for (std::size_t k = 0; k < w_.size(); ++k) {
            std::uint64_t x = w_[k] ^ o.w_[k];
            if (x) {
                std::size_t bit = static_cast<std::size_t>(std::countr_zero(x));
                return !((w_[k] >> bit) & 1u);
            }
        }
        return false;
    }

    std::string to_string() const {
        std::string s(len_, '0');
        for (std::size_t i = 0; i < len_; ++i) if (get(i)) s[i] = '1';
        return s;
    }

    const std::vector<std::uint64_t>& words() const { return w_; }

    // Number of set coordinates shared with a sorted coordinate list.
    template <typename It>
    std::size_t count_on(It first, It last) const {
        std::size_t n = 0;
        for (It it = first; it != last; ++it) n += get(*it) ? 1 : 0;
        return n;
    }

private:
    std::size_t len_ = 0;
    std::vector<std::uint64_t> w_;
};

struct BitVecHash {
    std::size_t operator()(const BitVec& v) const {
        std::uint64_t h = 1469598103934665603ull;
        for (std::uint64_t w : v.words()) {
            h ^= w;
            h *= 1099511628211ull;
        }
        h ^= v.length();
        h *= 1099511628211ull;
        return static_cast<std::size_t>(h);
    }
};

// Dynamic bitset over an index universe (codeword indices, assignment
// indices). Only the operations the searches need.
class IdxSet {
public:
    IdxSet() = default;
    explicit IdxSet(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

    static IdxSet all(std::size_t n) {
        IdxSet s(n);
        for (auto& w : s.w_) w = ~std::uint64_t{0};
        if (n % 64) s.w_.back() &= (std::uint64_t{1} << (n % 64)) - 1;
        return s;
    }

    std::size_t universe() const { return n_; }
    bool get(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i) { w_[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
    void clear(std::size_t i) { w_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

    void and_with(const IdxSet& o) {
        for (std::size_t k = 0; k < w_.size(); ++k) w_[k] &= o.w_[k];
    }

    void and_not_with(const IdxSet& o) {
        for (std::size_t k = 0; k < w_.size(); ++k) w_[k] &= ~o.w_[k];
    }

    bool intersects(const IdxSet& o) const {
        for (std::size_t k = 0; k < w_.size(); ++k) if (w_[k] & o.w_[k]) return true;
        return false;
    }

    bool any() const {
        for (std::uint64_t w : w_) if (w) return true;
        return false;
    }

    std::size_t count() const {
        std::size_t n = 0;
        for (std::uint64_t w : w_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    // Lowest set index; universe() if empty.
    std::size_t first() const {
        for (std::size_t k = 0; k < w_.size(); ++k)
            if (w_[k]) return k * 64 + static_cast<std::size_t>(std::countr_zero(w_[k]));
        return n_;
    }

    bool operator==(const IdxSet& o) const { return n_ == o.n_ && w_ == o.w_; }

    const std::vector<std::uint64_t>& words() const { return w_; }

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

struct IdxSetHash {
    std::size_t operator()(const IdxSet& s) const {
        std::uint64_t h = 1469598103934665603ull;
        for (std::uint64_t w : s.words()) {
            h ^= w;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

} // namespace sparsicode
