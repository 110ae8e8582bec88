// sparsicode/rational_lp.hpp
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "sparsicode/common.hpp"

namespace sparsicode {

using Rat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

namespace detail {

// Exact rational value of a finite double.
inline Rat rat_from_double(double x) {
    if (!std::isfinite(x)) throw input_error("rat_from_double: value must be finite");
    int exp = 0;
    double fr = std::frexp(x, &exp);
    auto mant = static_cast<long long>(std::ldexp(fr, 53));
    exp -= 53;
    Rat r(mant);
    if (exp >= 0) r *= Rat(BigInt(1) << exp);
    else r /= Rat(BigInt(1) << (-exp));
    return r;
}

// Dense simplex tableau. Rows 0..m-1 are constraints, row m is the reduced
// cost row; the last column is the right-hand side. Bland's rule on both the
// entering and leaving choices, so no cycling.
class SimplexTableau {
public:
    SimplexTableau(std::size_t rows, std::size_t cols)
        : m_(rows), n_(cols), t_(rows + 1, std::vector<Rat>(cols + 1, 0)), basis_(rows, 0) {}

    Rat& at(std::size_t r, std::size_t c) { return t_[r][c]; }
    Rat& rhs(std::size_t r) { return t_[r][n_]; }
    Rat& obj(std::size_t c) { return t_[m_][c]; }
    Rat& obj_rhs() { return t_[m_][n_]; }
    std::size_t& basis(std::size_t r) { return basis_[r]; }

    // Price out a basic variable whose objective coefficient is nonzero.
    void price_out(std::size_t r) {
        Rat f = t_[m_][basis_[r]];
        if (f == 0) return;
        for (std::size_t c = 0; c <= n_; ++c) t_[m_][c] -= f * t_[r][c];
    }

    void run(std::uint64_t max_pivots = 2'000'000) {
        for (std::uint64_t piv = 0;; ++piv) {
            if (piv > max_pivots) throw budget_error("simplex: pivot budget exhausted");
            std::size_t enter = n_;
            for (std::size_t c = 0; c < n_; ++c)
                if (t_[m_][c] < 0) { enter = c; break; }
            if (enter == n_) return;  // optimal

            std::size_t leave = m_;
            Rat best_ratio;
            for (std::size_t r = 0; r < m_; ++r) {
                if (t_[r][enter] <= 0) continue;
                Rat ratio = t_[r][n_] / t_[r][enter];
                if (leave == m_ || ratio < best_ratio ||
                    (ratio == best_ratio && basis_[r] < basis_[leave])) {
                    leave = r;
                    best_ratio = ratio;
                }
            }
            if (leave == m_) throw input_error("simplex: unbounded objective");
            pivot(leave, enter);
        }
    }

    Rat value_of(std::size_t var) const {
        for (std::size_t r = 0; r < m_; ++r)
            if (basis_[r] == var) return t_[r][n_];
        return 0;
    }

private:
    void pivot(std::size_t leave, std::size_t enter) {
        Rat p = t_[leave][enter];
        for (std::size_t c = 0; c <= n_; ++c) t_[leave][c] /= p;
        for (std::size_t r = 0; r <= m_; ++r) {
            if (r == leave) continue;
            Rat f = t_[r][enter];
            if (f == 0) continue;
            for (std::size_t c = 0; c <= n_; ++c) t_[r][c] -= f * t_[leave][c];
        }
        basis_[leave] = enter;
    }

    std::size_t m_, n_;
    std::vector<std::vector<Rat>> t_;
    std::vector<std::size_t> basis_;
};

} // namespace detail

struct PackingSolution {
    Rat objective;           // max 1'x
    std::vector<Rat> x;      // optimal primal, one per column
    std::vector<Rat> dual;   // optimal dual, one per row
};

// max 1'x  s.t.  Ax <= 1, x >= 0, with A nonnegative and every column
// containing a positive entry (which keeps the LP bounded).
inline PackingSolution solve_packing_lp(const std::vector<std::vector<Rat>>& A) {
    const std::size_t m = A.size();
    if (m == 0) throw input_error("solve_packing_lp: need at least one row");
    const std::size_t n = A[0].size();
    if (n == 0) throw input_error("solve_packing_lp: need at least one column");

    detail::SimplexTableau t(m, n + m);
    for (std::size_t r = 0; r < m; ++r) {
        if (A[r].size() != n) throw input_error("solve_packing_lp: ragged matrix");
        for (std::size_t c = 0; c < n; ++c) {
            if (A[r][c] < 0) throw input_error("solve_packing_lp: negative entry");
            t.at(r, c) = A[r][c];
        }
        t.at(r, n + r) = 1;
        t.rhs(r) = 1;
        t.basis(r) = n + r;
    }
    for (std::size_t c = 0; c < n; ++c) t.obj(c) = -1;
    t.run();

    PackingSolution s;
    s.objective = t.obj_rhs();
    s.x.assign(n, 0);
    for (std::size_t c = 0; c < n; ++c) s.x[c] = t.value_of(c);
    s.dual.assign(m, 0);
    for (std::size_t r = 0; r < m; ++r) s.dual[r] = t.obj(n + r);
    return s;
}

struct BandRow {
    std::vector<Rat> a;  // nonnegative coefficients
    Rat lo;
    Rat hi;
};

// Feasible point of { x >= 0 : lo_r <= a_r . x <= hi_r for every row }, with
// all coefficients nonnegative, or nullopt if the system is empty. Phase-1
// simplex: artificials on the >= halves, feasible iff they all reach zero.
// The returned point is rechecked exactly against every band before return.
inline std::optional<std::vector<Rat>> band_system_solve(const std::vector<BandRow>& rows,
                                                         std::size_t n) {
    std::vector<const BandRow*> ge;  // rows whose lower half binds
    for (const auto& r : rows) {
        if (r.a.size() != n) throw input_error("band_system_solve: ragged row");
        for (const auto& v : r.a)
            if (v < 0) throw input_error("band_system_solve: negative coefficient");
        if (r.hi < 0) return std::nullopt;   // a.x >= 0 always
        if (r.lo > r.hi) return std::nullopt;
        if (r.lo > 0) ge.push_back(&r);
    }
    if (n == 0) {
        // Only x = (empty); every row needs lo <= 0 <= hi.
        if (!ge.empty()) return std::nullopt;
        return std::vector<Rat>{};
    }

    const std::size_t mu = rows.size();      // upper halves, slack each
    const std::size_t mg = ge.size();        // lower halves, surplus + artificial
    const std::size_t m = mu + mg;
    const std::size_t cols = n + mu + mg + mg;
    detail::SimplexTableau t(m, cols);

    for (std::size_t r = 0; r < mu; ++r) {
        for (std::size_t c = 0; c < n; ++c) t.at(r, c) = rows[r].a[c];
        t.at(r, n + r) = 1;                  // slack
        t.rhs(r) = rows[r].hi;
        t.basis(r) = n + r;
    }
    for (std::size_t g = 0; g < mg; ++g) {
        std::size_t r = mu + g;
        for (std::size_t c = 0; c < n; ++c) t.at(r, c) = ge[g]->a[c];
        t.at(r, n + mu + g) = -1;            // surplus
        t.at(r, n + mu + mg + g) = 1;        // artificial
        t.rhs(r) = ge[g]->lo;
        t.basis(r) = n + mu + mg + g;
    }
    // Minimize the artificial sum: objective row +1 on artificials, then
    // price out the artificial basis.
    for (std::size_t g = 0; g < mg; ++g) t.obj(n + mu + mg + g) = 1;
    for (std::size_t r = 0; r < m; ++r) t.price_out(r);
    t.run();

    for (std::size_t g = 0; g < mg; ++g)
        if (t.value_of(n + mu + mg + g) > 0) return std::nullopt;

    std::vector<Rat> x(n);
    for (std::size_t c = 0; c < n; ++c) x[c] = t.value_of(c);
    for (const auto& r : rows) {
        Rat v = 0;
        for (std::size_t c = 0; c < n; ++c) v += r.a[c] * x[c];
        if (v < r.lo || v > r.hi)
            throw std::logic_error("band_system_solve: point fails recheck");
    }
    return x;
}

inline bool band_system_feasible(const std::vector<BandRow>& rows, std::size_t n) {
    return band_system_solve(rows, n).has_value();
}

} // namespace sparsicode
