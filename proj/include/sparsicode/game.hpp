// sparsicode/game.hpp
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "sparsicode/code.hpp"
#include "sparsicode/rational_lp.hpp"

namespace sparsicode {

// Coordinate-vs-codeword game: the coordinate player receives payoff c_i.
// value = min over codeword mixtures P of max_i E_{c~P}[c_i]
//       = max over coordinate mixtures Q of min_c sum_{i in supp(c)} Q_i.
struct GameSolution {
    Rat value;
    std::vector<Rat> codeword_dist;   // over code.words(), sums to 1
    std::vector<Rat> coord_dist;      // over [m], sums to 1
    bool exact = true;
    double gap = 0.0;                 // certified duality gap when not exact
};

// Exact solve: shift payoffs by +1 so the value is positive, then the packing
// LP  max 1'q  s.t.  sum_c q_c (c_i + 1) <= 1  has optimum 1/(value+1); the
// normalized primal is the codeword mixture and the normalized dual the
// coordinate mixture.
inline GameSolution solve_game_exact(const BinaryCode& code) {
    const std::size_t m = code.length();
    const std::size_t n = code.size();
    if (m == 0 || n == 0) throw input_error("solve_game_exact: need m >= 1 and a nonempty code");

    std::vector<std::vector<Rat>> A(m, std::vector<Rat>(n, 0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            A[i][j] = code.word(j).get(i) ? 2 : 1;
    PackingSolution lp = solve_packing_lp(A);
    if (lp.objective <= 0) throw verify_error("solve_game_exact: degenerate LP optimum");

    GameSolution g;
    g.value = 1 / lp.objective - 1;
    g.codeword_dist.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) g.codeword_dist[j] = lp.x[j] / lp.objective;
    Rat dual_sum = 0;
    for (const auto& y : lp.dual) dual_sum += y;
    if (dual_sum <= 0) throw verify_error("solve_game_exact: degenerate dual");
    g.coord_dist.assign(m, 0);
    for (std::size_t i = 0; i < m; ++i) g.coord_dist[i] = lp.dual[i] / dual_sum;
    return g;
}

// Multiplicative-weights approximation for instances too large for the exact
// LP. The coordinate player runs Hedge; the codeword player best-responds.
// Bounds come from the averaged strategies, so they are certificates:
//   lower = min_c <Qbar, c>,  upper = max_i <Pbar, e_i>.
inline GameSolution solve_game_approx(const BinaryCode& code, double target_gap,
                                      std::uint64_t max_iters = 2'000'000) {
    const std::size_t m = code.length();
    const std::size_t n = code.size();
    if (m == 0 || n == 0) throw input_error("solve_game_approx: need m >= 1 and a nonempty code");

    std::vector<double> logw(m, 0.0);
    std::vector<double> qbar(m, 0.0);
    std::vector<double> resp_freq(n, 0.0);
    std::vector<double> q(m);

    for (std::uint64_t t = 1; t <= max_iters; ++t) {
        double mx = logw[0];
        for (double v : logw) mx = std::max(mx, v);
        double tot = 0.0;
        for (std::size_t i = 0; i < m; ++i) { q[i] = std::exp(logw[i] - mx); tot += q[i]; }
        for (std::size_t i = 0; i < m; ++i) q[i] /= tot;

        std::size_t best_j = 0;
        double best_pay = 1e300;
        for (std::size_t j = 0; j < n; ++j) {
            double pay = 0.0;
            const BitVec& c = code.word(j);
            for (std::size_t i = 0; i < m; ++i)
                if (c.get(i)) pay += q[i];
            if (pay < best_pay) { best_pay = pay; best_j = j; }
        }

        for (std::size_t i = 0; i < m; ++i) qbar[i] += q[i];
        resp_freq[best_j] += 1.0;

        double step = std::sqrt(std::log(std::max<double>(m, 2)) / static_cast<double>(t));
        const BitVec& c = code.word(best_j);
        for (std::size_t i = 0; i < m; ++i)
            if (c.get(i)) logw[i] += step;

        if (t % 128 == 0 || t == max_iters) {
            double lower = 1e300;
            for (std::size_t j = 0; j < n; ++j) {
                double pay = 0.0;
                const BitVec& cw = code.word(j);
                for (std::size_t i = 0; i < m; ++i)
                    if (cw.get(i)) pay += qbar[i] / static_cast<double>(t);
                lower = std::min(lower, pay);
            }
            std::vector<double> marg(m, 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                if (resp_freq[j] == 0.0) continue;
                const BitVec& cw = code.word(j);
                for (std::size_t i = 0; i < m; ++i)
                    if (cw.get(i)) marg[i] += resp_freq[j] / static_cast<double>(t);
            }
            double upper = 0.0;
            for (double v : marg) upper = std::max(upper, v);

            if (upper - lower <= target_gap) {
                GameSolution g;
                g.exact = false;
                g.gap = upper - lower;
                g.value = Rat(lower);
                g.codeword_dist.assign(n, 0);
                for (std::size_t j = 0; j < n; ++j)
                    g.codeword_dist[j] = Rat(resp_freq[j] / static_cast<double>(t));
                g.coord_dist.assign(m, 0);
                for (std::size_t i = 0; i < m; ++i)
                    g.coord_dist[i] = Rat(qbar[i] / static_cast<double>(t));
                return g;
            }
        }
    }
    throw budget_error("solve_game_approx: duality gap did not reach target within iteration budget");
}

inline constexpr std::size_t kExactGameCellLimit = 1'000'000;

inline GameSolution solve_game(const BinaryCode& code, double target_gap = 1e-6) {
    if (code.size() * code.length() <= kExactGameCellLimit)
        return solve_game_exact(code);
    return solve_game_approx(code, target_gap);
}

} // namespace sparsicode
