// tests/test_entropy.cpp
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sparsicode/entropy.hpp"

#include "support/fixtures.hpp"
#include "support/gen.hpp"

using namespace sparsicode;

TEST_CASE("binary entropy basics") {
    REQUIRE(binary_entropy(0.5) == Catch::Approx(1.0));
    REQUIRE(binary_entropy(0.0) == 0.0);
    REQUIRE(binary_entropy(1.0) == 0.0);
    REQUIRE(binary_entropy(0.1) == Catch::Approx(binary_entropy(0.9)));
}

TEST_CASE("distribution validation") {
    CodeDistribution d;
    d.length = 2;
    d.atoms[BitVec::from_string("10")] = 0.5;
    REQUIRE_THROWS_AS(d.validate(), input_error);
    d.atoms[BitVec::from_string("01")] = 0.5;
    REQUIRE_NOTHROW(d.validate());
    REQUIRE(d.marginal(0) == Catch::Approx(0.5));

    CoordinateDistribution q;
    q.atoms[5] = 1.0;
    REQUIRE_THROWS_AS(q.validate(3), input_error);
    REQUIRE_NOTHROW(q.validate(6));
}

TEST_CASE("or power of a point mass is a point mass") {
    CodeDistribution d;
    d.length = 4;
    d.atoms[BitVec::from_string("0110")] = 1.0;
    auto p = or_power_distribution(d, 8);
    REQUIRE(p.atoms.size() == 1);
    REQUIRE(p.atoms.count(BitVec::from_string("0110")) == 1);
}

TEST_CASE("or power composes multiplicatively") {
    Rng rng(11);
    auto d = testgen::random_eligible_distribution(rng, 5, 4);
    auto twice = or_power_distribution(or_power_distribution(d, 2), 2);
    auto four = or_power_distribution(d, 4);
    REQUIRE(twice.atoms.size() == four.atoms.size());
    for (const auto& [c, p] : four.atoms)
        REQUIRE(twice.atoms.at(c) == Catch::Approx(p).margin(1e-12));
}

TEST_CASE("or power of a bernoulli product stays a bernoulli product") {
    auto d = testgen::bernoulli_product(4, 0.1);
    auto p = or_power_distribution(d, 2);
    const double q = 1.0 - 0.9 * 0.9;
    for (const auto& [c, prob] : p.atoms) {
        const auto k = static_cast<double>(c.popcount());
        REQUIRE(prob ==
                Catch::Approx(std::pow(q, k) * std::pow(1.0 - q, 4.0 - k)).margin(1e-12));
    }
}

TEST_CASE("amplification bound holds on random eligible distributions") {
    Rng rng(2718);
    for (int round = 0; round < 200; ++round) {
        const std::uint64_t N = (round % 2) ? 2 : 4;
        const std::size_t m = 2 + rng.below(5);
        auto d = testgen::random_eligible_distribution(rng, m, N);
        auto r = check_sawin_bound(d, N);
        INFO("round " << round << " p=" << r.p);
        REQUIRE(r.holds);
    }
}

TEST_CASE("amplification bound is tight on bernoulli products") {
    for (std::uint64_t N : {2ull, 4ull}) {
        auto d = testgen::bernoulli_product(4, 0.1);
        auto r = check_sawin_bound(d, N);
        REQUIRE(r.holds);
        REQUIRE(std::abs(r.lhs - r.rhs) <= 1e-9);
    }
}

TEST_CASE("amplification precondition is enforced") {
    // marginal far above the eligibility cap for N = 4
    auto d = testgen::bernoulli_product(3, 0.5);
    REQUIRE_THROWS_AS(check_sawin_bound(d, 4), input_error);
    auto ok = testgen::bernoulli_product(3, 0.1);
    REQUIRE_THROWS_AS(check_sawin_bound(ok, 3), input_error);   // odd N
}

TEST_CASE("entropy ceiling formula") {
    REQUIRE(code_entropy_bound(0, 10, 2.0) == 0.0);
    REQUIRE(code_entropy_bound(2, 7, 2.0) ==
            Catch::Approx((3.0 * std::log2(6.0) / 2.0) * 2.0 * 3.0));
    REQUIRE_THROWS_AS(code_entropy_bound(1, 4, 0.5), input_error);
}

TEST_CASE("decompose case one returns the code untouched") {
    auto code = fixtures::tri();
    // nrd = 2, so d >= lambda * nrd picks case 1
    auto dec = decompose(code, 8.0, 2.0, 42);
    REQUIRE(dec.case_used == 1);
    REQUIRE(dec.I.empty());
    REQUIRE(dec.residual.size() == code.size());
    REQUIRE(dec.nrd_used == 2);
}

TEST_CASE("decompose case two absorbs every coordinate") {
    auto code = fixtures::staircase(8);
    // nrd = 1; m = 8 <= 2*lambda*log2(32) needs lambda >= 0.8 -> use 2
    auto dec = decompose(code, 1.0, 2.0, 42);
    REQUIRE(dec.case_used == 2);
    REQUIRE(dec.I.size() == 8);
    REQUIRE(dec.residual.length() == 0);
}

namespace {

// Four singleton words scattered over 70 coordinates: non-redundancy 4, and
// with d = 1, lambda = 1 the shortcut cases are both skipped.
sparsicode::BinaryCode scattered_identity() {
    const std::size_t m = 70;
    std::vector<BitVec> words;
    for (std::size_t c : {10, 25, 40, 55}) {
        BitVec w(m);
        w.set(c, true);
        words.push_back(w);
    }
    return sparsicode::BinaryCode(m, std::move(words));
}

} // namespace

TEST_CASE("decompose case three satisfies its bounds") {
    auto code = scattered_identity();
    const double d = 1.0, lambda = 1.0;
    auto dec = decompose(code, d, lambda, 1001);
    REQUIRE(dec.case_used == 3);
    REQUIRE(dec.nrd_used == 4);

    const double log4m = std::log2(4.0 * 70.0);
    REQUIRE(static_cast<double>(dec.I.size()) <=
            2.0 * lambda * static_cast<double>(dec.nrd_used) * log4m);

    // every codeword was removed along the way
    std::size_t removed_total = 0;
    for (std::size_t r : dec.removed_counts) removed_total += r;
    REQUIRE(removed_total == code.size());

    // every word has its coordinate conditioned away, so the punctured code
    // collapses to the zero pattern
    for (std::size_t c : {10, 25, 40, 55}) REQUIRE(dec.I.contains(c));
    REQUIRE(dec.residual.size() == 1);
    REQUIRE(dec.residual.length() == 70 - dec.I.size());
    REQUIRE(static_cast<double>(dec.residual.size()) <=
            70.0 * std::pow(2.0, 3.0 * d * std::pow(std::log2(140.0), 2) / lambda));

    // monovariant recorded before each round never increases
    for (std::size_t s = 1; s < dec.trace.size(); ++s)
        REQUIRE(dec.trace[s].f_before <= dec.trace[s - 1].f_before);

    // sampled coordinates are exactly the coordinates reported in I
    REQUIRE(dec.trace.size() == dec.I.size());
    for (const auto& st : dec.trace) REQUIRE(dec.I.contains(st.sampled_coord));
}

TEST_CASE("decompose restricts to the low-weight part of the code") {
    // only one staircase word has weight <= 1, so the run handles that word
    auto code = fixtures::staircase(24);
    auto dec = decompose(code, 1.0, 1.5, 77);
    REQUIRE(dec.case_used == 3);
    REQUIRE(dec.nrd_used == 1);
    std::size_t removed_total = 0;
    for (std::size_t r : dec.removed_counts) removed_total += r;
    REQUIRE(removed_total == 1);

    // no word survives a weight cutoff below every codeword weight
    BitVec heavy(6);
    for (std::size_t i = 0; i < 4; ++i) heavy.set(i, true);
    BinaryCode heavy_code(6, {heavy});
    auto none = decompose(heavy_code, 2.0, 1.0, 3);
    REQUIRE(none.case_used == 1);           // nrd of the empty code is 0
    REQUIRE(none.residual.empty());
}

TEST_CASE("decompose is deterministic in the seed") {
    auto code = scattered_identity();
    auto a = decompose(code, 1.0, 1.0, 7);
    auto b = decompose(code, 1.0, 1.0, 7);
    REQUIRE(a.I.indices() == b.I.indices());
    REQUIRE(a.removed_counts == b.removed_counts);
    REQUIRE(a.trace.size() == b.trace.size());
    auto c = decompose(code, 1.0, 1.0, 8);
    // a different seed may sample different coordinates, but stays valid
    REQUIRE(c.case_used == 3);
}

TEST_CASE("decompose honors an externally supplied non-redundancy bound") {
    auto code = scattered_identity();
    auto dec = decompose(code, 1.0, 1.0, 5, std::size_t{4});
    REQUIRE(dec.nrd_used == 4);
    REQUIRE(dec.case_used == 3);
}

TEST_CASE("decompose rejects malformed parameters") {
    auto code = fixtures::tri();
    REQUIRE_THROWS_AS(decompose(code, 0.5, 2.0, 1), input_error);
    REQUIRE_THROWS_AS(decompose(code, 1.0, 0.5, 1), input_error);
}
