// tests/test_sparsify.cpp
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sparsicode/sparsify.hpp"

#include "support/fixtures.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

using namespace sparsicode;

TEST_CASE("weight map basics") {
    WeightMap w(4);
    REQUIRE(w.support_size() == 0);
    w.set(1, 2.5);
    w.set(3, 0.5);
    REQUIRE(w.support_size() == 2);
    REQUIRE(w.at(1) == 2.5);
    REQUIRE(w.at(0) == 0.0);
    w.set(1, 0.0);                      // zero entries are dropped
    REQUIRE(w.support_size() == 1);
    REQUIRE(w.min_weight() == 0.5);
    REQUIRE(w.max_weight() == 0.5);

    REQUIRE_THROWS_AS(w.set(4, 1.0), input_error);
    REQUIRE_THROWS_AS(w.set(0, -1.0), input_error);
    REQUIRE_THROWS_AS(w.set(0, std::nan("")), input_error);

    BitVec c = BitVec::from_string("0101");
    REQUIRE(w.dot(c) == 0.5);
    REQUIRE_THROWS_AS(w.dot(BitVec(3)), input_error);

    auto ones = WeightMap::all_ones(3);
    REQUIRE(ones.support_size() == 3);
    REQUIRE(ones.dot(BitVec::from_string("110")) == 2.0);
}

TEST_CASE("sparsifier verification") {
    auto code = fixtures::tri();
    auto ones = WeightMap::all_ones(3);
    auto rep = verify_sparsifier(code, ones, 0.1);
    REQUIRE(rep.valid);
    REQUIRE(rep.worst_ratio_low == 1.0);
    REQUIRE(rep.worst_ratio_high == 1.0);
    REQUIRE(rep.support_size == 3);
    REQUIRE(!rep.offending);

    WeightMap skew(3);
    skew.set(0, 2.0);
    skew.set(1, 1.0);
    skew.set(2, 1.0);
    auto rep2 = verify_sparsifier(code, skew, 0.5);
    REQUIRE(rep2.valid);
    REQUIRE(rep2.worst_ratio_high == Catch::Approx(1.5));
    auto rep3 = verify_sparsifier(code, skew, 0.4);
    REQUIRE(!rep3.valid);
    // words come back in lexicographic order, so 101 is flagged first
    REQUIRE(rep3.offending);
    REQUIRE(rep3.offending->to_string() == "101");

    REQUIRE_THROWS_AS(verify_sparsifier(code, ones, 0.0), input_error);
    REQUIRE_THROWS_AS(verify_sparsifier(code, ones, 1.0), input_error);
    REQUIRE_THROWS_AS(verify_sparsifier(code, WeightMap(2), 0.5), input_error);
}

TEST_CASE("verification against a base with zero-mass codewords") {
    // base gives word 10 denominator zero, so any positive mass on it fails
    BinaryCode code(2, {BitVec::from_string("10"), BitVec::from_string("01")});
    WeightMap base(2);
    base.set(1, 1.0);

    WeightMap w(2);
    w.set(1, 1.0);
    REQUIRE(verify_sparsifier(code, w, 0.5, base).valid);

    w.set(0, 0.25);
    auto rep = verify_sparsifier(code, w, 0.5, base);
    REQUIRE(!rep.valid);
    REQUIRE(rep.offending);
    REQUIRE(rep.offending->to_string() == "10");
}

TEST_CASE("small codes sparsify to unit weights") {
    auto code = fixtures::tri();
    auto w = simple_sparsifier(code, 0.5, 1);
    REQUIRE(w.entries() == WeightMap::all_ones(3).entries());
    auto we = entropy_sparsifier(code, 0.5, 1);
    REQUIRE(we.entries() == WeightMap::all_ones(3).entries());
}

TEST_CASE("the zero code needs no weight at all") {
    auto w = simple_sparsifier(fixtures::zero_code(4), 0.5, 1);
    REQUIRE(w.support_size() == 0);
    REQUIRE(verify_sparsifier(fixtures::zero_code(4), w, 0.5).valid);
}

TEST_CASE("simple sparsifier handles a genuinely large code") {
    // 8 bit-mask words of weight 2^16 on 2^17 coordinates; every word is too
    // heavy for the low-weight shortcut, so the subsampling recursion runs
    const std::size_t m = std::size_t{1} << 17;
    std::vector<BitVec> words;
    for (std::size_t k = 0; k < 8; ++k) {
        BitVec c(m);
        for (std::size_t j = 0; j < m; ++j)
            if ((j >> k) & 1) c.set(j, true);
        words.push_back(std::move(c));
    }
    BinaryCode code(m, std::move(words));

    auto w = simple_sparsifier(code, 0.99, 7);
    auto rep = verify_sparsifier(code, w, 0.99);
    REQUIRE(rep.valid);
    REQUIRE(w.support_size() < m);

    auto w2 = simple_sparsifier(code, 0.99, 7);
    REQUIRE(w.entries() == w2.entries());
}

TEST_CASE("simple sparsifier verifies on the fixture suite") {
    for (const auto& f : fixtures::suite()) {
        for (double eps : {0.1, 0.5}) {
            auto w = simple_sparsifier(f.code, eps, 99);
            INFO(f.name << " eps=" << eps);
            REQUIRE(verify_sparsifier(f.code, w, eps).valid);
            REQUIRE(w.support_size() <= f.code.length());
        }
    }
}

TEST_CASE("simple sparsifier verifies on random codes") {
    Rng rng(515);
    for (int round = 0; round < 30; ++round) {
        auto code = testgen::random_code_any(rng, 64, 128);
        auto w = simple_sparsifier(code, 0.3, rng.derive());
        REQUIRE(verify_sparsifier(code, w, 0.3).valid);
    }
}

TEST_CASE("entropy sparsifier verifies above the all-ones cutoff") {
    Rng rng(616);
    auto code = testgen::random_code(rng, 1024, 24, 0.4);
    auto w = entropy_sparsifier(code, 0.5, 3);
    auto rep = verify_sparsifier(code, w, 0.5);
    REQUIRE(rep.valid);
    REQUIRE(w.support_size() <= code.length());
}

TEST_CASE("sparsifiers reject a bad accuracy parameter") {
    auto code = fixtures::tri();
    REQUIRE_THROWS_AS(simple_sparsifier(code, 0.0, 1), input_error);
    REQUIRE_THROWS_AS(entropy_sparsifier(code, 1.0, 1), input_error);
}

TEST_CASE("replication sparsifier round-trips bounded-ratio weights") {
    BinaryCode code(2, {BitVec::from_string("10"), BitVec::from_string("01"),
                        BitVec::from_string("11")});
    WeightMap w(2);
    w.set(0, 1.0);
    w.set(1, 2.0);

    auto out = rep_wspr(code, w, 0.6, 5);
    REQUIRE(verify_sparsifier(code, out, 0.6, w).valid);
    // replication counts floor(2 w_i / (eps min_w)) = 3 and 6; the replicated
    // code is small enough to keep unit weights, so the folded result is exact
    REQUIRE(out.at(0) == Catch::Approx(0.9));
    REQUIRE(out.at(1) == Catch::Approx(1.8));
}

TEST_CASE("replication sparsifier returns the input when eps is tiny") {
    BinaryCode code(2, {BitVec::from_string("11")});
    WeightMap w(2);
    w.set(0, 3.0);
    w.set(1, 5.0);
    auto out = rep_wspr(code, w, 0.4, 1);   // eps <= 1/m
    REQUIRE(out.entries() == w.entries());
}

TEST_CASE("replication sparsifier caps extreme weight ratios") {
    BinaryCode code(2, {BitVec::from_string("11")});
    WeightMap w(2);
    w.set(0, 1.0);
    w.set(1, 100.0);
    // floor(2*100/0.9) = 222 replicas exceeds the 2 m^5 = 64 cap
    REQUIRE_THROWS_AS(rep_wspr(code, w, 0.9, 1), budget_error);
}

TEST_CASE("replication sparsifier validates its weights") {
    BinaryCode code(2, {BitVec::from_string("11")});
    WeightMap zero_somewhere(2);
    zero_somewhere.set(0, 1.0);
    REQUIRE_THROWS_AS(rep_wspr(code, zero_somewhere, 0.9, 1), input_error);
    REQUIRE_THROWS_AS(rep_wspr(code, WeightMap(3), 0.9, 1), input_error);
}

TEST_CASE("chain adversarial weights follow the chain order") {
    auto code = fixtures::staircase(4);
    auto cl = chain_length_exact(code);
    REQUIRE(cl.value == 4);
    auto w = chain_adversarial_weights(code, cl.witness, 0.5);
    // lambda = 4/(1-eps) = 8, descending powers along the chain
    for (std::size_t k = 0; k < 4; ++k)
        REQUIRE(w.at(cl.witness.coords[k]) ==
                Catch::Approx(std::pow(8.0, static_cast<double>(4 - k))));

    auto tri = fixtures::tri();
    auto tri_cl = chain_length_exact(tri);
    auto tw = chain_adversarial_weights(tri, tri_cl.witness, 0.5);
    for (std::size_t i = 0; i < 3; ++i) {
        bool on_chain = false;
        for (std::size_t c : tri_cl.witness.coords) on_chain |= (c == i);
        if (!on_chain) REQUIRE(tw.at(i) == Catch::Approx(1.0 / 3.0));
    }
}

TEST_CASE("weighted sparsifier keeps every chain coordinate of a staircase") {
    auto code = fixtures::staircase(8);
    auto cl = chain_length_exact(code);
    auto zeta = chain_adversarial_weights(code, cl.witness, 0.5);
    auto w = weighted_sparsifier(code, zeta, 0.5, 11);
    REQUIRE(w.support_size() == 8);
    REQUIRE(verify_sparsifier(code, w, 0.5, zeta).valid);
}

TEST_CASE("weighted sparsifier verifies on random weights") {
    Rng rng(717);
    for (int round = 0; round < 20; ++round) {
        const std::size_t m = 4 + rng.below(7);
        auto code = testgen::random_code(rng, m, 2 + rng.below(12), 0.5);
        WeightMap zeta(m);
        for (std::size_t i = 0; i < m; ++i) zeta.set(i, 0.5 + 1.5 * rng.real());
        auto w = weighted_sparsifier(code, zeta, 0.3, rng.derive());
        REQUIRE(verify_sparsifier(code, w, 0.3, zeta).valid);
    }
}

TEST_CASE("weighted sparsifier validates its inputs") {
    auto code = fixtures::tri();
    WeightMap partial(3);
    partial.set(0, 1.0);
    REQUIRE_THROWS_AS(weighted_sparsifier(code, partial, 0.5, 1), input_error);
    WeightMap zeta = WeightMap::all_ones(3);
    REQUIRE_THROWS_AS(weighted_sparsifier(code, zeta, 0.0, 1), input_error);
}

TEST_CASE("support feasibility is decided exactly") {
    auto code = fixtures::tri();
    auto ok = sparsifier_on_support(code, IndexSet({0, 1}), 0.5);
    REQUIRE(ok.has_value());
    REQUIRE(ok->size() == 2);
    // the witness itself satisfies every band
    for (const auto& c : code.words()) {
        Rat num = 0;
        if (c.get(0)) num += (*ok)[0];
        if (c.get(1)) num += (*ok)[1];
        Rat denom = static_cast<long long>(c.popcount());
        REQUIRE(num >= (Rat(1) - Rat(1, 2)) * denom);
        REQUIRE(num <= (Rat(1) + Rat(1, 2)) * denom);
    }

    // a single coordinate misses the codeword it does not touch
    REQUIRE(!sparsifier_on_support(code, IndexSet({0}), 0.5).has_value());
    REQUIRE(!sparsifier_on_support(code, IndexSet({0}), 0.99).has_value());
}

TEST_CASE("a shared coordinate can beat the non-redundancy count") {
    // both words have weight 2 and share coordinate 0, so weight 2 there is a
    // perfect sparsifier of support 1 even though non-redundancy is 2
    auto code = fixtures::shared_coordinate_pair();
    REQUIRE(oracles::nrd(code) == 2);
    auto w = sparsifier_on_support(code, IndexSet({0}), 0.5);
    REQUIRE(w.has_value());
    // both bands are [1,3] since each word has weight 2
    REQUIRE((*w)[0] >= Rat(1));
    REQUIRE((*w)[0] <= Rat(3));
}

TEST_CASE("geometric chain weights force full support") {
    auto code = fixtures::staircase(4);
    auto cl = chain_length_exact(code);
    auto zeta = chain_adversarial_weights(code, cl.witness, 0.5);
    std::optional<WeightMap> base(zeta);

    // dropping any single coordinate makes the band system infeasible
    for (std::size_t drop = 0; drop < 4; ++drop) {
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < 4; ++i)
            if (i != drop) rest.push_back(i);
        REQUIRE(!sparsifier_on_support(code, IndexSet(rest), 0.5, base).has_value());
    }
    // the full support works, of course
    REQUIRE(sparsifier_on_support(code, IndexSet({0, 1, 2, 3}), 0.5, base).has_value());
}
