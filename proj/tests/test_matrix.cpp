#include <doctest.h>

#include "helpers.hpp"
#include "ranopt/matrix.hpp"

using namespace ranopt;
using namespace ranopt::test;

TEST_CASE("make_stochastic accepts valid rows and renormalizes drift") {
    CHECK_NOTHROW(StochasticMatrix::identity(2));
    CHECK_NOTHROW(StochasticMatrix::make({{0.5, 0.5}, {1.0, 0.0}}));

    // drift within 1e-9 is renormalized to exact row sums
    StochasticMatrix a = StochasticMatrix::make({{0.5 + 2e-10, 0.5}, {1.0, 0.0}});
    CHECK(a(0, 0) + a(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("make_stochastic rejects bad input") {
    CHECK_THROWS_WITH_AS(StochasticMatrix::make({{0.5, 0.6}, {1.0, 0.0}}),
                         doctest::Contains("row 0"), Error);
    try {
        StochasticMatrix::make({{0.5, 0.6}, {1.0, 0.0}});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RowSumOutOfTolerance);
    }
    try {
        StochasticMatrix::make({{1.5, -0.5}, {0.0, 1.0}});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NegativeEntry);
    }
    try {
        StochasticMatrix::make(2, {1.0, 0.0, 1.0});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonSquare);
    }
}

TEST_CASE("diam on reference matrices") {
    CHECK(diam(StochasticMatrix::identity(2)) == doctest::Approx(1.0));
    CHECK(diam(StochasticMatrix::uniform_mixing(3)) == doctest::Approx(0.0));
    // 0.5 * (|1-0.5| + |0-0.5|) = 0.5
    CHECK(diam(StochasticMatrix::make({{1.0, 0.0}, {0.5, 0.5}})) == doctest::Approx(0.5));
    CHECK(diam(StochasticMatrix::identity(1)) == 0.0);
}

TEST_CASE("mixing on reference matrices") {
    CHECK(mixing(StochasticMatrix::identity(2)) == doctest::Approx(0.0));
    CHECK(mixing(StochasticMatrix::uniform_mixing(3)) == doctest::Approx(1.0));
    CHECK(mixing(StochasticMatrix::make({{1.0, 0.0}, {0.5, 0.5}})) == doctest::Approx(0.5));
}

TEST_CASE("state blocks require finite entries") {
    CHECK_THROWS_AS(StateBlock(2, 1, {1.0, std::nan("")}), Error);
    CHECK_THROWS_AS(StateBlock(2, 1, {1.0}), Error); // shape mismatch
}

TEST_CASE("state_diameter on reference blocks") {
    CHECK(state_diameter(StateBlock::constant(2, 3, 1.5)) == 0.0);
    CHECK(state_diameter(StateBlock(2, 1, {0.0, 3.0})) == doctest::Approx(3.0));
    // brute force over all pairs/coords gives 3 for rows (0,0), (1,-2), (3,1)
    CHECK(state_diameter(StateBlock(3, 2, {0, 0, 1, -2, 3, 1})) == doctest::Approx(3.0));
    CHECK(state_diameter(StateBlock(1, 2, {4.0, 5.0})) == 0.0);
}

TEST_CASE("apply weights rows and fixes consensus states") {
    StateBlock x(2, 1, {2.0, 0.0});
    StateBlock same = apply(StochasticMatrix::identity(2), x);
    CHECK(same == x);

    StateBlock mean = apply(StochasticMatrix::uniform_mixing(2), x);
    CHECK(mean(0, 0) == doctest::Approx(1.0));
    CHECK(mean(1, 0) == doctest::Approx(1.0));

    StateBlock y = apply(StochasticMatrix::make({{1.0, 0.0}, {0.5, 0.5}}), x);
    CHECK(y(0, 0) == doctest::Approx(2.0));
    CHECK(y(1, 0) == doctest::Approx(1.0));

    CHECK_THROWS_AS(apply(StochasticMatrix::identity(3), x), Error);
}

TEST_CASE("compose multiplies and keeps rows stochastic") {
    StochasticMatrix a = StochasticMatrix::make({{1.0, 0.0}, {0.5, 0.5}});
    StochasticMatrix i = StochasticMatrix::identity(2);
    CHECK(compose(a, i) == a);
    CHECK(compose(i, a) == a);

    StochasticMatrix sq = compose(a, a);
    CHECK(sq(0, 0) == doctest::Approx(1.0));
    CHECK(sq(1, 0) == doctest::Approx(0.75));
    CHECK(sq(1, 1) == doctest::Approx(0.25));

    CHECK_THROWS_AS(compose(a, StochasticMatrix::identity(3)), Error);
}

TEST_CASE("property: mixing + diam = 1") {
    Pcg32 rng(42);
    for (int trial = 0; trial < 400; ++trial) {
        int n = 2 + static_cast<int>(rng.next_below(7));
        StochasticMatrix a = random_stochastic(n, rng);
        CHECK(std::abs(mixing(a) + diam(a) - 1.0) <= kExactTol);
        CHECK(diam(a) == doctest::Approx(diam_oracle(a)).epsilon(1e-14));
        CHECK(mixing(a) == doctest::Approx(mixing_oracle(a)).epsilon(1e-14));
    }
}

TEST_CASE("property: product contraction bounds") {
    Pcg32 rng(43);
    for (int trial = 0; trial < 1000; ++trial) {
        int n = 2 + static_cast<int>(rng.next_below(7));
        StochasticMatrix a = random_stochastic(n, rng);
        StochasticMatrix b = random_stochastic(n, rng);
        double dab = diam(compose(a, b));
        CHECK(dab <= (1.0 - mixing(a)) * diam(b) + kExactTol);
        CHECK(dab <= diam(a) * diam(b) + kExactTol);
    }
}

TEST_CASE("property: state contraction, sublinearity, mean bounds") {
    Pcg32 rng(44);
    for (int trial = 0; trial < 500; ++trial) {
        int n = 2 + static_cast<int>(rng.next_below(7));
        int m = 1 + static_cast<int>(rng.next_below(3));
        StochasticMatrix a = random_stochastic(n, rng);
        StateBlock x = random_state(n, m, rng);
        StateBlock y = random_state(n, m, rng);

        CHECK(state_diameter(apply(a, x)) <= diam(a) * state_diameter(x) + 1e-10);
        CHECK(state_diameter(add(x, y)) <=
              state_diameter(x) + state_diameter(y) + kExactTol);

        double max_row = 0.0;
        for (int i = 0; i < n; ++i) max_row = std::max(max_row, linf_norm(x.agent_row(i)));
        CHECK(state_diameter(x) <= 2.0 * max_row + kExactTol);

        std::vector<double> pi = random_stochastic_vector(n, rng);
        std::vector<double> blend(static_cast<size_t>(m), 0.0);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < m; ++k) blend[static_cast<size_t>(k)] += pi[i] * x(i, k);
        for (int i = 0; i < n; ++i)
            CHECK(linf_dist(x.agent_row(i), blend) <= state_diameter(x) + kExactTol);
    }
}

TEST_CASE("json and csv round trips") {
    StochasticMatrix a = StochasticMatrix::make({{0.25, 0.75}, {0.5, 0.5}});
    CHECK(matrix_from_json(matrix_to_json(a)) == a);
    CHECK_THROWS_AS(matrix_from_json("not json"), Error);
    CHECK_THROWS_AS(matrix_from_json("[[0.5,0.9],[1,0]]"), Error);

    StateBlock x(2, 2, {1.0, -2.0, 0.5, 0.0});
    CHECK(state_from_json(state_to_json(x)) == x);

    std::string csv = matrix_to_csv(a);
    CHECK(csv.substr(0, 14) == "row,col,value\n");
    CHECK(csv.find("0,1,0.75\n") != std::string::npos);
    CHECK(csv.find("1,0,0.5\n") != std::string::npos);
}
