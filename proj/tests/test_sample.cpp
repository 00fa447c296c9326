#include <catch2/catch_amalgamated.hpp>

#include "ecic/sample.hpp"

#include "helpers.hpp"

using namespace ecic;

TEST_CASE("sort_descending orders and keeps ties stable") {
    CHECK(sort_descending(testutil::make_cell({3, 1, 2})).descending ==
          std::vector<double>{3, 2, 1});
    CHECK(sort_descending(testutil::make_cell({5})).descending == std::vector<double>{5});
    CHECK(sort_descending(testutil::make_cell({2, 2, 1})).descending ==
          std::vector<double>{2, 2, 1});
}

TEST_CASE("sort_descending rejects empty and non-finite cells") {
    CHECK_THROWS_WITH(sort_descending(CellSample{}), "empty cell");
    CHECK_THROWS(sort_descending(testutil::make_cell({1.0, std::nan("")})));
}

TEST_CASE("sort_descending is a permutation of the input") {
    Rng rng(11);
    auto values = testutil::uniform_sample(200, rng);
    auto sorted = sort_descending(testutil::make_cell(values));
    auto expect = values;
    std::sort(expect.begin(), expect.end(), std::greater<double>());
    CHECK(sorted.descending == expect);
}

TEST_CASE("transforms map and invert element-wise") {
    CHECK(apply_transform(testutil::make_cell({1, 2}), TailTransform::identity).outcomes ==
          std::vector<double>{1, 2});
    CHECK(apply_transform(testutil::make_cell({2, 4}), TailTransform::reciprocal).outcomes ==
          std::vector<double>{0.5, 0.25});
    CHECK(apply_transform(testutil::make_cell({1, -3}), TailTransform::negate).outcomes ==
          std::vector<double>{-1, 3});

    CHECK(invert_transform(5.0, TailTransform::identity) == 5.0);
    CHECK(invert_transform(0.5, TailTransform::reciprocal) == 2.0);
    CHECK(invert_transform(-7.0, TailTransform::negate) == 7.0);
}

TEST_CASE("reciprocal transform requires strictly positive outcomes") {
    CHECK_THROWS(apply_transform(testutil::make_cell({2.0, 0.0}), TailTransform::reciprocal));
    CHECK_THROWS(apply_transform(testutil::make_cell({2.0, -1.0}), TailTransform::reciprocal));
    CHECK_THROWS(invert_transform(0.0, TailTransform::reciprocal));
}

TEST_CASE("invert_transform undoes apply_transform") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const double y = rng.uniform01() * 10 + 0.01;
        for (auto tr : {TailTransform::identity, TailTransform::negate,
                        TailTransform::reciprocal}) {
            const double round_trip = invert_transform(apply_transform(y, tr), tr);
            CHECK(testutil::rel_err(round_trip, y) < 1e-15);
        }
    }
}

TEST_CASE("jitter_ties breaks ties deterministically without reordering") {
    const CellSample cell = testutil::make_cell({1, 1, 1, 2, 2, 5});
    const CellSample a = jitter_ties(cell, 42);
    const CellSample b = jitter_ties(cell, 42);
    CHECK(a.outcomes == b.outcomes);

    auto sorted = a.outcomes;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i) CHECK(sorted[i] > sorted[i - 1]);

    // noise stays below half the minimal gap, so distinct values keep order
    for (std::size_t i = 0; i < cell.outcomes.size(); ++i) {
        CHECK(a.outcomes[i] >= cell.outcomes[i]);
        CHECK(a.outcomes[i] < cell.outcomes[i] + 0.5);
    }

    CHECK_THROWS(jitter_ties(testutil::make_cell({3, 3, 3}), 1));
}
