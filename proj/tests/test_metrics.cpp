#include "radocc/errors.hpp"
#include "radocc/metrics.hpp"

#include <catch_amalgamated.hpp>

#include <vector>

using namespace radocc;
using Catch::Approx;

TEST_CASE("confusion counts rows as truth") {
    const std::vector<int> t{0, 0, 1, 2, 2, 2}, p{0, 1, 1, 2, 0, 2};
    const auto cm = confusion(t, p);
    CHECK(cm.counts[0][1] == 1);
    CHECK(cm.counts[2][0] == 1);
    CHECK(cm.total() == 6);
    CHECK(cm.support(2) == 3);
    CHECK(cm.row_normalized()[2][2] == Approx(2.0 / 3));
    const std::vector<int> short_p{0};
    CHECK_THROWS(confusion(t, short_p));
}

TEST_CASE("balanced accuracy from per-class recalls") {
    // Recalls 1, 0.5, 0.
    const std::vector<int> t{0, 0, 1, 1, 2, 2}, p{0, 0, 1, 0, 1, 0};
    const auto cm = confusion(t, p);
    CHECK(recall(cm, 0) == 1.0);
    CHECK(recall(cm, 1) == 0.5);
    CHECK(recall(cm, 2) == 0.0);
    CHECK(balanced_accuracy(cm) == Approx(0.5));
    CHECK(recall_populated(cm) == Approx(0.5));
}

TEST_CASE("constant predictor") {
    std::vector<int> t, p;
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < 10; ++i) {
            t.push_back(c);
            p.push_back(0);
        }
    }
    const auto cm = confusion(t, p);
    CHECK(balanced_accuracy(cm) == Approx(1.0 / 3));
    CHECK(accuracy(cm) == Approx(1.0 / 3));
    CHECK(macro_f1(cm) == Approx(1.0 / 6));
    CHECK(recall_populated(cm) == 0.0);
}

TEST_CASE("populated recall merges the occupied classes") {
    const std::vector<int> t{1, 1, 2, 2, 0}, p{2, 2, 1, 0, 0};
    const auto cm = confusion(t, p);
    CHECK(recall_populated(cm) == Approx(0.75));
    CHECK(balanced_accuracy(cm) == Approx(1.0 / 3));
}

TEST_CASE("accuracy equals balanced accuracy on balanced sets") {
    const std::vector<int> t{0, 0, 0, 1, 1, 1, 2, 2, 2}, p{0, 0, 0, 1, 1, 2, 2, 0, 2};
    const auto cm = confusion(t, p);
    CHECK(accuracy(cm) == Approx(balanced_accuracy(cm)));

    // Replicating one class leaves BA unchanged.
    auto t2 = t, p2 = p;
    for (int k = 0; k < 4; ++k) {
        for (int i = 0; i < 3; ++i) {
            t2.push_back(t[i]);
            p2.push_back(p[i]);
        }
    }
    const auto cm2 = confusion(t2, p2);
    CHECK(balanced_accuracy(cm2) == Approx(balanced_accuracy(cm)));
    CHECK(accuracy(cm2) != Approx(accuracy(cm)));
}

TEST_CASE("perfect predictions and report") {
    const std::vector<int> t{0, 1, 2, 2};
    const auto r = make_report(confusion(t, t));
    CHECK(r.acc == 1.0);
    CHECK(r.ba == 1.0);
    CHECK(r.macro_f1 == 1.0);
    CHECK(r.rec_pop == 1.0);
    CHECK(r.recalls == std::array<double, 3>{1.0, 1.0, 1.0});
}

TEST_CASE("a class without support is an error") {
    const std::vector<int> t{0, 1, 1}, p{0, 1, 2};
    const auto cm = confusion(t, p);
    CHECK_THROWS_AS(recall(cm, 2), DataError);
    CHECK_THROWS_AS(balanced_accuracy(cm), DataError);
}
