#include "doctest.h"
#include "json.hpp"
#include "mibids/error.hpp"
#include "mibids/eval.hpp"
#include "mibids/rng.hpp"
#include "support.hpp"

using namespace mibids;

namespace {
const std::vector<std::string> kAB{"A", "B"};
}

TEST_CASE("perfect predictions give a diagonal matrix") {
    const std::vector<std::size_t> y{0, 1, 1, 0, 1};
    const auto cm = confusion_matrix(y, y, kAB);
    CHECK(cm.count(0, 1) == 0);
    CHECK(cm.count(1, 0) == 0);
    CHECK(cm.trace() == 5);
    CHECK(accuracy(cm) == 1.0);
    for (std::size_t c = 0; c < 2; ++c) {
        const auto bc = binary_counts(cm, c);
        CHECK(bc.fp == 0);
        CHECK(bc.fn == 0);
    }
}

TEST_CASE("three-record example") {
    const auto cm = confusion_matrix(std::vector<std::string>{"A", "A", "B"}, std::vector<std::string>{"A", "B", "B"},
                                     kAB);
    CHECK(cm.count(0, 0) == 1);
    CHECK(cm.count(0, 1) == 1);
    CHECK(cm.count(1, 1) == 1);
    CHECK(cm.count(1, 0) == 0);
    CHECK(binary_counts(cm, "A") == BinaryCounts{1, 0, 1, 1});
    CHECK_THROWS_AS(binary_counts(cm, "C"), UsageError);
    CHECK_THROWS_AS(confusion_matrix(std::vector<std::string>{"A"}, std::vector<std::string>{"Z"}, kAB), UsageError);
}

TEST_CASE("random pairs match a brute-force tally") {
    std::vector<std::string> cat;
    for (int c = 0; c < 8; ++c) cat.push_back("k" + std::to_string(c));
    Rng rng(17);
    std::vector<std::size_t> a(1000), p(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
        a[i] = rng.index(8);
        p[i] = rng.index(8);
    }
    const auto cm = confusion_matrix(a, p, cat);
    CHECK(cm.total() == 1000);
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 8; ++j) {
            std::uint64_t n = 0;
            for (std::size_t k = 0; k < 1000; ++k) n += (a[k] == i && p[k] == j);
            CHECK(cm.count(i, j) == n);
        }
        const auto bc = binary_counts(cm, i);
        CHECK(bc.total() == 1000);
        const auto m = precision_recall_f(bc);
        const auto o = testsupport::oracle_metrics(a, p, i);
        CHECK(m.precision == doctest::Approx(o.precision).epsilon(1e-12));
        CHECK(m.recall == doctest::Approx(o.recall).epsilon(1e-12));
        CHECK(m.f_measure == doctest::Approx(o.f_measure).epsilon(1e-12));
    }
}

TEST_CASE("metric formulas") {
    const auto m = precision_recall_f(BinaryCounts{3, 1, 0, 1});
    CHECK(m.precision == 0.75);
    CHECK(m.recall == 0.75);
    CHECK(m.f_measure == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(!m.degenerate);

    const auto z = precision_recall_f(BinaryCounts{0, 0, 5, 0});
    CHECK(z.precision == 0.0);
    CHECK(z.recall == 0.0);
    CHECK(z.f_measure == 0.0);
    CHECK(z.degenerate);

    const auto perfect = precision_recall_f(BinaryCounts{4, 0, 6, 0});
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
}

TEST_CASE("accuracy and prevalence") {
    const ConfusionMatrix cm(kAB, {{3, 1}, {1, 2}});
    CHECK(accuracy(cm) == doctest::Approx(5.0 / 7.0).epsilon(1e-15));
    CHECK(prevalence(cm, 0) == doctest::Approx(4.0 / 7.0).epsilon(1e-15));
    CHECK_THROWS(accuracy(ConfusionMatrix(kAB)));
    CHECK_THROWS_AS(ConfusionMatrix(kAB, {{1, 2}}), DataError);
}

TEST_CASE("report contents and JSON keys") {
    const ConfusionMatrix cm({"A", "B", "C"}, {{5, 1, 0}, {2, 3, 0}, {0, 0, 0}});
    const auto r = make_report(cm);
    REQUIRE(r.classes.size() == 3);
    CHECK(r.accuracy == doctest::Approx(8.0 / 11.0));
    CHECK(r.classes[2].metrics.degenerate);
    const double mp = (r.classes[0].metrics.precision + r.classes[1].metrics.precision) / 3.0;
    CHECK(r.macro_precision == doctest::Approx(mp).epsilon(1e-12));

    const std::string text = format_report(r);
    CHECK(text.find("precision") != std::string::npos);
    CHECK(text.find("(degenerate)") != std::string::npos);

    const auto j = report_to_json(r);
    CHECK(j.at("accuracy").get<double>() == r.accuracy);
    CHECK(j.at("total").get<int>() == 11);
    for (const auto& c : j.at("classes")) {
        for (const char* key : {"class", "precision", "recall", "f_measure", "degenerate", "tp", "fp", "tn", "fn"})
            CHECK(c.contains(key));
    }
    CHECK(j.at("confusion")[1][0].get<int>() == 2);
}
