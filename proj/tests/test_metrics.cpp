#include "confscore/error.hpp"
#include "confscore/metrics.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace confscore;
using testing_support::make_set;
using V = std::vector<Label>;

namespace {

std::vector<PredictionSet> sets_of(const std::vector<V>& members) {
    std::vector<PredictionSet> out;
    for (std::size_t i = 0; i < members.size(); ++i) out.push_back({"r" + std::to_string(i), members[i]});
    return out;
}

V random_labels(std::size_t n, std::size_t k, std::mt19937_64& rng) {
    V out(n);
    for (auto& y : out) y = rng() % k;
    return out;
}

} // namespace

TEST_CASE("point_prediction breaks ties toward the lowest index") {
    CHECK(point_prediction(std::vector<double>{0.1, 0.8, 0.1}) == 1);
    CHECK(point_prediction(std::vector<double>{0.5, 0.5, 0.0}) == 0);
    CHECK(point_prediction(std::vector<double>(11, 1.0 / 11.0)) == 0);
}

TEST_CASE("accuracy") {
    CHECK(accuracy(V{2, 0, 1}, V{2, 0, 1}) == 1.0);
    CHECK(accuracy(V{0, 0}, V{1, 2}) == 0.0);
    CHECK(accuracy(V{0, 1, 2, 0}, V{0, 1, 0, 0}) == 0.75);
    CHECK_THROWS_AS(accuracy(V{0}, V{0, 1}), Error);
    CHECK_THROWS_AS(accuracy(V{}, V{}), Error);
}

TEST_CASE("confusion matrix") {
    const ConfusionMatrix cm(3, V{0, 1, 2, 2}, V{0, 2, 2, 1});
    CHECK(cm.total() == 4);
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(2, 1) == 1);
    CHECK(cm.at(2, 2) == 1);
    CHECK(cm.at(1, 2) == 1);
    CHECK(cm.row_total(2) == 2);
    CHECK(cm.col_total(2) == 2);
    CHECK_THROWS_AS(ConfusionMatrix(2, V{0, 2}, V{0, 1}), Error);
}

TEST_CASE("macro_f1") {
    CHECK(macro_f1(V{0, 1, 2, 1}, V{0, 1, 2, 1}, 3) == 1.0);
    CHECK(macro_f1(V{0, 0, 0, 0}, V{0, 0, 1, 1}, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(macro_f1(V{1, 0}, V{0, 1}, 2) == 0.0);
    // a class absent from both sequences contributes zero
    CHECK(macro_f1(V{0, 1}, V{0, 1}, 3) == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(macro_f1(V{}, V{}, 2), Error);
}

TEST_CASE("macro_f1 equals accuracy on diagonal confusion matrices") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 50; ++i) {
        const std::size_t k = 2 + rng() % 10;
        V labels = random_labels(20 + rng() % 50, k, rng);
        for (Label c = 0; c < k; ++c) labels.push_back(c);  // every class present
        CHECK(macro_f1(labels, labels, k) == accuracy(labels, labels));
    }
}

TEST_CASE("qwk fixed values") {
    CHECK(qwk(V{0, 1, 2, 2}, V{0, 1, 2, 2}, 3) == 1.0);
    CHECK(qwk(V{2, 0}, V{0, 2}, 3) == -1.0);
    CHECK(qwk(V{1, 1, 1}, V{1, 1, 1}, 3) == 1.0);  // degenerate expected disagreement
    CHECK(qwk(V{0, 0, 0}, V{2, 2, 2}, 3) <= 0.0);
    CHECK_THROWS_AS(qwk(V{0}, V{0, 1}, 3), Error);
    CHECK_THROWS_AS(qwk(V{}, V{}, 3), Error);
}

TEST_CASE("qwk matches the pairwise oracle and its symmetries") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 200; ++i) {
        const std::size_t k = i % 2 == 0 ? 3 : 11;
        V a = random_labels(50, k, rng);
        V b = random_labels(50, k, rng);
        if (i % 5 == 0) {  // correlated raters
            for (std::size_t j = 0; j < b.size(); ++j) b[j] = j % 3 == 0 ? b[j] : a[j];
        }
        const double value = qwk(a, b, k);
        CHECK(std::abs(value - oracle::pairwise_qwk(b, a)) <= 1e-12);
        CHECK(value >= -1.0);
        CHECK(value <= 1.0);
        CHECK(std::abs(value - qwk(b, a, k)) <= 1e-12);
        V ra = a, rb = b;
        for (auto& y : ra) y = k - 1 - y;
        for (auto& y : rb) y = k - 1 - y;
        CHECK(std::abs(value - qwk(ra, rb, k)) <= 1e-12);
        CHECK((value == 1.0) == (a == b));
    }
}

TEST_CASE("set metrics") {
    CHECK(coverage(sets_of({{0, 1, 2}, {0, 1, 2}}), V{0, 2}) == 1.0);
    CHECK(coverage(sets_of({{}, {}}), V{0, 2}) == 0.0);
    CHECK(coverage(sets_of({{0}, {1, 2}, {2}}), V{0, 0, 2}) == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(coverage(sets_of({{0}}), V{0, 1}), Error);

    CHECK(avg_set_size(sets_of({{0}, {1}, {2}})) == 1.0);
    CHECK(avg_set_size(sets_of({{0}, {0, 1}, {0, 1, 2}})) == 2.0);
    CHECK(avg_set_size(sets_of({{0, 1, 2}, {0, 1, 2}, {0, 1, 2}, {0, 1}})) == 2.75);
    CHECK_THROWS_AS(avg_set_size(sets_of({})), Error);

    CHECK(singleton_rate(sets_of({{0}, {1}})) == 1.0);
    CHECK(singleton_rate(sets_of({{0}, {0, 1}})) == 0.5);
    CHECK(singleton_rate(sets_of({{0}, {2}, {0, 1, 2}, {}})) == 0.5);
    CHECK_THROWS_AS(singleton_rate(sets_of({})), Error);
}

TEST_CASE("coverage of argmax singletons equals accuracy") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 50; ++i) {
        const std::size_t k = 2 + rng() % 10;
        const V pred = random_labels(30, k, rng);
        const V truth = random_labels(30, k, rng);
        std::vector<V> members;
        for (Label y : pred) members.push_back({y});
        CHECK(coverage(sets_of(members), truth) == accuracy(pred, truth));
    }
}

TEST_CASE("uacc") {
    CHECK(uacc(0.54, 11, 2.74) == doctest::Approx(1.08).epsilon(0.005 / 1.08));
    CHECK(uacc(0.77, 3, 1.29) == doctest::Approx(1.17).epsilon(0.005 / 1.17));
    CHECK(uacc(0.65, 3, 2.30) == doctest::Approx(0.74).epsilon(0.005 / 0.74));
    CHECK(uacc(1.0, 3, 3.0) == 1.0);
    CHECK(uacc(1.0, 11, 1.0) == doctest::Approx(std::sqrt(11.0)));
    try {
        uacc(0.5, 3, 0.0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::calibration);
    }
    CHECK_THROWS_AS(uacc(1.5, 3, 1.0), Error);
    CHECK_THROWS_AS(uacc(0.5, 1, 1.0), Error);
}

TEST_CASE("uacc is monotone in accuracy and set size") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t k = 2 + rng() % 12;
        const double acc1 = unit(rng), acc2 = unit(rng);
        const double s1 = 0.05 + unit(rng) * static_cast<double>(k), s2 = 0.05 + unit(rng) * static_cast<double>(k);
        if (acc1 < acc2) CHECK(uacc(acc1, k, s1) < uacc(acc2, k, s1));
        if (s1 < s2 && acc1 > 0.0) CHECK(uacc(acc1, k, s1) > uacc(acc1, k, s2));
    }
}

TEST_CASE("evaluate") {
    const auto labels = make_label_space({"low", "medium", "high"});
    const ConformalModel certain{.alpha = 0.1, .q_alpha = 0.0, .n_calibration = 10, .label_space = labels,
                                 .force_nonempty = false, .calibration_sha256 = {}};
    const auto perfect = make_set(labels, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {0, 1, 2});
    const EvalReport r = evaluate(certain, perfect);
    CHECK(r.accuracy == 1.0);
    CHECK(r.coverage == 1.0);
    CHECK(r.avg_set_size == 1.0);
    CHECK(r.singleton_rate == 1.0);
    CHECK(r.qwk == 1.0);
    CHECK(r.macro_f1 == 1.0);
    CHECK(r.uacc == std::sqrt(3.0));
    CHECK(r.n_test == 3);
    CHECK(r.alpha == 0.1);
    CHECK(r.num_labels == 3);

    CHECK_THROWS_AS(evaluate(certain, RecordSet(labels, {})), Error);
    CHECK_THROWS_AS(evaluate(certain, make_set(labels, {{1, 0, 0}})), Error);

    const ConformalModel strict{.alpha = 0.1, .q_alpha = 0.0, .n_calibration = 10, .label_space = labels,
                                .force_nonempty = false, .calibration_sha256 = {}};
    CHECK_THROWS_AS(evaluate(strict, make_set(labels, {{0.5, 0.3, 0.2}}, {0})), Error);
}

TEST_CASE("evaluate equals composing the individual metrics") {
    std::mt19937_64 rng(41);
    const auto labels = make_label_space({"a", "b", "c", "d"});
    std::vector<std::vector<double>> probs;
    std::vector<std::size_t> truth;
    for (int i = 0; i < 300; ++i) {
        probs.push_back(testing_support::random_probs(4, rng));
        truth.push_back(rng() % 4);
    }
    const auto test = make_set(labels, probs, truth);
    const ConformalModel model{.alpha = 0.2, .q_alpha = 0.7, .n_calibration = 50, .label_space = labels,
                               .force_nonempty = true, .calibration_sha256 = {}};
    const EvalReport r = evaluate(model, test);

    V pred;
    for (const auto& p : probs) pred.push_back(point_prediction(p));
    const auto sets = predict_batch(model, test);
    CHECK(r.accuracy == accuracy(pred, truth));
    CHECK(r.macro_f1 == macro_f1(pred, truth, 4));
    CHECK(r.qwk == qwk(pred, truth, 4));
    CHECK(r.coverage == coverage(sets, truth));
    CHECK(r.avg_set_size == avg_set_size(sets));
    CHECK(r.singleton_rate == singleton_rate(sets));
    CHECK(r.uacc == uacc(r.accuracy, 4, r.avg_set_size));
    CHECK(r.empty_set_rate == 0.0);
    CHECK(evaluate(model, test) == r);
}

TEST_CASE("report serialisation and table") {
    EvalReport r;
    r.dataset = "ASAP P1";
    r.scorer = "Llama-2 7B";
    r.alpha = 0.1;
    r.num_labels = 11;
    r.n_test = 267;
    r.qwk = 0.8234;
    r.accuracy = 0.5431;
    r.macro_f1 = 0.52;
    r.coverage = 0.9101;
    r.avg_set_size = 2.7412;
    r.singleton_rate = 0.2;
    r.uacc = 1.0819;
    CHECK(parse_report(format_report(r), "mem") == r);
    CHECK_THROWS_AS(parse_report("{}", "mem"), Error);

    const std::vector<EvalReport> rows{r};
    const std::string table = render_table(rows);
    CHECK(table ==
          "Dataset  Model            QWK     Acc.       F1 Coverage  Avg |C|     UAcc\n"
          "ASAP P1  Llama-2 7B      0.82     0.54     0.52     0.91     2.74     1.08\n");
}
