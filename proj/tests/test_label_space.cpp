#include "confscore/error.hpp"
#include "confscore/label_space.hpp"

#include <doctest.h>

using namespace confscore;

TEST_CASE("make_label_space builds validated spaces") {
    const auto bands = make_label_space({"low", "medium", "high"});
    CHECK(bands.size() == 3);
    CHECK(bands.name(1) == "medium");
    CHECK(bands.find("high") == Label{2});
    CHECK_FALSE(bands.find("mid").has_value());

    std::vector<std::string> names;
    std::vector<std::int64_t> values;
    for (int s = 2; s <= 12; ++s) {
        names.push_back("s" + std::to_string(s));
        values.push_back(s);
    }
    const auto asap = make_label_space(names, values);
    CHECK(asap.size() == 11);
    CHECK(asap.ordinal_values()->front() == 2);
}

TEST_CASE("make_label_space rejects malformed input") {
    CHECK_THROWS_AS(make_label_space({"a"}), Error);
    CHECK_THROWS_AS(make_label_space({}), Error);
    CHECK_THROWS_AS(make_label_space({"a", "b", "a"}), Error);
    CHECK_THROWS_AS(make_label_space({"a", "b"}, std::vector<std::int64_t>{1}), Error);
    CHECK_THROWS_AS(make_label_space({"a", "b", "c"}, std::vector<std::int64_t>{1, 3, 3}), Error);
    CHECK_THROWS_AS(make_label_space({"a", "b"}, std::vector<std::int64_t>{2, 1}), Error);
    try {
        make_label_space({"x", "x"});
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::validation);
    }
}

TEST_CASE("FCE band map boundaries") {
    const BandMap fce = fce_band_map();
    CHECK(fce.scale_min() == 1);
    CHECK(fce.scale_max() == 40);
    CHECK(map_raw_score(1, fce) == 0);
    CHECK(map_raw_score(18, fce) == 0);
    CHECK(map_raw_score(19, fce) == 1);
    CHECK(map_raw_score(30, fce) == 1);
    CHECK(map_raw_score(31, fce) == 2);
    CHECK(map_raw_score(40, fce) == 2);
    CHECK_THROWS_AS(map_raw_score(41, fce), Error);
    CHECK_THROWS_AS(map_raw_score(0, fce), Error);
}

TEST_CASE("band map is total and monotone over its scale") {
    const BandMap fce = fce_band_map();
    const std::array<std::pair<int, int>, 3> intervals{{{1, 18}, {19, 30}, {31, 40}}};
    Label previous = 0;
    for (std::int64_t raw = fce.scale_min(); raw <= fce.scale_max(); ++raw) {
        const Label band = fce.map(raw);
        CHECK(band >= previous);
        CHECK(raw >= intervals[band].first);
        CHECK(raw <= intervals[band].second);
        previous = band;
    }
}

TEST_CASE("band map construction checks") {
    const auto three = make_label_space({"a", "b", "c"});
    CHECK_THROWS_AS(BandMap(1, {10, 20}, three), Error);
    CHECK_THROWS_AS(BandMap(1, {10, 10, 20}, three), Error);
    CHECK_THROWS_AS(BandMap(11, {10, 15, 20}, three), Error);
    const BandMap custom(0, {0, 5, 9}, three);
    CHECK(custom.map(0) == 0);
    CHECK(custom.map(1) == 1);
    CHECK(custom.map(9) == 2);
}
