#include <cstring>

#include "doctest.h"
#include "mibids/error.hpp"
#include "mibids/model.hpp"
#include "mibids/pipeline.hpp"
#include "mibids/rng.hpp"
#include "support.hpp"

using namespace mibids;

namespace {

TrainedModel small_model(ModelKind kind) {
    const Dataset d = testsupport::random_dataset(7, 200, 4, 3);
    TrainOptions o;
    o.kind = kind;
    o.group = "all";
    o.forest.n_trees = 5;
    o.boost.n_rounds = 3;
    o.mlp.epochs = 5;
    return train_model(d, o, "toy.csv").model;
}

}  // namespace

TEST_CASE("model kinds round-trip through text") {
    for (auto k : {ModelKind::Tree, ModelKind::Forest, ModelKind::AdaBoost, ModelKind::Mlp})
        CHECK(parse_model_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_model_kind("svm"), UsageError);
}

TEST_CASE("serialize then deserialize is lossless for every kind") {
    for (auto k : {ModelKind::Tree, ModelKind::Forest, ModelKind::AdaBoost, ModelKind::Mlp}) {
        const TrainedModel m = small_model(k);
        const auto bytes = serialize(m);
        const TrainedModel back = deserialize(bytes);
        CHECK(back == m);
        CHECK(serialize(back) == bytes);
        CHECK(back.setting("data") == std::optional<std::string>("toy.csv"));
        CHECK(back.normalizer.has_value() == (k == ModelKind::Mlp));
    }
}

TEST_CASE("save and load through a file") {
    testsupport::TempDir tmp;
    const TrainedModel m = small_model(ModelKind::Forest);
    save_model(m, tmp / "m.bin");
    CHECK(load_model(tmp / "m.bin") == m);
    CHECK_THROWS_AS(load_model(tmp / "missing.bin"), DataError);
}

TEST_CASE("corrupt files are rejected") {
    const auto bytes = serialize(small_model(ModelKind::Tree));
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_WITH_AS(deserialize(bad), doctest::Contains("magic"), DataError);

    bad = bytes;
    bad[8] = 99;
    CHECK_THROWS_WITH_AS(deserialize(bad), doctest::Contains("version"), DataError);

    for (std::size_t cut : {std::size_t{3}, std::size_t{12}, bytes.size() / 2, bytes.size() - 1}) {
        std::vector<std::uint8_t> part(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
        CHECK_THROWS_AS(deserialize(part), DataError);
    }
    bad = bytes;
    bad.push_back(0);
    CHECK_THROWS_AS(deserialize(bad), DataError);
}

TEST_CASE("unknown sections are skipped") {
    auto bytes = serialize(small_model(ModelKind::Tree));
    std::uint32_t count;
    std::memcpy(&count, bytes.data() + 12, 4);
    count += 1;
    std::memcpy(bytes.data() + 12, &count, 4);
    const char tag[] = "XTRA";
    bytes.insert(bytes.end(), tag, tag + 4);
    const std::uint64_t len = 3;
    const auto* lp = reinterpret_cast<const std::uint8_t*>(&len);
    bytes.insert(bytes.end(), lp, lp + 8);
    bytes.insert(bytes.end(), {1, 2, 3});
    CHECK(deserialize(bytes) == small_model(ModelKind::Tree));
}

TEST_CASE("predictions survive a round trip") {
    const TrainedModel m = small_model(ModelKind::Mlp);
    const TrainedModel back = deserialize(serialize(m));
    Rng rng(2);
    for (int k = 0; k < 50; ++k) {
        std::vector<double> x(4);
        for (auto& v : x) v = rng.uniform(-10, 10);
        CHECK(back.predict_proba(x) == m.predict_proba(x));
    }
    const double short_x[] = {1.0};
    CHECK_THROWS_AS(m.predict(short_x), DataError);
}
