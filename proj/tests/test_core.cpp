#include <doctest.h>

#include <cmath>

#include "gpudvfs/core.hpp"
#include "gpudvfs/rng.hpp"
#include "gpudvfs/synthdata.hpp"

using namespace gpudvfs;

namespace {

DeviceSpec tiny_device() {
    DeviceSpec d;
    d.name = "tiny";
    d.supported_clocks = {{500, 715}, {1000, 715}};
    d.default_clock = {500, 715};
    d.max_clock = {1000, 715};
    d.static_power_w = 10.0;
    return d;
}

ProfileRecord record_for(const std::string& app, ClockSet clock) {
    ProfileRecord r;
    r.app_id = app;
    r.clock = clock;
    r.features.numeric["sm"] = 50.0;
    r.features.categorical["dram_utilisation"] = CategoricalLevel::low;
    r.energy_ws = 10.0;
    r.time_s = 1.0;
    return r;
}

}  // namespace

TEST_CASE("rmse matches the closed form") {
    // identity
    std::vector<double> a = {1, 2, 3};
    CHECK(rmse(a, a) == doctest::Approx(0.0).epsilon(1e-12));
    // sqrt((9+16)/2)
    std::vector<double> zeros = {0, 0};
    std::vector<double> pred = {3, 4};
    CHECK(std::abs(rmse(zeros, pred) - 3.5355339059327378) < 1e-9);
    // single residual
    std::vector<double> obs1 = {5};
    std::vector<double> pred1 = {2};
    CHECK(std::abs(rmse(obs1, pred1) - 3.0) < 1e-9);
}

TEST_CASE("rmse rejects bad input") {
    std::vector<double> a = {1, 2};
    std::vector<double> b = {1};
    std::vector<double> empty;
    CHECK_THROWS_AS(rmse(a, b), std::invalid_argument);
    CHECK_THROWS_AS(rmse(empty, empty), std::invalid_argument);
    std::vector<double> inf = {std::numeric_limits<double>::infinity(), 0};
    CHECK_THROWS_AS(rmse(a, inf), std::invalid_argument);
}

TEST_CASE("rmse properties: symmetry, nonnegativity, |c| scaling") {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + rng.bounded(20);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.uniform(-100.0, 100.0);
            y[i] = rng.uniform(-100.0, 100.0);
        }
        double forward = rmse(x, y);
        CHECK(forward >= 0.0);
        CHECK(rmse(y, x) == doctest::Approx(forward).epsilon(1e-12));
        CHECK(rmse(x, x) == doctest::Approx(0.0).epsilon(1e-12));

        double c = rng.uniform(-5.0, 5.0);
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = c * x[i];
            ys[i] = c * y[i];
        }
        CHECK(rmse(xs, ys) == doctest::Approx(std::abs(c) * forward).epsilon(1e-9));
    }
}

TEST_CASE("clock_catalog sizes and ordering") {
    DeviceSpec p100 = synth::builtin_p100_device();
    auto catalog = clock_catalog(p100);
    CHECK(catalog.size() == 62);
    for (const auto& c : catalog) CHECK(c.mem_clock_mhz == 715);
    for (std::size_t i = 1; i < catalog.size(); ++i) {
        CHECK(catalog[i - 1].sm_clock_mhz < catalog[i].sm_clock_mhz);
    }
    CHECK(p100.supports({1189, 715}));
    CHECK(p100.supports({544, 715}));
    CHECK(p100.supports({1328, 715}));

    // GTX-980-like: several memory domains summing to 267 combinations.
    DeviceSpec gtx;
    gtx.name = "gtx980";
    gtx.static_power_w = 20.0;
    for (int mem : {3505, 2600, 810}) {
        for (int i = 0; i < 87; ++i) gtx.supported_clocks.push_back({135 + 15 * i, mem});
    }
    for (int i = 0; i < 6; ++i) gtx.supported_clocks.push_back({135 + 15 * i, 405});
    gtx.default_clock = {135, 3505};
    gtx.max_clock = {135 + 15 * 86, 3505};
    validate_device(gtx);
    auto gtx_catalog = clock_catalog(gtx);
    CHECK(gtx_catalog.size() == 267);
    for (std::size_t i = 1; i < gtx_catalog.size(); ++i) {
        bool ascending = gtx_catalog[i - 1].mem_clock_mhz < gtx_catalog[i].mem_clock_mhz ||
                         (gtx_catalog[i - 1].mem_clock_mhz == gtx_catalog[i].mem_clock_mhz &&
                          gtx_catalog[i - 1].sm_clock_mhz < gtx_catalog[i].sm_clock_mhz);
        CHECK(ascending);
    }

    DeviceSpec single;
    single.name = "single";
    single.supported_clocks = {{800, 700}};
    single.default_clock = {800, 700};
    single.max_clock = {800, 700};
    CHECK(clock_catalog(single).size() == 1);
}

TEST_CASE("device validation") {
    DeviceSpec d = tiny_device();
    CHECK_NOTHROW(validate_device(d));

    DeviceSpec dupes = d;
    dupes.supported_clocks.push_back({500, 715});
    CHECK_THROWS_AS(validate_device(dupes), std::invalid_argument);

    DeviceSpec bad_max = d;
    bad_max.max_clock = {500, 715};
    CHECK_THROWS_AS(validate_device(bad_max), std::invalid_argument);

    DeviceSpec missing_default = d;
    missing_default.default_clock = {600, 715};
    CHECK_THROWS_AS(validate_device(missing_default), std::invalid_argument);

    DeviceSpec empty;
    empty.name = "empty";
    CHECK_THROWS_AS(validate_device(empty), std::invalid_argument);
}

TEST_CASE("dataset construction rejects duplicates and foreign clocks") {
    DeviceSpec d = tiny_device();
    std::vector<ProfileRecord> records = {record_for("a", {500, 715}), record_for("a", {1000, 715}),
                                          record_for("b", {500, 715})};
    CHECK_NOTHROW(make_dataset(records, d));

    auto dup = records;
    dup.push_back(record_for("a", {500, 715}));
    CHECK_THROWS_AS(make_dataset(dup, d), data_error);

    auto foreign = records;
    foreign.push_back(record_for("c", {750, 715}));
    CHECK_THROWS_AS(make_dataset(foreign, d), data_error);

    auto mismatched = records;
    ProfileRecord odd = record_for("c", {500, 715});
    odd.features.numeric["extra"] = 1.0;
    mismatched.push_back(odd);
    CHECK_THROWS_AS(make_dataset(mismatched, d), data_error);
}

TEST_CASE("feature validation bounds utilisation-style features") {
    FeatureVector f;
    f.numeric["sm"] = 120.0;
    CHECK_THROWS_AS(validate_features(f), std::invalid_argument);
    f.numeric["sm"] = 80.0;
    f.numeric["gld_efficiency"] = -1.0;
    CHECK_THROWS_AS(validate_features(f), std::invalid_argument);
    f.numeric["gld_efficiency"] = 99.0;
    f.numeric["dram_read_bytes"] = 1e12;  // unbounded name
    CHECK_NOTHROW(validate_features(f));
    f.numeric["ipc"] = std::nan("");
    CHECK_THROWS_AS(validate_features(f), std::invalid_argument);
}

TEST_CASE("workload validation") {
    DeviceSpec d = tiny_device();
    Job job;
    job.app_id = "a";
    job.arrival_s = 1.0;
    job.deadline_s = 2.0;
    job.default_profile = record_for("a", d.default_clock);
    CHECK_NOTHROW(make_workload({job}, d));

    Job wrong_clock = job;
    wrong_clock.default_profile.clock = d.max_clock;
    CHECK_THROWS_AS(make_workload({wrong_clock}, d), std::invalid_argument);

    Job negative = job;
    negative.arrival_s = -0.5;
    CHECK_THROWS_AS(make_workload({negative}, d), std::invalid_argument);

    Job no_deadline = job;
    no_deadline.deadline_s = 0.0;
    CHECK_THROWS_AS(make_workload({no_deadline}, d), std::invalid_argument);
}
