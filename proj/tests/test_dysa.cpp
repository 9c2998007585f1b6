#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "sliceq/dysa.hpp"
#include "test_support.hpp"

using namespace sliceq;
using namespace sliceq::dysa;

namespace {

std::vector<SliceConfig> catalog4() {
    return {SliceConfig::make(0, 5.0), SliceConfig::make(1, 10.0),
            SliceConfig::make(2, 15.0), SliceConfig::make(3, 20.0)};
}

// A registry whose estimator for `target` is one linear model on the raw
// feature at `feature_index` (identity scaling), so threshold values are
// exactly computable.
modsys::ModelRegistry feature_registry(KqiId target, int feature_index,
                                       double coefficient, double intercept) {
    modsys::TrainedModel model;
    model.kind = modsys::RegressorKind::LR;
    model.target = target;
    model.scaling.mean.assign(kFeatureCount, 0.0);
    model.scaling.stddev.assign(kFeatureCount, 1.0);
    model.scaling.constant.assign(kFeatureCount, false);
    modsys::LinearModel lin;
    lin.coefficients.assign(kFeatureCount, 0.0);
    lin.coefficients[feature_index] = coefficient;
    lin.intercept = intercept;
    model.params = lin;

    modsys::ModelRegistry registry;
    modsys::SelectedModel sel;
    sel.model = std::move(model);
    sel.cv_r2 = 1.0;
    registry.selected.emplace(target, std::move(sel));
    return registry;
}

// Estimator that reproduces the deterministic link throughput exactly
// (coefficient 1 on the mac-throughput feature).
modsys::ModelRegistry link_registry() {
    return feature_registry(KqiId::AvgThroughput, 4, 1.0, 0.0);
}

RadioConditions radio_at(double rsrp) {
    return netsim::derive_radio(rsrp, netsim::ChannelParams{});
}

}  // namespace

TEST_CASE("alpha is zero for a perfect model") {
    Dataset rows;
    for (int i = 0; i < 12; ++i) {
        rows.push_back(testing::make_row(-90.0 - 2.0 * i, 10.0, i));
        rows.back().kqi.avg_throughput = 1.0 + 0.5 * i;
    }
    modsys::Hyperparams hyper;
    hyper.dtr_max_depth = 0;
    hyper.dtr_min_leaf = 1;
    const modsys::TrainedModel model =
        modsys::fit_kqi(modsys::RegressorKind::DTR, rows,
                        KqiId::AvgThroughput, hyper);
    CHECK(alpha_from_training(model, rows, 0.9) == 0.0);
}

TEST_CASE("alpha nearest-rank percentile on a lopsided residual set") {
    // Constant estimator at 0; actuals give residuals {1 x9, 9}.
    const auto registry = feature_registry(KqiId::AvgThroughput, 0, 0.0, 0.0);
    const modsys::TrainedModel& model =
        registry.at(KqiId::AvgThroughput).model;
    Dataset rows;
    for (int i = 0; i < 10; ++i) {
        rows.push_back(testing::make_row(-95.0, 10.0, i));
        rows.back().kqi.avg_throughput = (i == 9) ? 9.0 : 1.0;
    }
    // ceil((10-1) * 0.9) = 9 -> the largest residual.
    CHECK(alpha_from_training(model, rows, 0.9) == 9.0);
    // A midrange percentile stays at the bulk value.
    CHECK(alpha_from_training(model, rows, 0.5) == 1.0);
}

TEST_CASE("alpha rejects degenerate arguments") {
    const auto registry = feature_registry(KqiId::AvgThroughput, 0, 0.0, 0.0);
    const modsys::TrainedModel& model =
        registry.at(KqiId::AvgThroughput).model;
    const Dataset rows = {testing::make_row()};
    CHECK_THROWS_AS((void)alpha_from_training(model, rows, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)alpha_from_training(model, rows, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)alpha_from_training(model, {}, 0.9),
                    std::invalid_argument);
    modsys::TrainedModel untargeted = model;
    untargeted.target.reset();
    CHECK_THROWS_AS((void)alpha_from_training(untargeted, rows, 0.9),
                    std::invalid_argument);
}

TEST_CASE("threshold arithmetic and compliance") {
    SecurityMargin margin;
    margin.alpha[KqiId::AvgThroughput] = 0.5;
    const KqiTarget target{KqiId::AvgThroughput, Comparator::GreaterEqual,
                           4.0};

    CHECK(threshold(5.0, target, margin) == 4.5);
    CHECK(threshold_compliant(threshold(5.0, target, margin), target));
    CHECK(threshold(4.2, target, margin) == doctest::Approx(3.7));
    CHECK(!threshold_compliant(threshold(4.2, target, margin), target));

    const KqiTarget ceil_target{KqiId::InitialTime, Comparator::LessEqual,
                                2.0};
    SecurityMargin init_margin;
    init_margin.alpha[KqiId::InitialTime] = 0.3;
    CHECK(threshold(1.5, ceil_target, init_margin) == 1.8);  // added, not subtracted
    CHECK(threshold_compliant(1.8, ceil_target));

    SecurityMargin none;
    CHECK(threshold(4.2, target, none) == 4.2);  // alpha defaults to 0

    SecurityMargin bad;
    bad.alpha[KqiId::AvgThroughput] = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("select_config single compliant config") {
    const auto registry = link_registry();
    const std::vector<SliceConfig> catalog = {SliceConfig::make(0, 10.0)};
    const std::vector<KqiTarget> targets = {
        {KqiId::AvgThroughput, Comparator::GreaterEqual, 4.0}};
    const auto chosen = select_config(targets, radio_at(-100.0), registry,
                                      catalog, {}, netsim::ChannelParams{});
    REQUIRE(chosen.has_value());
    CHECK(chosen->config_id == 0);
}

TEST_CASE("select_config picks the smallest total slack") {
    // At -100 dBm the link estimates are 3.75/7.5/11.25/15 Mbit/s; with
    // alpha 0.5 and a >= 4 bound only 10/15/20 MHz comply and 10 MHz is
    // closest.
    const auto registry = link_registry();
    SecurityMargin margin;
    margin.alpha[KqiId::AvgThroughput] = 0.5;
    const std::vector<KqiTarget> targets = {
        {KqiId::AvgThroughput, Comparator::GreaterEqual, 4.0}};
    const auto chosen = select_config(targets, radio_at(-100.0), registry,
                                      catalog4(), margin,
                                      netsim::ChannelParams{});
    REQUIRE(chosen.has_value());
    CHECK(chosen->bandwidth_mhz == 10.0);
}

TEST_CASE("select_config returns nothing at the clamp floor") {
    const auto registry = link_registry();
    const std::vector<KqiTarget> targets = {
        {KqiId::AvgThroughput, Comparator::GreaterEqual, 4.0}};
    const auto chosen = select_config(targets, radio_at(-140.0), registry,
                                      catalog4(), {},
                                      netsim::ChannelParams{});
    CHECK(!chosen.has_value());
}

TEST_CASE("select_config slack ties resolve to the smaller bandwidth") {
    // Estimator depends only on rsrp: every config has identical slack.
    const auto registry = feature_registry(KqiId::AvgThroughput, 0, 0.1, 14.0);
    const std::vector<KqiTarget> targets = {
        {KqiId::AvgThroughput, Comparator::GreaterEqual, 2.0}};
    const auto chosen = select_config(targets, radio_at(-90.0), registry,
                                      catalog4(), {},
                                      netsim::ChannelParams{});
    REQUIRE(chosen.has_value());
    CHECK(chosen->bandwidth_mhz == 5.0);
}

TEST_CASE("select_config error paths") {
    const auto registry = link_registry();
    const std::vector<KqiTarget> targets = {
        {KqiId::AvgThroughput, Comparator::GreaterEqual, 4.0}};
    CHECK_THROWS_AS((void)select_config(targets, radio_at(-90.0), registry,
                                        {}, {}, netsim::ChannelParams{}),
                    std::invalid_argument);
    const std::vector<KqiTarget> missing = {
        {KqiId::ShareQ360, Comparator::GreaterEqual, 0.5}};
    CHECK_THROWS_AS((void)select_config(missing, radio_at(-90.0), registry,
                                        catalog4(), {},
                                        netsim::ChannelParams{}),
                    std::invalid_argument);
    const std::vector<KqiTarget> bad_bound = {
        {KqiId::ShareQ360, Comparator::GreaterEqual, 1.5}};
    CHECK_THROWS_AS((void)select_config(bad_bound, radio_at(-90.0), registry,
                                        catalog4(), {},
                                        netsim::ChannelParams{}),
                    std::invalid_argument);
}

TEST_CASE("larger margins never turn non-compliant configs compliant") {
    const auto registry = link_registry();
    const std::vector<KqiTarget> targets = {
        {KqiId::AvgThroughput, Comparator::GreaterEqual, 5.0}};
    for (double rsrp = -130.0; rsrp <= -70.0; rsrp += 3.7) {
        std::set<int> previous;
        bool first = true;
        for (const double a : {0.0, 0.5, 1.0, 2.0, 4.0}) {
            SecurityMargin margin;
            margin.alpha[KqiId::AvgThroughput] = a;
            std::set<int> compliant;
            for (const auto& config : catalog4()) {
                const auto chosen =
                    select_config(targets, radio_at(rsrp), registry,
                                  {config}, margin, netsim::ChannelParams{});
                if (chosen) compliant.insert(config.config_id);
            }
            if (!first) {
                for (int id : compliant) REQUIRE(previous.count(id) == 1);
            }
            previous = compliant;
            first = false;
        }
    }
}

TEST_CASE("monitor holds a constant allocation on a constant trace") {
    const auto registry = link_registry();
    const std::vector<KqiTarget> targets = {
        {KqiId::AvgThroughput, Comparator::GreaterEqual, 4.0}};
    std::vector<std::pair<double, RadioConditions>> trace;
    for (int i = 0; i < 20; ++i) {
        trace.emplace_back(10.0 * i, radio_at(-100.0));
    }
    const AllocationTimeline timeline =
        run_monitor(trace, targets, registry, catalog4(), {}, {},
                    netsim::ChannelParams{});
    CHECK(timeline.events.empty());
    REQUIRE(timeline.samples.size() == trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        CHECK(timeline.samples[i].time_s == trace[i].first);
        REQUIRE(timeline.samples[i].config.has_value());
        CHECK(timeline.samples[i].config->config_id ==
              timeline.samples[0].config->config_id);
        CHECK(timeline.samples[i].compliant);
        CHECK(!timeline.samples[i].reconfig_event);
    }
}

TEST_CASE("monitor commits one reconfiguration after hysteresis") {
    const auto registry = link_registry();
    SecurityMargin margin;
    margin.alpha[KqiId::AvgThroughput] = 0.5;
    const std::vector<KqiTarget> targets = {
        {KqiId::AvgThroughput, Comparator::GreaterEqual, 4.0}};
    // -100 dBm selects 10 MHz; -90 dBm selects 5 MHz (smaller slack).
    std::vector<std::pair<double, RadioConditions>> trace;
    for (int i = 0; i < 4; ++i) trace.emplace_back(10.0 * i, radio_at(-100.0));
    for (int i = 4; i < 12; ++i) trace.emplace_back(10.0 * i, radio_at(-90.0));

    MonitorParams params;
    params.hysteresis = 3;
    params.reconfig_time_s = 15.0;
    const AllocationTimeline timeline =
        run_monitor(trace, targets, registry, catalog4(), margin, params,
                    netsim::ChannelParams{});
    REQUIRE(timeline.events.size() == 1);
    CHECK(timeline.events[0].time_s == 60.0);  // third -90 sample
    CHECK(timeline.events[0].from->bandwidth_mhz == 10.0);
    CHECK(timeline.events[0].to->bandwidth_mhz == 5.0);
    CHECK(timeline.events[0].duration_s == 15.0);

    // The committing sample and any sample within tau are non-compliant.
    CHECK(timeline.samples[6].reconfig_event);
    CHECK(!timeline.samples[6].compliant);
    CHECK(timeline.samples[8].compliant);  // 20 s later, outage over
}

TEST_CASE("degrading to the clamp floor raises an alarm transition") {
    const auto registry = link_registry();
    const std::vector<KqiTarget> targets = {
        {KqiId::AvgThroughput, Comparator::GreaterEqual, 4.0}};
    std::vector<std::pair<double, RadioConditions>> trace;
    for (int i = 0; i < 5; ++i) trace.emplace_back(i, radio_at(-80.0));
    for (int i = 5; i < 12; ++i) trace.emplace_back(i, radio_at(-140.0));

    const AllocationTimeline timeline =
        run_monitor(trace, targets, registry, catalog4(), {}, {},
                    netsim::ChannelParams{});
    REQUIRE(timeline.events.size() == 1);
    CHECK(timeline.events[0].from.has_value());
    CHECK(!timeline.events[0].to.has_value());
    const auto& last = timeline.samples.back();
    CHECK(!last.config.has_value());
    CHECK(!last.compliant);
    REQUIRE(last.rho.size() == 1);
    CHECK(std::isnan(last.rho[0]));
}

TEST_CASE("lower hysteresis reconfigures at least as often") {
    const auto registry = link_registry();
    SecurityMargin margin;
    margin.alpha[KqiId::AvgThroughput] = 0.5;
    const std::vector<KqiTarget> targets = {
        {KqiId::AvgThroughput, Comparator::GreaterEqual, 4.0}};
    std::vector<std::pair<double, RadioConditions>> trace;
    for (int i = 0; i < 30; ++i) {
        trace.emplace_back(i, radio_at(i % 2 ? -90.0 : -100.0));
    }
    MonitorParams fast{0.0, 1};
    MonitorParams slow{0.0, 5};
    const auto events_fast =
        run_monitor(trace, targets, registry, catalog4(), margin, fast,
                    netsim::ChannelParams{})
            .events.size();
    const auto events_slow =
        run_monitor(trace, targets, registry, catalog4(), margin, slow,
                    netsim::ChannelParams{})
            .events.size();
    CHECK(events_fast >= events_slow);
    CHECK(events_fast > 0);
}

TEST_CASE("monitor rejects empty or unsorted traces") {
    const auto registry = link_registry();
    const std::vector<KqiTarget> targets = {
        {KqiId::AvgThroughput, Comparator::GreaterEqual, 4.0}};
    CHECK_THROWS_AS((void)run_monitor({}, targets, registry, catalog4(), {},
                                      {}, netsim::ChannelParams{}),
                    std::invalid_argument);
    std::vector<std::pair<double, RadioConditions>> bad = {
        {1.0, radio_at(-90.0)}, {1.0, radio_at(-90.0)}};
    CHECK_THROWS_AS((void)run_monitor(bad, targets, registry, catalog4(), {},
                                      {}, netsim::ChannelParams{}),
                    std::invalid_argument);
}

TEST_CASE("radio trace CSV round-trip and error reporting") {
    testing::TempDir dir("dysa_trace");
    std::vector<std::pair<double, RadioConditions>> trace = {
        {0.0, radio_at(-92.5)}, {5.0, radio_at(-97.25)}};
    const auto path = dir / "trace.csv";
    save_radio_trace(trace, path);
    const auto loaded = load_radio_trace(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].second.rsrp == trace[0].second.rsrp);
    CHECK(loaded[1].first == 5.0);

    const auto bad = dir / "bad.csv";
    {
        std::ofstream out(bad);
        out << "time_s,rsrp_dbm,rsrq_db,rssi_dbm\n";
        out << "0,-90,-6,-70\n";
        out << "1,-200,-6,-70\n";  // rsrp out of range
    }
    CHECK_THROWS_WITH_AS((void)load_radio_trace(bad),
                         doctest::Contains("line 3"), std::runtime_error);

    const auto unsorted = dir / "unsorted.csv";
    {
        std::ofstream out(unsorted);
        out << "time_s,rsrp_dbm,rsrq_db,rssi_dbm\n";
        out << "5,-90,-6,-70\n";
        out << "5,-91,-6,-70\n";
    }
    CHECK_THROWS_WITH_AS((void)load_radio_trace(unsorted),
                         doctest::Contains("strictly increasing"),
                         std::runtime_error);
}

TEST_CASE("timeline CSV carries per-target threshold columns") {
    testing::TempDir dir("dysa_timeline");
    const auto registry = link_registry();
    const std::vector<KqiTarget> targets = {
        {KqiId::AvgThroughput, Comparator::GreaterEqual, 4.0}};
    std::vector<std::pair<double, RadioConditions>> trace = {
        {0.0, radio_at(-100.0)}, {10.0, radio_at(-100.0)}};
    const AllocationTimeline timeline =
        run_monitor(trace, targets, registry, catalog4(), {}, {},
                    netsim::ChannelParams{});
    const auto path = dir / "timeline.csv";
    save_timeline(timeline, targets, path);

    std::ifstream in(path);
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header ==
          "time_s,rsrp_dbm,rsrq_db,rssi_dbm,config_id,bandwidth_mhz,"
          "compliant,reconfig,rho_avg_tput_mbps");
    std::string row;
    int rows = 0;
    while (std::getline(in, row)) ++rows;
    CHECK(rows == 2);
}

TEST_CASE("margins import from a registry") {
    auto registry = link_registry();
    registry.selected.at(KqiId::AvgThroughput).alpha = 0.75;
    const SecurityMargin margin = SecurityMargin::from_registry(registry);
    CHECK(margin.get(KqiId::AvgThroughput) == 0.75);
    CHECK(margin.get(KqiId::ShareQ360) == 0.0);
}
