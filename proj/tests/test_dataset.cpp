#include <sstream>

#include "doctest.h"
#include "reprofit/dataset.hpp"
#include "reprofit/rng.hpp"

using namespace reprofit;

namespace {

std::vector<SurvivalSeries> parse_survival(const std::string& text) {
    std::istringstream in(text);
    return parse_survival_table(in);
}

std::vector<ReproductionRecord> parse_repro(const std::string& text) {
    std::istringstream in(text);
    return parse_reproduction_table(in);
}

}  // namespace

TEST_CASE("parse_survival_table reads a minimal well-formed table") {
    const auto series = parse_survival(
        "replicate,concentration,time,n_alive\n"
        "r1,0,0,10\n"
        "r1,0,21,10\n");
    REQUIRE(series.size() == 1);
    CHECK(series[0].replicate_id == "r1");
    CHECK(series[0].concentration == 0.0);
    REQUIRE(series[0].observations.size() == 2);
    CHECK(series[0].observations[0] == std::pair<double, long>{0.0, 10});
    CHECK(series[0].observations[1] == std::pair<double, long>{21.0, 10});
}

TEST_CASE("parse_survival_table sorts observations by time") {
    const auto series = parse_survival(
        "replicate,concentration,time,n_alive\n"
        "r1,0,21,8\n"
        "r1,0,0,10\n"
        "r1,0,7,9\n");
    REQUIRE(series.size() == 1);
    CHECK(series[0].observations[0].first == 0.0);
    CHECK(series[0].observations[1].first == 7.0);
    CHECK(series[0].observations[2].first == 21.0);
}

TEST_CASE("parse_survival_table rejects increasing survivor counts") {
    CHECK_THROWS_WITH_AS(parse_survival("replicate,concentration,time,n_alive\n"
                                        "r1,0,0,8\n"
                                        "r1,0,7,10\n"
                                        "r1,0,21,10\n"),
                         doctest::Contains("survivors increased"), ParseError);
}

TEST_CASE("parse_survival_table reports malformed rows with line numbers") {
    CHECK_THROWS_WITH_AS(parse_survival("replicate,concentration,time,n_alive\n"
                                        "r1,0,0,10\n"
                                        "r1,zero,7,10\n"),
                         doctest::Contains("line 3"), ParseError);
    CHECK_THROWS_AS(parse_survival("replicate,concentration,time\nr1,0,0\n"), ParseError);
}

TEST_CASE("parse_survival_table rejects duplicate (replicate, time) rows") {
    CHECK_THROWS_WITH_AS(parse_survival("replicate,concentration,time,n_alive\n"
                                        "r1,0,0,10\n"
                                        "r1,0,0,10\n"
                                        "r1,0,21,10\n"),
                         doctest::Contains("duplicate time"), ParseError);
}

TEST_CASE("parse_survival_table requires a day-0 observation") {
    CHECK_THROWS_WITH_AS(parse_survival("replicate,concentration,time,n_alive\n"
                                        "r1,0,7,10\n"
                                        "r1,0,21,10\n"),
                         doctest::Contains("time 0"), ParseError);
}

TEST_CASE("chlordan-shaped table: 60 series of 22 timepoints") {
    // 6 concentrations x 10 replicates of 1 animal, day 0 plus 21 daily measures
    const double concs[] = {0, 0.18, 0.73, 1.82, 2.9, 7};
    std::string text = "replicate,concentration,time,n_alive\n";
    for (int ci = 0; ci < 6; ++ci) {
        for (int rep = 0; rep < 10; ++rep) {
            const std::string id = "c" + std::to_string(ci) + "r" + std::to_string(rep);
            for (int t = 0; t <= 21; ++t) {
                text += id + "," + format_double(concs[ci]) + "," + std::to_string(t) + ",1\n";
            }
        }
    }
    const auto series = parse_survival(text);
    REQUIRE(series.size() == 60);
    for (const auto& s : series) CHECK(s.observations.size() == 22);
}

TEST_CASE("compute_nid applies the midpoint rule") {
    SUBCASE("survivor contributes the full duration") {
        SurvivalSeries s{"r1", 0.0, {}};
        for (int t = 0; t <= 21; ++t) s.observations.emplace_back(t, 1);
        CHECK(compute_nid(s, 21.0) == 21.0);
    }
    SUBCASE("animal alive at day 4, found dead at day 5, contributes 4.5") {
        SurvivalSeries s{"r1", 0.0, {}};
        for (int t = 0; t <= 4; ++t) s.observations.emplace_back(t, 1);
        for (int t = 5; t <= 21; ++t) s.observations.emplace_back(t, 0);
        CHECK(compute_nid(s, 21.0) == 4.5);
    }
    SUBCASE("10 animals observed weekly, two deaths in (7,14]: 2*10.5 + 8*21 = 189") {
        SurvivalSeries s{"r1", 0.0, {{0, 10}, {7, 10}, {14, 8}, {21, 8}}};
        CHECK(compute_nid(s, 21.0) == 189.0);
    }
    SUBCASE("missing final observation is an error") {
        SurvivalSeries s{"r1", 0.0, {{0, 10}, {7, 10}}};
        CHECK_THROWS_AS(compute_nid(s, 21.0), std::invalid_argument);
    }
}

TEST_CASE("NID is additive across animals") {
    // Per-animal series summed equals the pooled replicate series, exactly.
    Rng rng(991);
    for (int trial = 0; trial < 50; ++trial) {
        const int animals = 1 + static_cast<int>(rng.uniform() * 12);
        const double duration = 21.0;
        std::vector<double> death_day(animals, -1.0);  // -1 = survives
        for (auto& dd : death_day) {
            if (rng.uniform() < 0.5) dd = 1.0 + std::floor(rng.uniform() * 21.0);
        }
        SurvivalSeries pooled{"pool", 0.0, {}};
        double per_animal_sum = 0.0;
        for (int t = 0; t <= 21; ++t) {
            long alive = 0;
            for (double dd : death_day) alive += (dd < 0.0 || t < dd) ? 1 : 0;
            pooled.observations.emplace_back(t, alive);
        }
        for (double dd : death_day) {
            SurvivalSeries one{"a", 0.0, {}};
            for (int t = 0; t <= 21; ++t) one.observations.emplace_back(t, (dd < 0.0 || t < dd) ? 1 : 0);
            per_animal_sum += compute_nid(one, duration);
        }
        const double pooled_nid = compute_nid(pooled, duration);
        CHECK(pooled_nid == per_animal_sum);
        CHECK(pooled_nid > 0.0);
        CHECK(pooled_nid <= animals * duration);
    }
}

TEST_CASE("zero mortality gives NID = initial_count * duration exactly") {
    SurvivalSeries s{"r1", 0.5, {{0, 20}, {10.5, 20}, {21, 20}}};
    CHECK(compute_nid(s, 21.0) == 20.0 * 21.0);
}

TEST_CASE("assemble_dataset joins tables and computes NID") {
    const auto survival = parse_survival(
        "replicate,concentration,time,n_alive\n"
        "a,0,0,10\na,0,7,10\na,0,14,8\na,0,21,8\n"
        "b,1.5,0,10\nb,1.5,7,10\nb,1.5,14,10\nb,1.5,21,10\n");
    const auto repro = parse_repro(
        "replicate,concentration,n_offspring\n"
        "a,0,189\n"
        "b,1.5,50\n");
    const auto out = assemble_dataset(survival, repro, 21.0, "mg/L");
    REQUIRE(out.dataset.replicates.size() == 2);
    const auto& a = out.dataset.replicates[0];
    CHECK(a.replicate_id == "a");
    CHECK(a.nid == 189.0);
    CHECK(a.had_mortality);
    CHECK(reproduction_rate(a) == 1.0);
    const auto& b = out.dataset.replicates[1];
    CHECK(b.nid == 210.0);
    CHECK_FALSE(b.had_mortality);
}

TEST_CASE("assemble_dataset errors name the unmatched replicate") {
    const auto survival = parse_survival(
        "replicate,concentration,time,n_alive\n"
        "a,0,0,10\na,0,21,10\n");
    const auto repro = parse_repro(
        "replicate,concentration,n_offspring\n"
        "a,0,10\nzz,1,5\n");
    CHECK_THROWS_WITH_AS(assemble_dataset(survival, repro, 21.0), doctest::Contains("zz"),
                         std::invalid_argument);
}

TEST_CASE("assemble_dataset rejects concentration mismatches") {
    const auto survival = parse_survival(
        "replicate,concentration,time,n_alive\n"
        "a,0,0,10\na,0,21,10\n");
    const auto repro = parse_repro("replicate,concentration,n_offspring\na,0.5,10\n");
    CHECK_THROWS_WITH_AS(assemble_dataset(survival, repro, 21.0), doctest::Contains("mismatch"),
                         std::invalid_argument);
}

TEST_CASE("all animals found dead at day 1 still yields a retained replicate") {
    // 10 deaths in (0,1] contribute 10 * 0.5 = 5 individual-days.
    std::string text = "replicate,concentration,time,n_alive\nk,2,0,10\n";
    for (int t = 1; t <= 21; ++t) text += "k,2," + std::to_string(t) + ",0\n";
    const auto survival = parse_survival(text);
    const auto repro = parse_repro("replicate,concentration,n_offspring\nk,2,3\n");
    const auto out = assemble_dataset(survival, repro, 21.0);
    REQUIRE(out.dataset.replicates.size() == 1);
    CHECK(out.dataset.replicates[0].nid == 5.0);
}

TEST_CASE("replicates with zero initial animals are dropped with a warning") {
    const auto survival = parse_survival(
        "replicate,concentration,time,n_alive\n"
        "a,0,0,10\na,0,21,10\n"
        "ghost,1,0,0\nghost,1,21,0\n");
    const auto repro = parse_repro(
        "replicate,concentration,n_offspring\n"
        "a,0,10\nghost,1,0\n");
    const auto out = assemble_dataset(survival, repro, 21.0);
    CHECK(out.dataset.replicates.size() == 1);
    REQUIRE(out.warnings.size() >= 1);
    CHECK(out.warnings[0].find("ghost") != std::string::npos);
}

TEST_CASE("reproduction_rate is offspring per individual-day") {
    CHECK(reproduction_rate({"x", 1.0, 105, 21.0, false}) == 5.0);
    CHECK(reproduction_rate({"x", 1.0, 0, 33.5, false}) == 0.0);
}

TEST_CASE("canonical CSV round-trips bit-identically") {
    const std::string survival_text =
        "replicate,concentration,time,n_alive\n"
        "b2,0.73,0,10\nb2,0.73,10.5,9\nb2,0.73,21,9\n"
        "a1,0,0,10\na1,0,10.5,10\na1,0,21,10\n";
    const auto parsed = parse_survival(survival_text);
    const std::string canon = to_survival_csv(parsed);
    std::istringstream in(canon);
    const std::string again = to_survival_csv(parse_survival_table(in));
    CHECK(canon == again);

    const std::string repro_text = "replicate,concentration,n_offspring\nb2,0.73,88\na1,0,120\n";
    const std::string canon2 = to_reproduction_csv(parse_repro(repro_text));
    std::istringstream in2(canon2);
    const std::string again2 = to_reproduction_csv(parse_reproduction_table(in2));
    CHECK(canon2 == again2);
}

TEST_CASE("format_double round-trips through parsing") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const double x = std::exp(rng.uniform(-20.0, 20.0)) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(0.73) == "0.73");
    CHECK(format_double(21.0) == "21");
}
