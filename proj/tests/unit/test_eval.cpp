#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "table_fixture.hpp"
#include "tollcast/eval/metrics.hpp"
#include "tollcast/eval/split.hpp"
#include "tollcast/eval/suite.hpp"

using namespace tollcast;
using namespace tollcast::eval;
using fixture::random_table;

namespace {

std::vector<Date> weekdays(Date from, Date to) {
  std::vector<Date> out;
  for (Date d = from; d <= to; d = d + 1) {
    if (d.weekday() < 5) out.push_back(d);
  }
  return out;
}

std::string first_line(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST_CASE("make_split over 18 months") {
  const auto days = weekdays(Date::parse("2018-01-01"), Date::parse("2019-06-30"));
  const auto s = make_split(days, 7);
  CHECK(s.test_days.size() == 36);
  const Date last = Date::parse("2019-06-30");
  for (const Date d : s.validation_days) CHECK(last - d < 21);
  // 2019-06-10 .. 2019-06-28 holds 15 weekdays.
  CHECK(s.validation_days.size() == 15);
  std::set<Date> all;
  for (const auto* part : {&s.train_days, &s.validation_days, &s.test_days}) {
    for (const Date d : *part) CHECK(all.insert(d).second);
  }
  CHECK(all.size() == days.size());
  std::map<int, int> per_month;
  for (const Date d : s.test_days) ++per_month[d.month_key()];
  CHECK(per_month.size() == 18);
  for (const auto& [m, n] : per_month) CHECK(n == 2);

  CHECK(make_split(days, 7) == s);
  CHECK(make_split(days, 8).test_days != s.test_days);
}

TEST_CASE("make_split errors") {
  CHECK_THROWS(make_split(weekdays(Date::parse("2019-01-01"), Date::parse("2019-01-31")), 1));
  CHECK_THROWS(make_split({}, 1));
  // April 1-5 all fall inside the validation tail: no eligible test day.
  CHECK_THROWS(make_split(weekdays(Date::parse("2019-02-01"), Date::parse("2019-04-05")), 1));
  CHECK_NOTHROW(make_split(weekdays(Date::parse("2019-01-01"), Date::parse("2019-03-31")), 1));
}

TEST_CASE("compute_metrics") {
  const std::vector<double> y{10, 20}, yhat{12, 16};
  const auto m = compute_metrics(y, yhat, 0.01);
  CHECK(m.mae == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(*m.mape == doctest::Approx(0.20).epsilon(1e-15));
  CHECK(*m.r2 == doctest::Approx(0.6).epsilon(1e-15));

  const auto perfect = compute_metrics(y, y, 0.01);
  CHECK(perfect.mae == 0.0);
  CHECK(*perfect.mape == 0.0);
  CHECK(*perfect.r2 == 1.0);

  const std::vector<double> mean{15, 15};
  CHECK(*compute_metrics(y, mean, 0.01).r2 == 0.0);

  const std::vector<double> flat{5, 5, 5};
  const auto undefined = compute_metrics(flat, std::vector<double>{4, 5, 6}, 0.01);
  CHECK_FALSE(undefined.r2);
  CHECK(undefined.mae == doctest::Approx(2.0 / 3.0));

  // Entries below the guard are left out of MAPE only.
  const auto guarded = compute_metrics(std::vector<double>{0.0, 10.0}, std::vector<double>{1.0, 12.0}, 0.01);
  CHECK(*guarded.mape == doctest::Approx(0.2));
  CHECK(guarded.mae == doctest::Approx(1.5));

  CHECK_THROWS(compute_metrics(std::vector<double>{1.0}, std::vector<double>{1.0}, 0.01));
  CHECK_THROWS(compute_metrics(y, std::vector<double>{1.0, 2.0, 3.0}, 0.01));
}

TEST_CASE("error_distribution") {
  const auto sym = error_distribution(std::vector<double>{-2, -1, 1, 2});
  CHECK(sym.median == 0.0);
  const auto b = error_distribution(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(b.q1 == doctest::Approx(2.75));
  CHECK(b.median == doctest::Approx(4.5));
  CHECK(b.q3 == doctest::Approx(6.25));
  CHECK(b.outliers == 0);
  CHECK(b.whisker_low == 1.0);
  CHECK(b.whisker_high == 8.0);
  const auto flat = error_distribution(std::vector<double>{3, 3, 3, 3, 3});
  CHECK(flat.q1 == flat.q3);
  CHECK(flat.outliers == 0);
  const auto out = error_distribution(std::vector<double>{1, 2, 3, 4, 100});
  CHECK(out.outliers == 1);
  CHECK(out.whisker_high == 4.0);
  CHECK(out.max == 100.0);
  CHECK_THROWS(error_distribution(std::vector<double>{1, 2, 3}));

  std::mt19937_64 rng(2);
  std::student_t_distribution<double> t(2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(4 + trial % 50);
    for (auto& x : v) x = t(rng);
    const auto s = error_distribution(v);
    REQUIRE(s.min <= s.whisker_low);
    REQUIRE(s.whisker_low <= s.q1);
    REQUIRE(s.q1 <= s.median);
    REQUIRE(s.median <= s.q3);
    REQUIRE(s.q3 <= s.whisker_high);
    REQUIRE(s.whisker_high <= s.max);
  }
}

TEST_CASE("evaluate_suite") {
  const Date start = Date::parse("2019-01-07");
  SUBCASE("persistence on a constant series has zero error") {
    const auto table = random_table(60, 3, [](const fusion::FeatureRow& r, int) {
      return static_cast<double>(r.toll_now.in_cents());
    }, TargetKind::TollPrice, start);
    const auto split = make_split(table.days(), 1);
    const auto r = evaluate_suite({}, table, split);
    CHECK(r.metrics.empty());
    std::vector<models::ModelArtifact> arts;
    for (auto h : HorizonIndex::all()) arts.push_back(models::fit_persistence(table, h));
    const auto full = evaluate_suite(arts, table, split);
    REQUIRE(full.metrics.size() == 5);
    for (const auto& e : full.metrics) CHECK(e.metrics.mae == 0.0);
  }
  SUBCASE("a perfect predictor scores zero and persistence is added") {
    const auto table = random_table(60, 4, [](const fusion::FeatureRow& r, int h) {
      return static_cast<double>(r.toll_now.in_cents()) + 25.0 * h;
    }, TargetKind::TollPrice, start);
    const auto d = models::make_design(table, HorizonIndex{2});
    std::vector<std::size_t> all(d.rows);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    ForestParams fp;
    fp.min_leaf_size = 1;
    fp.max_depth = 30;
    fp.features_per_split = 7;
    std::mt19937_64 rng(1);
    models::ModelArtifact perfect = models::fit_persistence(table, HorizonIndex{2});
    perfect.algorithm = models::Algorithm::RandomForest;
    perfect.payload = models::Forest{fp, {models::fit_tree(d, all, fp, rng)}};

    const auto split = make_split(table.days(), 1);
    const auto r = evaluate_suite({perfect}, table, split, {.include_train = true});
    CHECK(r.test(models::Algorithm::RandomForest, HorizonIndex{2}).mae == 0.0);
    CHECK(r.test(models::Algorithm::Persistence, HorizonIndex{2}).mae == doctest::Approx(50.0));
    CHECK(r.metrics.size() == 4);
    CHECK(r.boxes.size() == 2);
    const std::size_t test_rows = table.subset(split.test_days).size();
    CHECK(r.test(models::Algorithm::RandomForest, HorizonIndex{2}).n == test_rows);
    CHECK(r.by_day.size() == 2 * split.test_days.size());

    const auto dir = std::filesystem::temp_directory_path() / "tollcast_eval_test";
    std::filesystem::remove_all(dir);
    const auto files = write_suite_outputs(r, table, dir, true);
    CHECK(files.size() == 10);
    CHECK(first_line(dir / "metrics.csv") == kMetricsHeader);
    CHECK(first_line(dir / "errors_boxstats.csv") == kBoxStatsHeader);
    CHECK(first_line(dir / "scatter_toll_vs_ttdiff.csv") == kScatterHeader);
    CHECK(first_line(dir / "errors_box.svg").rfind("<svg", 0) == 0);
    std::ifstream metrics(dir / "metrics.csv");
    std::string header, line;
    std::getline(metrics, header);
    std::getline(metrics, line);
    CHECK(line.rfind("persistence,12,test,50,", 0) == 0);
    std::filesystem::remove_all(dir);
  }
  SUBCASE("schema mismatch is an error") {
    const auto table = random_table(60, 5, [](const fusion::FeatureRow&, int) { return 5.0; },
                                    TargetKind::TollPrice, start);
    const auto tt = random_table(60, 5, [](const fusion::FeatureRow&, int) { return 5.0; },
                                 TargetKind::TravelTimeDifference, start);
    const auto split = make_split(table.days(), 1);
    CHECK_THROWS_AS(evaluate_suite({models::fit_persistence(tt, HorizonIndex{1})}, table, split),
                    models::SchemaMismatch);
  }
}
