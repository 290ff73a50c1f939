#include "test_support.hpp"

#include "tcof/error.hpp"
#include "tcof/report.hpp"

#include <doctest.h>

#include <sstream>

TEST_SUITE("report") {
  TEST_CASE("accuracy and confusion CSV layout") {
    const auto r = tcof::make_report({"big", "small"}, {}, {0, 0, 0, 0, 1}, {0, 0, 0, 1, 0});
    std::ostringstream acc, conf;
    tcof::write_accuracy_csv(acc, r);
    tcof::write_confusion_csv(conf, r);
    CHECK(acc.str() == "category,accuracy_percent\nbig,75.00\nsmall,0.00\noverall,60.00\n");
    CHECK(conf.str() == ",big,small\nbig,3,1\nsmall,1,0\n");
  }

  TEST_CASE("perfect report") {
    const auto r = tcof::make_report({"a", "b", "c"}, {}, {0, 1, 2, 2}, {0, 1, 2, 2});
    std::ostringstream acc;
    tcof::write_accuracy_csv(acc, r);
    CHECK(acc.str() == "category,accuracy_percent\na,100.00\nb,100.00\nc,100.00\noverall,100.00\n");
  }

  TEST_CASE("files re-parse to the same numbers") {
    support::TempDir dir("report");
    const auto r = tcof::make_report({"x", "y", "z"}, {}, {0, 0, 1, 1, 1, 2}, {0, 2, 1, 1, 0, 2});
    const auto path = dir / "out/report_spatial_svm.csv";
    tcof::write_report(r, path);
    CHECK(tcof::confusion_path(path) == dir / "out/report_spatial_svm.confusion.csv");

    const auto acc = tcof::read_accuracy_csv(path);
    REQUIRE(acc.categories.size() == 3);
    CHECK(acc.categories[0].first == "x");
    CHECK(acc.categories[0].second == 50.0);
    CHECK(acc.categories[1].second == doctest::Approx(66.67));
    CHECK(acc.overall == doctest::Approx(66.67));

    const auto conf = tcof::read_confusion_csv(tcof::confusion_path(path));
    CHECK(conf.class_names == r.class_names);
    CHECK(conf.counts == r.confusion);

    std::ostringstream table;
    tcof::print_accuracy_tables(table, {path, path});
    CHECK(table.str().find("overall") != std::string::npos);
    CHECK(table.str().find("66.67") != std::string::npos);
  }

  TEST_CASE("malformed CSVs") {
    support::TempDir dir("badcsv");
    support::write_file(dir / "a.csv", "nope\n");
    CHECK_THROWS_AS(tcof::read_accuracy_csv(dir / "a.csv"), tcof::FormatError);
    support::write_file(dir / "b.csv", "category,accuracy_percent\nx,12.00\n");
    CHECK_THROWS_AS(tcof::read_accuracy_csv(dir / "b.csv"), tcof::FormatError);
    CHECK_THROWS_AS(tcof::read_accuracy_csv(dir / "missing.csv"), tcof::IoError);
  }
}
