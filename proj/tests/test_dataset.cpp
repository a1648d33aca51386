#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "mrsqm/common.hpp"
#include "mrsqm/dataset.hpp"

using namespace mrsqm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("mrsqm_dataset_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path file(const std::string& name, const std::string& content) const {
    fs::path p = path / name;
    std::ofstream out(p);
    out << content;
    return p;
  }
};

} // namespace

TEST_CASE("load_ts parses values, labels and shape") {
  TempDir tmp;
  auto p = tmp.file("two.ts", "@data\n1,2,3:a\n4,5,6:b\n");
  TimeSeriesDataset ds = load_ts(p);
  CHECK(ds.size() == 2);
  CHECK(ds.length() == 3);
  CHECK(ds.num_classes() == 2);
  CHECK(ds.series[0] == std::vector<double>{1, 2, 3});
  CHECK(ds.series[1] == std::vector<double>{4, 5, 6});
  CHECK(ds.labels[0] == "a");
  CHECK(ds.class_index.at("a") == 0);
  CHECK(ds.class_index.at("b") == 1);
}

TEST_CASE("load_ts rejects ragged lines and names the offender") {
  TempDir tmp;
  auto p = tmp.file("ragged.ts", "@data\n1,2,3:a\n1,2,3,4:b\n");
  CHECK_THROWS_WITH_AS(load_ts(p), doctest::Contains("line 3"), FormatError);
}

TEST_CASE("load_ts rejects non-numeric values") {
  TempDir tmp;
  auto p = tmp.file("bad.ts", "@data\n1,zap,3:a\n");
  CHECK_THROWS_AS(load_ts(p), ParseError);
}

TEST_CASE("load_ts rejects non-finite values") {
  TempDir tmp;
  auto p = tmp.file("inf.ts", "@data\n1,inf,3:a\n");
  CHECK_THROWS_AS(load_ts(p), ParseError);
  auto q = tmp.file("nan.ts", "@data\n1,nan,3:a\n");
  CHECK_THROWS_AS(load_ts(q), ParseError);
}

TEST_CASE("load_ts requires @data") {
  TempDir tmp;
  auto p = tmp.file("nodata.ts", "@problemName x\n");
  CHECK_THROWS_AS(load_ts(p), FormatError);
}

TEST_CASE("class order follows @classLabel declaration when present") {
  TempDir tmp;
  auto p = tmp.file("decl.ts",
                    "@classLabel true z y x\n@data\n1,2:x\n3,4:y\n5,6:z\n");
  TimeSeriesDataset ds = load_ts(p);
  CHECK(ds.classes == std::vector<std::string>{"z", "y", "x"});
  CHECK(ds.class_of(0) == 2);
  CHECK(ds.class_of(2) == 0);

  auto q = tmp.file("undeclared.ts",
                    "@classLabel true a b\n@data\n1,2:a\n3,4:c\n");
  CHECK_THROWS_AS(load_ts(q), FormatError);

  // '@classLabel false' declares nothing; data order decides
  auto r = tmp.file("nodecl.ts", "@classLabel false\n@data\n1,2:y\n3,4:x\n");
  CHECK(load_ts(r).classes == std::vector<std::string>{"y", "x"});
}

TEST_CASE("class order is first appearance without a declaration") {
  TempDir tmp;
  auto p = tmp.file("plain.ts", "@data\n1,2:fast\n3,4:slow\n5,6:fast\n");
  TimeSeriesDataset ds = load_ts(p);
  CHECK(ds.classes == std::vector<std::string>{"fast", "slow"});
}

TEST_CASE("load_ts skips comments, blanks and CRLF endings") {
  TempDir tmp;
  auto p = tmp.file("messy.ts",
                    "# a comment\n\n@problemName demo\n@data\r\n1,2:a\r\n\n3,4:b\n");
  TimeSeriesDataset ds = load_ts(p);
  CHECK(ds.size() == 2);
  CHECK(ds.length() == 2);
}

TEST_CASE("load_ts accepts unlabeled data lines") {
  TempDir tmp;
  auto p = tmp.file("unlabeled.ts", "@data\n1,2,3\n4,5,6\n");
  TimeSeriesDataset ds = load_ts(p);
  CHECK_FALSE(ds.labeled());
  CHECK(ds.size() == 2);

  auto q = tmp.file("mixed.ts", "@data\n1,2,3:a\n4,5,6\n");
  CHECK_THROWS_AS(load_ts(q), FormatError);
}

TEST_CASE("load_csv with label first or last") {
  TempDir tmp;
  auto p = tmp.file("lf.csv", "0,1.0,2.0\n1,3.0,4.0\n");
  TimeSeriesDataset ds = load_csv(p, LabelColumn::First);
  CHECK(ds.size() == 2);
  CHECK(ds.length() == 2);
  CHECK(ds.classes == std::vector<std::string>{"0", "1"});
  CHECK(ds.series[0] == std::vector<double>{1.0, 2.0});

  auto q = tmp.file("ll.csv", "1.0,2.0,0\n3.0,4.0,1\n");
  TimeSeriesDataset ds2 = load_csv(q, LabelColumn::Last);
  CHECK(ds2.series == ds.series);
  CHECK(ds2.labels == ds.labels);
}

TEST_CASE("load_csv header flag skips one line") {
  TempDir tmp;
  auto p = tmp.file("h.csv", "label,v1,v2\n0,1.0,2.0\n");
  TimeSeriesDataset ds = load_csv(p, LabelColumn::First, true);
  CHECK(ds.size() == 1);
}

TEST_CASE("load_csv rejects empty files and short rows") {
  TempDir tmp;
  CHECK_THROWS_AS(load_csv(tmp.file("empty.csv", ""), LabelColumn::First), FormatError);
  CHECK_THROWS_AS(load_csv(tmp.file("short.csv", "0\n"), LabelColumn::First), FormatError);
}

TEST_CASE("single-class files load; training-time checks reject them later") {
  TempDir tmp;
  auto p = tmp.file("one.csv", "0,1.0,2.0\n");
  TimeSeriesDataset ds = load_csv(p, LabelColumn::First);
  CHECK(ds.num_classes() == 1);
}

TEST_CASE("ts round-trip preserves values and labels exactly") {
  TempDir tmp;
  auto p = tmp.file("src.ts",
                    "@data\n0.1,2.5e-3,123.456789012345678:a\n-1,0.30000000000000004,7:b\n");
  TimeSeriesDataset ds = load_ts(p);
  fs::path again = tmp.path / "copy.ts";
  write_ts(ds, again);
  TimeSeriesDataset ds2 = load_ts(again);
  CHECK(ds2.series == ds.series);
  CHECK(ds2.labels == ds.labels);
  CHECK(ds2.classes == ds.classes);
}

TEST_CASE("ts and csv loaders agree on converted data") {
  TempDir tmp;
  auto t = tmp.file("a.ts", "@data\n1.5,2,3:x\n4,5.25,6:y\n");
  auto c = tmp.file("a.csv", "x,1.5,2,3\ny,4,5.25,6\n");
  TimeSeriesDataset from_ts = load_ts(t);
  TimeSeriesDataset from_csv = load_csv(c, LabelColumn::First);
  CHECK(from_ts.series == from_csv.series);
  CHECK(from_ts.labels == from_csv.labels);
  CHECK(from_ts.classes == from_csv.classes);
}

TEST_CASE("missing file reports a format error") {
  CHECK_THROWS_AS(load_ts("/nonexistent/nope.ts"), FormatError);
}
