#include <doctest.h>

#include <sstream>

#include "ecomplex/io.hpp"

using namespace ecomplex;

TEST_CASE("format_double renders 12 significant digits") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(2.0 / 3.0) == "0.666666666667");
  CHECK(format_double(-1.5e-7) == "-1.5e-07");
}

TEST_CASE("score CSV round trip, sorted descending") {
  ScoreVector s;
  s.kind = ScoreKind::country;
  s.metric = "eci";
  s.labels = {"AAA", "BBB", "CCC"};
  s.values = Eigen::Vector3d(-1.0, 1.0, 0.0);
  std::ostringstream out;
  write_score_csv(out, s);
  CHECK(out.str() == "label,value\nBBB,1\nCCC,0\nAAA,-1\n");

  std::istringstream in(out.str());
  const ScoreVector back = read_score_csv(in, ScoreKind::country, "eci");
  CHECK(back.labels == std::vector<std::string>{"BBB", "CCC", "AAA"});
  CHECK(back.values == Eigen::Vector3d(1.0, 0.0, -1.0));
}

TEST_CASE("matrix CSV layout") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 0, 0.5, 2;
  std::ostringstream out;
  write_matrix_csv(out, "country", {"A", "B"}, {"p", "q"}, m);
  CHECK(out.str() == "country,p,q\nA,1,0\nB,0.5,2\n");
}

TEST_CASE("series CSV parsing and duplicate rejection") {
  std::istringstream in("country,year,value\nMKD,1998,100.5\nMKD,2008,200\n");
  const SeriesMap s = read_series_csv(in);
  CHECK(s.at({"MKD", 1998}) == 100.5);
  CHECK(s.at({"MKD", 2008}) == 200.0);

  std::istringstream dup("country,year,value\nA,2000,1\nA,2000,2\n");
  CHECK_THROWS_AS(read_series_csv(dup), Error);
}

TEST_CASE("kind CSV parsing") {
  std::istringstream in("product,kind\n205,service\n0,good\n");
  const KindMap kinds = read_kind_csv(in);
  CHECK(kinds.at("205") == ProductKind::service);
  CHECK(kinds.at("0") == ProductKind::good);

  std::istringstream bad("product,kind\n205,banana\n");
  CHECK_THROWS_AS(read_kind_csv(bad), Error);
}

TEST_CASE("exclusion list parsing") {
  std::istringstream in("LBR\nTKM,1998\n");
  const auto rows = read_exclusion_list(in);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::pair<std::string, int>{"LBR", kAllYears});
  CHECK(rows[1] == std::pair<std::string, int>{"TKM", 1998});
}

TEST_CASE("fnv1a64 is stable") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("hello") != fnv1a64("hellp"));
}

TEST_CASE("correlation and box CSVs") {
  std::ostringstream corr;
  write_correlation_csv(corr, {{2000, 0.8, 12}, {2001, -0.25, 9}});
  CHECK(corr.str() == "year,rho,n\n2000,0.8,12\n2001,-0.25,9\n");

  std::map<int, BoxStats> boxes;
  BoxStats b;
  b.median = 1;
  b.q1 = 0.5;
  b.q3 = 1.5;
  b.iqr = 1.0;
  b.lower_fence = -1.0;
  b.upper_fence = 3.0;
  b.outliers = {"AAA", "ZZZ"};
  boxes[1999] = b;
  std::ostringstream box;
  write_box_csv(box, boxes);
  CHECK(box.str() ==
        "year,median,q1,q3,iqr,lower_fence,upper_fence,outliers\n"
        "1999,1,0.5,1.5,1,-1,3,AAA;ZZZ\n");
}
