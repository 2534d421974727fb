#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <sstream>

#include "wsvm/dataset.hpp"

using namespace wsvm;

namespace {

Dataset parse(const std::string& text, LabelKind kind = LabelKind::binary, std::size_t dim = 0) {
  std::istringstream in(text);
  return read_libsvm(in, kind, dim);
}

std::size_t parse_error_line(const std::string& text, LabelKind kind = LabelKind::binary) {
  try {
    parse(text, kind);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("libsvm line with skipped index") {
  Dataset ds = parse("+1 1:0.5 3:1.0\n", LabelKind::binary, 3);
  REQUIRE(ds.size() == 1);
  REQUIRE(ds.dim() == 3);
  CHECK(ds.row(0)[0] == 0.5);
  CHECK(ds.row(0)[1] == 0.0);
  CHECK(ds.row(0)[2] == 1.0);
  CHECK(ds.label(0) == 1.0);
}

TEST_CASE("dimension inferred from largest index") {
  Dataset ds = parse("-1 2:1\n+1 5:2\n");
  CHECK(ds.dim() == 5);
  CHECK(ds.row(1)[4] == 2.0);
}

TEST_CASE("empty input is rejected") {
  CHECK_THROWS_WITH_AS(parse(""), "no instances", ParseError);
  CHECK_THROWS_WITH_AS(parse("\n# comment only\n"), "no instances", ParseError);
}

TEST_CASE("zero-one labels ask for remapping") {
  try {
    parse("0 1:1\n1 1:2\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("{-1,+1}") != std::string::npos);
  }
}

TEST_CASE("parse errors carry line numbers") {
  CHECK(parse_error_line("+1 1:1\n+1 1:x\n") == 2);
  CHECK(parse_error_line("+1 1:1\n-1 1:1\nfoo 1:1\n") == 3);
  CHECK(parse_error_line("+1 1:1 1:2\n") == 1);
  CHECK(parse_error_line("+1 3:1 2:2\n") == 1);
  CHECK(parse_error_line("+1 1:1\n-1 2-1\n") == 2);
}

TEST_CASE("non-ascending indices are a format error") {
  CHECK_THROWS_AS(parse("+1 3:1 2:2\n"), ParseError);
}

TEST_CASE("graded data needs qid and integer grades") {
  Dataset ds = parse("2 qid:1 1:0.5\n0 qid:1 1:0.1\n1 qid:2 1:0.3\n", LabelKind::graded);
  CHECK(ds.query(0) == 1);
  CHECK(ds.query(2) == 2);
  CHECK(ds.label(0) == 2.0);
  CHECK_THROWS_AS(parse("2 1:0.5\n", LabelKind::graded), ParseError);
  CHECK_THROWS_AS(parse("1.5 qid:1 1:0.5\n", LabelKind::graded), ParseError);
}

TEST_CASE("libsvm round trip") {
  ToyData toy = gen_toy_classification(40, 3);
  std::ostringstream out;
  write_libsvm(out, toy.data);
  Dataset back = parse(out.str(), LabelKind::binary, 2);
  REQUIRE(back.size() == toy.data.size());
  CHECK(back.inputs() == toy.data.inputs());
  CHECK(back.labels() == toy.data.labels());
}

TEST_CASE("ranking round trip keeps query ids") {
  Dataset ds = gen_ranking(3, 5, 4, 2, 11);
  std::ostringstream out;
  write_libsvm(out, ds);
  Dataset back = parse(out.str(), LabelKind::graded, 4);
  CHECK(back.queries() == ds.queries());
  CHECK(back.labels() == ds.labels());
  CHECK(back.inputs() == ds.inputs());
}

TEST_CASE("weight csv") {
  std::istringstream in("1\n0.5\n\n0\n");
  CHECK(read_weights_csv(in) == std::vector<double>{1.0, 0.5, 0.0});
  std::istringstream bad("1\n-2\n");
  CHECK_THROWS_AS(read_weights_csv(bad), ParseError);
  std::vector<double> w{0.25, 3.0, 1e-7};
  std::ostringstream out;
  write_weights_csv(out, w);
  std::istringstream back(out.str());
  CHECK(read_weights_csv(back) == w);
}

TEST_CASE("toy generator: equal case sizes") {
  ToyData toy = gen_toy_classification(400, 17);
  std::size_t pos = 0, d1 = 0;
  for (std::size_t i = 0; i < toy.data.size(); ++i) {
    pos += toy.data.label(i) > 0;
    d1 += toy.cost_group[i] == 1;
  }
  CHECK(toy.data.size() == 400);
  CHECK(pos == 200);
  CHECK(d1 == 200);
  std::size_t both = 0;
  for (std::size_t i = 0; i < 400; ++i) both += toy.data.label(i) > 0 && toy.cost_group[i] == 1;
  CHECK(both == 100);
}

TEST_CASE("toy generator: determinism and n = 4") {
  ToyData a = gen_toy_classification(400, 5), b = gen_toy_classification(400, 5);
  CHECK(a.data.inputs() == b.data.inputs());
  CHECK(a.cost_group == b.cost_group);
  ToyData c = gen_toy_classification(400, 6);
  CHECK(a.data.inputs() != c.data.inputs());

  ToyData one = gen_toy_classification(4, 1);
  REQUIRE(one.data.size() == 4);
  std::set<std::pair<double, int>> cases;
  for (std::size_t i = 0; i < 4; ++i) cases.insert({one.data.label(i), one.cost_group[i]});
  CHECK(cases.size() == 4);

  CHECK_THROWS_AS(gen_toy_classification(10, 1), ArgumentError);
  CHECK_THROWS_AS(gen_toy_classification(0, 1), ArgumentError);
}

TEST_CASE("unit box normalization") {
  Dataset ds(1, LabelKind::binary);
  for (double v : {0.0, 5.0, 10.0}) ds.push_back(std::vector<double>{v}, 1.0);
  Normalized nd = normalize(ds, NormMode::unit_box);
  CHECK(nd.data.row(0)[0] == doctest::Approx(0.0));
  CHECK(nd.data.row(1)[0] == doctest::Approx(0.5));
  CHECK(nd.data.row(2)[0] == doctest::Approx(1.0));
  CHECK(nd.constant_features.empty());

  Normalized again = normalize(nd.data, NormMode::unit_box);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(std::abs(again.data.row(i)[0] - nd.data.row(i)[0]) <= 1e-12);
}

TEST_CASE("constant feature goes to the midpoint") {
  Dataset ds(2, LabelKind::binary);
  for (double v : {1.0, 2.0, 4.0}) ds.push_back(std::vector<double>{3.0, v}, -1.0);
  Normalized nd = normalize(ds, NormMode::unit_box);
  REQUIRE(nd.constant_features == std::vector<std::size_t>{0});
  for (std::size_t i = 0; i < 3; ++i) CHECK(nd.data.row(i)[0] == 0.5);
  Normalized sb = normalize(ds, NormMode::signed_box);
  for (std::size_t i = 0; i < 3; ++i) CHECK(sb.data.row(i)[0] == 0.0);
  CHECK(sb.data.row(0)[1] == doctest::Approx(-1.0));
  CHECK(sb.data.row(2)[1] == doctest::Approx(1.0));
}

TEST_CASE("normalization inverse") {
  ToyData toy = gen_toy_classification(40, 9);
  Normalized nd = normalize(toy.data, NormMode::signed_box);
  for (std::size_t i = 0; i < toy.data.size(); ++i) {
    std::vector<double> x(nd.data.row(i).begin(), nd.data.row(i).end());
    nd.spec.inverse(x);
    CHECK(x[0] == doctest::Approx(toy.data.row(i)[0]).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(toy.data.row(i)[1]).epsilon(1e-12));
  }
}

TEST_CASE("dataset validation") {
  Dataset ds(2, LabelKind::binary);
  CHECK_THROWS_AS(ds.validate(), ArgumentError);
  CHECK_THROWS_AS(ds.push_back(std::vector<double>{1.0}, 1.0), ArgumentError);
  CHECK_THROWS_AS(ds.push_back(std::vector<double>{1.0, 2.0}, 0.0), ArgumentError);
  ds.push_back(std::vector<double>{1.0, 2.0}, 1.0);
  CHECK_NOTHROW(ds.validate());
}

TEST_CASE("rng is reproducible") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng r(1);
  double mean = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    mean += u;
  }
  CHECK(mean / 20000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("rdp features") {
  auto prices = gen_price_series(200, 4);
  Dataset ds = rdp_features(prices);
  CHECK(ds.dim() == 5);
  CHECK(ds.size() > 100);
  for (std::size_t i = 0; i < ds.size(); ++i) CHECK(std::abs(ds.label(i)) == 1.0);
  CHECK_THROWS_AS(rdp_features(std::vector<double>(10, 1.0)), ArgumentError);
}
