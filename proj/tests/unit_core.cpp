#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "paramshap/csvio.hpp"
#include "paramshap/errors.hpp"
#include "paramshap/rational.hpp"
#include "paramshap/relation.hpp"
#include "paramshap/rng.hpp"
#include "paramshap/value.hpp"

using namespace paramshap;
using namespace paramshap::testing;

TEST_SUITE_BEGIN("core");

TEST_CASE("rational arithmetic is exact and canonical") {
  Rational a(1, 3), b(1, 6);
  CHECK(a + b == Rational(1, 2));
  CHECK(a - b == Rational(1, 6));
  CHECK(a * b == Rational(1, 18));
  CHECK(a / b == Rational(2));
  CHECK((a + b).to_string() == "1/2");
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(-2, 4).to_string() == "-1/2");
  CHECK(Rational(BigInt(6), BigInt(3)).is_integer());
  CHECK(Rational(7).denominator() == 1);
  CHECK_THROWS_AS(Rational(1, 0), ValidationError);
  CHECK_THROWS_AS(Rational(1, 2) / Rational(0), ValidationError);
}

TEST_CASE("rational parsing round-trips") {
  for (const char* text : {"0", "5", "-5", "1/2", "-7/3", "22/7"}) {
    Rational r = Rational::parse(text);
    CHECK(r.to_string() == text);
  }
  CHECK(Rational::parse("4/8") == Rational(1, 2));
  CHECK_THROWS_AS(Rational::parse("1/-2"), ValidationError);
  CHECK_THROWS_AS(Rational::parse("a"), ValidationError);
  CHECK_THROWS_AS(Rational::parse("1.5"), ValidationError);
}

TEST_CASE("factorial and binomial") {
  CHECK(factorial(0) == 1);
  CHECK(factorial(5) == 120);
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(5, 0) == 1);
  CHECK(binomial(5, 5) == 1);
  CHECK(binomial(3, 4) == 0);
  CHECK(binomial(60, 30) == BigInt("118264581564861424"));
}

TEST_CASE("values compare within their class and are typed") {
  Value i = Value::integer(2), r = Value::rational(Rational(2)), s = Value::string("2");
  CHECK(i == r);  // numeric kinds form one comparison class
  CHECK(i != s);
  CHECK(Value::compare(Value::integer(1), Value::rational(Rational(3, 2))) < 0);
  CHECK_THROWS_AS(Value::compare(i, s), ValidationError);
  CHECK(Value::storage_compare(i, s) != 0);  // storage order never throws
  CHECK(Value::integer(10).to_string() == "10");
  CHECK(Value::boolean(true).to_string() == "true");
}

TEST_CASE("lexical parsing infers kinds") {
  CHECK(Value::parse_lexical("12").kind() == ValueKind::Integer);
  CHECK(Value::parse_lexical("-3").kind() == ValueKind::Integer);
  CHECK(Value::parse_lexical("1/2").kind() == ValueKind::Rational);
  CHECK(Value::parse_lexical("true").kind() == ValueKind::Boolean);
  CHECK(Value::parse_lexical("BOS").kind() == ValueKind::String);
  CHECK(Value::parse_cell("7", ValueKind::Integer) == Value::integer(7));
  CHECK_THROWS_AS(Value::parse_cell("x", ValueKind::Integer), ValidationError);
}

TEST_CASE("coercion is lossless or refused") {
  CHECK(Value::integer(3).coerce(ValueKind::Rational) == Value::rational(Rational(3)));
  CHECK(Value::rational(Rational(4, 2)).coerce(ValueKind::Integer) == Value::integer(2));
  CHECK_FALSE(Value::rational(Rational(1, 2)).coerce(ValueKind::Integer).has_value());
  CHECK(Value::integer(3).coerce(ValueKind::String) == Value::string("3"));
}

TEST_CASE("relations deduplicate and type-check") {
  Relation r(int_schema("R", 2));
  CHECK(r.insert(int_tuple({1, 2})));
  CHECK_FALSE(r.insert(int_tuple({1, 2})));
  CHECK(r.size() == 1);
  CHECK(r.contains(int_tuple({1, 2})));
  CHECK_THROWS_AS(r.insert(Tuple{Value::string("a"), Value::integer(1)}), ValidationError);
  CHECK_THROWS_AS(r.insert(int_tuple({1})), ValidationError);
}

TEST_CASE("active domain with and without restriction") {
  Database db = db_of({int_relation("R", 2, {{1, 2}, {3, 2}}), int_relation("T", 1, {{9}})});
  auto all = active_domain(db);
  CHECK(all.size() == 4);
  auto col = active_domain(db, std::make_pair(std::string("R"), size_t{1}));
  CHECK(col.size() == 1);
  CHECK(col.count(Value::integer(2)) == 1);
}

TEST_CASE("csv field splitting handles quotes and escapes") {
  auto rows = parse_csv("a,b\n1,\"x,y\"\n2,\"he said \"\"hi\"\"\"\n");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][1] == "x,y");
  CHECK(rows[2][1] == "he said \"hi\"");
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("q\"q") == "\"q\"\"q\"");
}

TEST_CASE("database round-trips through schema and csv files") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "paramshap_csv_roundtrip";
  fs::remove_all(dir);
  fs::create_directories(dir);

  Database db = db_of({int_relation("R", 2, {{1, 2}, {3, 4}})});
  Relation s(RelationSchema("S", {{"name", ValueKind::String}, {"score", ValueKind::Rational}}));
  s.insert({Value::string("a,b"), Value::rational(Rational(1, 2))});
  s.insert({Value::string("plain"), Value::rational(Rational(3))});
  db.add_relation(s);

  std::vector<RelationSchema> schemas;
  for (const auto& [name, rel] : db.relations()) schemas.push_back(rel.schema());
  write_schema(schemas, (dir / "schema.json").string());
  write_database(db, (dir / "data").string());

  Database back = load_database((dir / "schema.json").string(), (dir / "data").string());
  CHECK(back.relation("R") == db.relation("R"));
  CHECK(back.relation("S") == db.relation("S"));
  fs::remove_all(dir);
}

TEST_CASE("csv loading rejects malformed inputs") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "paramshap_csv_bad";
  fs::remove_all(dir);
  fs::create_directories(dir / "data");
  {
    std::ofstream s(dir / "schema.json");
    s << R"({"relations":[{"name":"R","columns":[{"name":"a","kind":"integer"}]}]})";
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_database((dir / "schema.json").string(), (dir / "data").string()),
                    ValidationError);
  }
  SUBCASE("wrong header") {
    std::ofstream f(dir / "data" / "R.csv");
    f << "b\n1\n";
    f.close();
    CHECK_THROWS_AS(load_database((dir / "schema.json").string(), (dir / "data").string()),
                    ValidationError);
  }
  SUBCASE("bad cell") {
    std::ofstream f(dir / "data" / "R.csv");
    f << "a\nnope\n";
    f.close();
    CHECK_THROWS_AS(load_database((dir / "schema.json").string(), (dir / "data").string()),
                    ValidationError);
  }
  fs::remove_all(dir);
}

TEST_CASE("rng streams are deterministic and disjoint") {
  Rng a(42, 1), b(42, 1), c(42, 2);
  std::vector<uint64_t> da, dbv, dc;
  for (int i = 0; i < 16; ++i) {
    da.push_back(a.next_u64());
    dbv.push_back(b.next_u64());
    dc.push_back(c.next_u64());
  }
  CHECK(da == dbv);
  CHECK(da != dc);
  Rng d(42, 1);
  for (int i = 0; i < 200; ++i) {
    uint64_t v = d.below_u64(10);
    CHECK(v < 10);
  }
  Rng e(7);
  BigInt big = BigInt(1) << 100;
  for (int i = 0; i < 20; ++i) {
    BigInt v = e.below(big);
    CHECK(v >= 0);
    CHECK(v < big);
  }
}

TEST_SUITE_END();
