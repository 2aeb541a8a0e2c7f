#include "txa/io.hpp"

#include "txa/stats.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace txa;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / "txa_io_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("ingest accepts good rows and counts bad ones") {
  std::istringstream in(
      "client_id,merchant_id,date,amount,mcc,district_id,region_id\n"
      "c1,m1,2017-01-01,12.50,5411,d1,r1\n"
      "c1,m2,2017-01-02T09:15:00,3.00,5812,d1,r1\n"
      "c2,m1,2017-02-30,5.00,5411,d1,r1\n"   // bad date
      "c2,m1,2017-01-03,-5.00,5411,d1,r1\n"  // negative amount
      "c2,m1,2017-01-03,oops,5411,d1,r1\n"   // bad amount
      "c2,m1,2017-01-03,5.00,12000,d1,r1\n"  // mcc out of range
      ",m1,2017-01-03,5.00,5411,d1,r1\n"     // empty client
      "c2,m1,2017-01-03\n"                   // too few fields
      "c2,m1,2017-01-04,8.25,5411,d2,r1\n");
  const auto result = ingest_transactions(in);
  CHECK(result.accepted == 3);
  CHECK(result.rejected == 6);
  CHECK(result.reject_sample.size() == 6);
  CHECK(result.reject_sample[0].line == 4);  // 1-based, header is line 1
  CHECK(result.table.rows() == 3);
  CHECK(result.table.time_sec[1] == 9 * 3600 + 15 * 60);
  CHECK(result.table.amount[2] == doctest::Approx(8.25));
}

TEST_CASE("ingest honors a custom column mapping and order") {
  std::istringstream in(
      "when,who,where,how_much,mcc,district_id\n"
      "2017-01-01,c1,m1,10.00,5411,d1\n");
  ColumnMap cols;
  cols.date = "when";
  cols.client = "who";
  cols.merchant = "where";
  cols.amount = "how_much";
  const auto result = ingest_transactions(in, cols);
  CHECK(result.accepted == 1);
  // region column is optional and defaults to a single bucket
  CHECK(result.table.regions.size() == 1);
}

TEST_CASE("missing mandatory column is a schema error") {
  std::istringstream in("client_id,merchant_id,date,amount,mcc\nc1,m1,2017-01-01,1.0,5411\n");
  CHECK_THROWS_AS(ingest_transactions(in), SchemaError);
}

TEST_CASE("write/ingest round trip preserves the table") {
  TransactionTable t;
  TransactionRow r;
  r.client = "c1";
  r.merchant = "m1";
  r.date = parse_date("2017-05-04");
  r.amount = 12.34;
  r.mcc = 7;  // zero-padded on output
  r.district = "d1";
  r.region = "r1";
  t.push(r);
  r.merchant = "m2";
  r.amount = 0.0;
  r.mcc = 9999;
  t.push(r);

  std::ostringstream out;
  write_transactions(out, t);
  std::istringstream in(out.str());
  const auto back = ingest_transactions(in);
  REQUIRE(back.accepted == 2);
  CHECK(back.table.mcc[0] == 7);
  CHECK(back.table.mcc[1] == 9999);
  CHECK(back.table.amount[0] == doctest::Approx(12.34));
  CHECK(back.table.merchants.name(1) == "m2");

  // serializing the round-tripped table reproduces the bytes
  std::ostringstream again;
  write_transactions(again, back.table);
  CHECK(again.str() == out.str());
}

TEST_CASE("atomic writer only publishes on commit") {
  const auto dir = temp_dir();
  const auto target = dir / "atomic.txt";
  fs::remove(target);

  {
    AtomicWriter w(target);
    w.append("half-written");
    // no commit
  }
  CHECK_FALSE(fs::exists(target));

  {
    AtomicWriter w(target);
    w.append("hello\n");
    w.commit();
  }
  std::ifstream in(target);
  std::string line;
  std::getline(in, line);
  CHECK(line == "hello");

  // overwrite goes through the same rename path
  {
    AtomicWriter w(target);
    w.append("second\n");
    w.commit();
  }
  std::ifstream in2(target);
  std::getline(in2, line);
  CHECK(line == "second");
  fs::remove(target);
}

TEST_CASE("hash_file matches the in-memory hash") {
  const auto dir = temp_dir();
  const auto file = dir / "hash_me.bin";
  {
    std::ofstream out(file, std::ios::binary);
    out << "abc";
  }
  char expect[32];
  std::snprintf(expect, sizeof expect, "%016llx",
                static_cast<unsigned long long>(fnv1a64("abc")));
  CHECK(hash_file(file) == expect);
  CHECK_THROWS_AS(hash_file(dir / "no_such_file"), Error);
  fs::remove(file);
}

TEST_CASE("key=value config files") {
  std::istringstream in(
      "# comment line\n"
      "alpha = 0.85\n"
      "name= spaced value \n"
      "count =12\n"
      "count = 13\n"  // duplicates keep the last value
      "\n"
      "shock.0.kind = drop\n"
      "shock.1.kind = surge\n");
  auto kv = KeyValueFile::parse(in);
  CHECK(kv.get_double("alpha") == doctest::Approx(0.85));
  CHECK(kv.get("name") == "spaced value");
  CHECK(kv.get_int("count") == 13);
  CHECK(kv.get_or("missing", "fallback") == "fallback");
  CHECK(kv.get_int_or("missing", 7) == 7);
  CHECK_THROWS_AS(kv.get("missing"), ConfigError);
  CHECK_THROWS_AS(kv.get_int("name"), ConfigError);

  const auto shocks = kv.keys_with_prefix("shock.");
  REQUIRE(shocks.size() == 2);
  CHECK(shocks[0] == "shock.0.kind");

  const auto dir = temp_dir();
  const auto file = dir / "roundtrip.cfg";
  kv.set("extra", "1");
  kv.save(file);
  const auto back = KeyValueFile::load(file);
  CHECK(back.get("name") == "spaced value");
  CHECK(back.get_int("extra") == 1);
  CHECK(back.get_int("count") == 13);
  fs::remove(file);

  CHECK_THROWS_AS(KeyValueFile::load(dir / "absent.cfg"), ConfigError);
}

TEST_CASE("split_list trims and drops empties") {
  const auto parts = split_list(" a , b ,c,, d ");
  REQUIRE(parts.size() == 4);
  CHECK(parts[0] == "a");
  CHECK(parts[3] == "d");
  CHECK(split_list("").empty());
  CHECK(split_list("  ").empty());
}
