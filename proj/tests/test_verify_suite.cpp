#include <doctest.h>

#include "bilyap/verify_suite.hpp"

#include <set>
#include <string>

using namespace bilyap;

TEST_SUITE("verify_suite") {

TEST_CASE("a fresh run passes every property") {
  const auto results = run_verify_suite();
  REQUIRE(results.size() == 12);
  for (const PropertyResult& r : results) {
    CAPTURE(r.name);
    CAPTURE(r.detail);
    CHECK(r.pass);
    CHECK(r.checks > 0);
  }
  CHECK(all_passed(results));

  std::set<std::string> names;
  for (const PropertyResult& r : results) names.insert(r.name);
  CHECK(names.size() == results.size());  // names identify properties uniquely
  CHECK(names.count("direct-oracle-residual") == 1);
  CHECK(names.count("psd-residual-chain") == 1);
  CHECK(names.count("rhs-driven-stagnation") == 1);
}

TEST_CASE("the pass set is identical across seeds") {
  const auto base = run_verify_suite(1);
  for (unsigned seed : {2u, 3u}) {
    const auto results = run_verify_suite(seed);
    REQUIRE(results.size() == base.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
      CAPTURE(seed);
      CAPTURE(results[i].name);
      CAPTURE(results[i].detail);
      CHECK(results[i].name == base[i].name);
      CHECK(results[i].pass);
      CHECK(base[i].pass);
    }
  }
}

TEST_CASE("the aggregate verdict requires at least one passing property") {
  CHECK_FALSE(all_passed({}));
  CHECK(all_passed({PropertyResult{"x", true, 1, ""}}));
  CHECK_FALSE(all_passed({PropertyResult{"x", true, 1, ""},
                          PropertyResult{"y", false, 2, "boom"}}));
}

}  // TEST_SUITE
