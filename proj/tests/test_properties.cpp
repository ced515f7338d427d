#include <doctest.h>

#include "property_suites.hpp"

using namespace pmcm::testing;

namespace {

void report(const SuiteResult& r) {
  INFO("cases " << r.cases << ", worst excess " << r.worst << ", first failure: " << r.first_failure);
  CHECK(r.cases >= 1000);
  CHECK(r.violations == 0);
}

}  // namespace

TEST_CASE("area sandwich") { report(area_sandwich_suite(101, 2000)); }

TEST_CASE("truncation commutes with representatives and obeys the M bound") { report(truncation_suite(202, 2000)); }

TEST_CASE("pairing inequality within the O(h) budget") {
  const SuiteResult r = pairing_suite(303, 1000);
  report(r);
  // the inequality is exact cellwise; only quadrature rounding should show
  CHECK(r.worst < 1e-9);
}

TEST_CASE("smoothing bounds") { report(smoothing_suite(404, 1000)); }

TEST_CASE("suites are reproducible from the seed") {
  const SuiteResult a = truncation_suite(7, 50), b = truncation_suite(7, 50);
  CHECK(a.worst == b.worst);
  CHECK(a.cases == b.cases);
}
