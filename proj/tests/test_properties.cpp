#include "doctest.h"
#include "properties.hpp"

TEST_CASE("invariant suites hold on 1000 random cases each") {
  for (const auto& suite : props::all_suites()) {
    const props::Report r = suite.run(1000, 20240601);
    INFO(r.name << ": " << r.first_failure);
    CHECK(r.cases == 1000);
    CHECK(r.failures == 0);
  }
}
