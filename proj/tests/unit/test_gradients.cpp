#include <doctest.h>

#include "gradcheck.hpp"

TEST_CASE("analytic gradients match central finite differences") {
    // a faster pass than the acceptance suite's 20 instances per case
    auto results = gradcheck::run_all(6, 91);
    for (const auto& r : results) {
        INFO(r.name, " max err ", r.max_err);
        CHECK(r.max_err < 1e-4);
    }
}
