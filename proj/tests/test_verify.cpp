// Suite-orchestration tests: report shape and determinism, empty-input
// behaviour, fault injection failing exactly the flow-commutativity check
// with a concrete counterexample, and thread independence of the
// cross-check fragment.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <rspin/verify.hpp>

#include <set>
#include <string>

using namespace rspin;

namespace {

nlohmann::ordered_json scrubbed(const VerifyReport& rep) {
    auto j = rep.to_json();
    for (auto& rec : j) rec["millis"] = 0;
    return j;
}

}  // namespace

TEST_CASE("empty r-list gives an empty passing report") {
    VerifyOptions opts;
    opts.rs = {};
    const auto rep = run_suite(opts);
    CHECK(rep.checks.empty());
    CHECK(rep.all_pass());
    CHECK(rep.to_json().dump() == "[]");
}

TEST_CASE("suite passes at a small bound; reports identical up to timings") {
    VerifyOptions opts;
    opts.rs = {2};
    opts.weight = 6;
    opts.fit_weight = 9;  // enough to pin every extended primary at W=6
    const auto rep1 = run_suite(opts);
    REQUIRE(!rep1.checks.empty());
    for (const auto& c : rep1.checks) {
        CAPTURE(c.name);
        CAPTURE(c.parameters);
        CAPTURE(c.counterexample);
        CHECK(c.pass);
        CHECK(c.counterexample.empty());
    }

    const auto rep2 = run_suite(opts);
    CHECK(scrubbed(rep1) == scrubbed(rep2));

    const auto j = rep1.to_json();
    for (const auto& rec : j) {
        CHECK(rec.contains("name"));
        CHECK(rec.contains("parameters"));
        CHECK(rec.contains("counterexample"));
        CHECK(rec.contains("millis"));
        CHECK(rec.at("status") == "pass");
    }
}

TEST_CASE("flow fault injection fails exactly the Lax-flow identity") {
    VerifyOptions opts;
    opts.rs = {2};
    opts.weight = 6;
    opts.fit_weight = 9;
    opts.fault = Fault::flow;
    const auto rep = run_suite(opts);
    CHECK(!rep.all_pass());

    std::set<std::string> failing;
    for (const auto& c : rep.checks) {
        if (c.pass) {
            CHECK(c.counterexample.empty());
            continue;
        }
        CHECK(!c.counterexample.empty());
        failing.insert(c.name);
        if (c.name == "hierarchy/lax-flow")
            CHECK(c.counterexample.find("T_2") != std::string::npos);
    }
    CHECK(failing == std::set<std::string>{"hierarchy/lax-flow"});
}

TEST_CASE("cross-check fragment passes and is thread-count independent") {
    const auto single = cross_check(2, 6, 9);
    REQUIRE(!single.empty());
    for (const auto& c : single) {
        CAPTURE(c.name);
        CAPTURE(c.counterexample);
        CHECK(c.pass);
    }

    const auto threaded = cross_check(2, 6, 9, 3);
    REQUIRE(threaded.size() == single.size());
    for (std::size_t i = 0; i < single.size(); ++i) {
        CHECK(threaded[i].name == single[i].name);
        CHECK(threaded[i].pass == single[i].pass);
        CHECK(threaded[i].counterexample == single[i].counterexample);
    }
}

TEST_CASE("fault name parsing") {
    CHECK(fault_from_string("") == Fault::none);
    CHECK(fault_from_string("none") == Fault::none);
    CHECK(fault_from_string("flow") == Fault::flow);
    CHECK_THROWS_AS(fault_from_string("nonsense"), std::invalid_argument);
}
