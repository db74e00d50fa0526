#include <doctest.h>

#include "procmat/serialization.hpp"

using namespace procmat;

TEST_SUITE("serialization") {
  TEST_CASE("process round trip is exact") {
    const auto w = build_example(3);
    const auto back = process_from_json(parse_json(dump_json(process_to_json(w))));
    CHECK(back.layout() == w.layout());
    CHECK((back.op().matrix() - w.op().matrix()).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("numbers survive formatting bit for bit") {
    Eigen::MatrixXcd m(1, 2);
    m << cplx(0.1, 1.0 / 3.0), cplx(std::nextafter(1.0, 2.0), -1e-300);
    const auto back = matrix_from_json(parse_json(dump_json(matrix_to_json(m))), "/m");
    CHECK(back == m);
  }

  TEST_CASE("decomposition round trips") {
    const auto w = build_quantum_switch();
    const Decomposition d = switch_decomposition();
    const Json j = bundle_to_json(w, d);
    const auto back = decomposition_from_json(parse_json(dump_json(j)), w.layout());
    REQUIRE(std::holds_alternative<QcQcDecomposition>(back));
    CHECK(verify_qcqc(w, std::get<QcQcDecomposition>(back), 0.0).max_residual() == 0.0);
    CHECK(process_from_json(j).layout() == w.layout());
  }

  TEST_CASE("syntax errors carry line and column") {
    try {
      parse_json("{\n  \"registry\": [,]\n}", "w.json");
      FAIL("no exception");
    } catch (const InputError& e) {
      CHECK(e.where().find("w.json: line 2") == 0);
    }
  }

  TEST_CASE("schema errors carry a JSON pointer") {
    auto j = process_to_json(build_example(1));
    j["registry"][1]["role"] = "Q";
    try {
      process_from_json(j);
      FAIL("no exception");
    } catch (const InputError& e) {
      CHECK(e.where() == "/registry/1/role");
    }
    auto k = process_to_json(build_example(1));
    k["operator"]["entries"].erase(0);
    CHECK_THROWS_AS(process_from_json(k), InputError);
    CHECK_THROWS_AS(process_from_json(Json::array()), InputError);
  }

  TEST_CASE("pattern round trip") {
    const auto p = example_pattern(2);
    const auto back = pattern_from_json(parse_json(dump_json(pattern_to_json(p))));
    REQUIRE(back.size() == p.size());
    const auto w = apply_pattern(build_quantum_switch(), back);
    CHECK((w.op().matrix() - build_example(2).op().matrix()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK_THROWS_AS(pattern_from_json(parse_json(R"({"A_I": "shuffle"})")), InputError);
  }

  TEST_CASE("verdict of a Farkas certificate has a null margin") {
    const auto w = build_example(1);
    const auto sys = assemble_qccc_system(w);
    const auto v = solve_membership(w, sys);
    const Json j = verdict_to_json(w.layout(), sys, v);
    CHECK(j["status"] == "Infeasible");
    CHECK(j["margin"].is_null());
    CHECK(j["margin_kind"] == "unbounded");
    CHECK(j["certificate"]["kind"] == "farkas");
  }

  TEST_CASE("system dump lists blocks and equalities") {
    const auto w = build_example(2);
    const auto sys = assemble_qccc_system(w);
    const Json j = system_to_json(sys, w.layout());
    CHECK(j["kind"] == "qccc");
    CHECK(j["blocks"].size() == sys.blocks.size());
    CHECK(j["equalities"].size() == sys.equalities.size());
    CHECK(j["equalities"][0]["name"] == "qccc.sum");
  }
}
