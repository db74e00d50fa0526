#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "procmat/constructors.hpp"
#include "procmat/sdp.hpp"
#include "procmat/switch_factory.hpp"

using namespace procmat;

TEST_SUITE("sdp") {
  TEST_CASE("hermitian coordinates are an orthonormal basis") {
    auto reg = make_registry({{"X", 3}});
    const auto a = random_hermitian(reg, {0}, 1).matrix();
    const auto b = random_hermitian(reg, {0}, 2).matrix();
    const auto xa = hermitian_coords(a), xb = hermitian_coords(b);
    CHECK(xa.size() == 9);
    CHECK(xa.dot(xb) == doctest::Approx((a * b).trace().real()).epsilon(1e-13));
    CHECK((from_hermitian_coords(xa, 3) - a).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("compensated sum keeps small terms") {
    CHECK(compensated_sum({1e16, 1.0, -1e16}) == 1.0);
    CHECK(compensated_sum({}) == 0.0);
  }

  TEST_CASE("linear system matches the equality maps") {
    const auto L = testing::layout(2, 2, 2, 1);
    const auto w = random_valid_process(L, {}, 5);
    const auto sys = assemble_qccc_system(w, false);
    const auto ls = build_linear_system(sys);
    std::vector<Eigen::MatrixXcd> blocks;
    Eigen::VectorXd x(ls.A.cols());
    for (std::size_t b = 0; b < sys.blocks.size(); ++b) {
      const auto r = ls.block_side[b];
      blocks.push_back(random_hermitian(make_registry({{"t", static_cast<int>(r)}}), {0}, 10 + b).matrix());
      x.segment(ls.block_offset[b], r * r) = hermitian_coords(blocks.back());
    }
    const auto ax = ls.A * x;
    const auto ops = apply_equalities(sys, blocks);
    for (std::size_t e = 0; e < ops.size(); ++e) {
      const auto u = ls.eq_side[e];
      CHECK((ax.segment(ls.eq_offset[e], u * u) - hermitian_coords(ops[e].matrix())).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("system validation catches inconsistent terms") {
    auto sys = assemble_qcqc_system(build_quantum_switch());
    sys.equalities.front().terms.front().block = 99;
    CHECK_THROWS_AS(sys.validate(), std::invalid_argument);
  }

  TEST_CASE("white noise is in both classes") {
    for (int n = 1; n <= 2; ++n) {
      const auto w = white_noise_process(testing::layout(n, 1, 2, 2));
      const auto q = qcqc_membership(w), c = qccc_membership(w);
      CHECK(q.status == VerdictStatus::Feasible);
      CHECK(c.status == VerdictStatus::Feasible);
      CHECK(q.margin > 0.0);
      REQUIRE(c.qccc_point);
      CHECK(verify_qccc(w, *c.qccc_point, 1e-8).verdict);
    }
  }

  TEST_CASE("tripartite white noise") {
    const auto w = white_noise_process(testing::layout(3, 1, 2, 1));
    const auto q = qcqc_membership(w);
    CHECK(q.status == VerdictStatus::Feasible);
    REQUIRE(q.qcqc_point);
    CHECK(verify_qcqc(w, *q.qcqc_point, 1e-8).verdict);
    // The unreduced QC-CC program is beyond the dense solver and says so.
    const auto c = qccc_membership(w);
    CHECK(c.status == VerdictStatus::Undetermined);
    CHECK(c.note.find("dense solver limit") != std::string::npos);
  }

  TEST_CASE("switch: QC-QC but not QC-CC") {
    const auto w = build_quantum_switch();
    const auto q = qcqc_membership(w);
    CHECK(q.status == VerdictStatus::Feasible);
    REQUIRE(q.qcqc_point);
    CHECK(verify_qcqc(w, *q.qcqc_point, 1e-8).verdict);
    const auto c = qccc_membership(w);
    CHECK(c.status == VerdictStatus::Infeasible);
    CHECK(c.note == "causally nonseparable");
    REQUIRE(c.certificate);
    CHECK(recheck_certificate(assemble_qccc_system(w), *c.certificate).residual <= 1e-8);
  }

  TEST_CASE("facial reduction shrinks blocks of the examples") {
    const auto w = build_example(1);
    const auto full = assemble_qccc_system(w, false);
    const auto reduced = assemble_qccc_system(w, true);
    std::size_t before = full.n_parameters(), after = reduced.n_parameters();
    CHECK(after < before);
  }

  TEST_CASE("unreduced W2: slack-bound dual certificate") {
    SolveOptions opt;
    opt.facial_reduction = false;
    const auto w = build_example(2);
    const auto v = qccc_membership(w, opt);
    REQUIRE(v.status == VerdictStatus::Infeasible);
    REQUIRE(v.certificate);
    CHECK(v.certificate->kind == CertificateKind::Dual);
    CHECK(std::isfinite(v.margin));
    CHECK(v.margin >= 1e-6);
    const auto chk = recheck_certificate(assemble_qccc_system(w, false), *v.certificate);
    CHECK(chk.residual <= 1e-8);
    CHECK(chk.bound == doctest::Approx(v.margin).epsilon(1e-9));
  }

  TEST_CASE("tampered certificates fail the re-check") {
    const auto w = build_example(3);
    const auto sys = assemble_qccc_system(w);
    auto v = qccc_membership(w);
    REQUIRE(v.certificate);
    auto cert = *v.certificate;
    for (auto& m : cert.multipliers) m = Eigen::MatrixXcd::Identity(m.rows(), m.cols());
    const auto chk = recheck_certificate(sys, cert);
    CHECK_FALSE((chk.residual <= 1e-8 && chk.bound >= 1e-6));
  }

  TEST_CASE("random samples are recognised") {
    const auto L = testing::layout(2, 1, 2, 1);
    const auto q = random_qcqc(L, 3);
    CHECK(qcqc_membership(q.process).status == VerdictStatus::Feasible);
    const auto c = random_qccc(L, 4);
    CHECK(qccc_membership(c.process).status == VerdictStatus::Feasible);
  }

  TEST_CASE("registry mismatch is rejected") {
    const auto sys = assemble_qcqc_system(build_example(1));
    CHECK_THROWS_AS(solve_membership(build_example(2), sys), std::invalid_argument);
  }
}
