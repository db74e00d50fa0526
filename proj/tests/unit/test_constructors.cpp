#include <doctest.h>

#include "helpers.hpp"
#include "procmat/constructors.hpp"
#include "procmat/switch_factory.hpp"

using namespace procmat;

TEST_SUITE("constructors") {
  TEST_CASE("S/T split reconstructs Tr_F W") {
    const auto L = testing::layout(2, 2, 2, 2);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto w = random_valid_process(L, {}, seed);
      const auto x = partial_trace(w.op(), L.future());
      const auto st = canonical_st_split(L, x);
      CHECK(st_reconstruction_residual(L, st, x) < 1e-13);
      const auto [rs, rt] = st_side_residuals(L, st);
      CHECK(rs < 1e-13);
      CHECK(rt < 1e-13);
    }
  }

  TEST_CASE("split rejects operators with a [1-A_O][1-B_O] component") {
    const auto L = testing::layout(2, 1, 2, 1);
    const auto x = random_hermitian(L.registry(), set_difference(L.registry()->all(), L.future()), 4);
    CHECK_THROWS_AS(canonical_st_split(L, x), std::domain_error);
  }

  TEST_CASE("dephased-inputs construction") {
    const auto L = testing::layout(2, 2, 2, 2);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto w = random_valid_process(L, testing::with_roles(L, {Role::Past, Role::Input}), seed);
      const auto c = construct_qcqc(w, DephasedSystems::InputsOnly);
      CHECK(verify_qcqc(w, c.decomposition, 1e-9).verdict);
      // The shift is diagonal on P A_I B_I.
      for (auto s : c.shift.subsystems())
        CHECK(off_diagonal_mass(c.shift, DephasingBasis::computational(L.registry(), s)) == 0.0);
    }
  }

  TEST_CASE("all-dephased construction with a rotated basis") {
    const auto L = testing::layout(2, 2, 2, 2);
    const auto& reg = L.registry();
    const auto w0 = random_valid_process(L, testing::with_roles(L, {Role::Past, Role::Input, Role::Output}), 3);
    // Rotate P into the Fourier basis; the construction must follow the rotation.
    Eigen::MatrixXcd h(2, 2);
    h << M_SQRT1_2, M_SQRT1_2, M_SQRT1_2, -M_SQRT1_2;
    const auto w = w0.with_operator(apply_local(w0.op(), 0, h));
    CHECK_THROWS_AS(qcqc_from_dephased_all(w), std::domain_error);
    const auto d = qcqc_from_dephased_all(w, {DephasingBasis::fourier(reg, 0)});
    CHECK(verify_qcqc(w, d, 1e-9).verdict);
  }

  TEST_CASE("coherent inputs are rejected") {
    const auto w = build_quantum_switch();
    CHECK_THROWS_AS(qcqc_from_dephased_inputs(w), std::domain_error);
  }

  TEST_CASE("invalid processes are rejected") {
    const auto L = testing::layout(2, 1, 2, 1);
    const auto w = white_noise_process(L);
    CHECK_THROWS_AS(qcqc_from_dephased_all(w.with_operator(2.0 * w.op())), std::domain_error);
    CHECK_THROWS_AS(qcqc_from_dephased_all(white_noise_process(testing::layout(3, 1, 2, 1))), std::invalid_argument);
  }

  TEST_CASE("QC-CC from dephased QC-QC, bipartite and tripartite") {
    for (int n = 2; n <= 3; ++n) {
      const auto L = testing::layout(n, 2, 2, 2);
      const auto q = random_qcqc(L, 40 + n);
      std::vector<DephasingBasis> bases;
      for (std::size_t s = 0; s < L.registry()->size(); ++s)
        if (L.roles()[s].role != Role::Future) bases.push_back(DephasingBasis::computational(L.registry(), s));
      const auto w = q.process.with_operator(dephase(q.process.op(), bases));
      auto d = q.decomposition;
      for (const auto& b : bases) d = dephase_decomposition(d, b);
      const auto c = qccc_from_dephased_qcqc(w, d);
      CHECK(verify_qccc(w, c, 1e-9).verdict);
      CHECK(verify_qcqc(w, collapse_to_qcqc(L, c), 1e-9).verdict);
    }
  }

  TEST_CASE("QC-CC construction needs a verified decomposition") {
    const auto L = testing::layout(2, 1, 2, 1);
    const auto w = white_noise_process(L);
    CHECK_THROWS_AS(qccc_from_dephased_qcqc(w, QcQcDecomposition{}), std::domain_error);
  }
}
