#include <doctest.h>

#include <random>

#include "../oracles.hpp"
#include "helpers.hpp"
#include "procmat/circuit_classes.hpp"
#include "procmat/switch_factory.hpp"

using namespace procmat;

TEST_SUITE("process") {
  TEST_CASE("layout roles and slots") {
    const auto L = testing::layout(2, 2, 2, 3);
    CHECK(L.n_slots() == 2);
    CHECK(L.past() == SubsystemSet{0});
    CHECK(L.future() == SubsystemSet{5});
    CHECK(L.slot_index("B") == 1);
    CHECK(L.io(0b01) == SubsystemSet{1, 2});
    CHECK(L.normalization_target() == doctest::Approx(8.0));
    CHECK_THROWS_AS(L.slot_index("Q"), std::out_of_range);
  }

  TEST_CASE("slot without output is rejected") {
    auto reg = make_registry({{"P", 1}, {"A_I", 2}, {"F", 1}});
    CHECK_THROWS(ProcessLayout(reg, {{Role::Past, ""}, {Role::Input, "A"}, {Role::Future, ""}}));
  }

  TEST_CASE("white noise is valid") {
    for (int n = 1; n <= 3; ++n) {
      const auto w = white_noise_process(testing::layout(n, 2, 2, 2));
      const auto rep = check_validity(w, 1e-12);
      CHECK(rep.verdict);
      CHECK(rep.max_residual() < 1e-14);
    }
  }

  TEST_CASE("random valid processes satisfy their postconditions") {
    const auto L = testing::layout(2, 2, 2, 2);
    const auto dephased = testing::with_roles(L, {Role::Past, Role::Input});
    std::mt19937_64 rng(5);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto w = random_valid_process(L, dephased, seed);
      const auto rep = check_validity(w, 1e-10);
      CHECK(rep.verdict);
      CHECK(min_eigenvalue(w.op()) >= 1e-6 * (1 - 1e-9));
      for (auto s : dephased) CHECK(off_diagonal_mass(w.op(), DephasingBasis::computational(L.registry(), s)) == 0.0);
      // Definition-level probe: plugging channels into both slots yields a channel P -> F.
      const auto probe = oracle::channel_probe(w.op().matrix(), {2, 2, 2, 2, 2, 2}, 1, rng);
      CHECK(probe.tp_defect < 1e-12);
      CHECK(probe.min_eig > -1e-12);
    }
  }

  TEST_CASE("bipartite and generic constraint sets agree") {
    const auto L = testing::layout(2, 2, 2, 2);
    const auto w = random_valid_process(L, {}, 11);
    CHECK(check_validity_generic(w, 1e-10).verdict);
    const auto bad = w.with_operator(w.op() + 0.01 * random_hermitian(L.registry(), L.registry()->all(), 12));
    CHECK_FALSE(check_validity(bad, 1e-9).verdict);
    CHECK_FALSE(check_validity_generic(bad, 1e-9).verdict);
  }

  TEST_CASE("signalling in both directions is invalid") {
    // Identity channels P -> A_I, A_O -> B_I and B_O -> A_I at once form a loop.
    auto reg = make_registry({{"P", 1}, {"A_I", 2}, {"A_O", 2}, {"B_I", 2}, {"B_O", 2}, {"F", 1}});
    ProcessLayout L(reg, {{Role::Past, ""}, {Role::Input, "A"}, {Role::Output, "A"}, {Role::Input, "B"}, {Role::Output, "B"},
                          {Role::Future, ""}});
    Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(4);
    phi[0] = phi[3] = 1.0;
    auto ao_bi = LabeledOperator::projector(reg, {2, 3}, phi);
    auto bo_ai = LabeledOperator::projector(reg, {1, 4}, phi);
    ProcessMatrix w(L, embed(tensor(ao_bi, bo_ai), reg->all()));
    const auto rep = check_validity(w, 1e-9);
    CHECK_FALSE(rep.verdict);
    CHECK(rep.max_residual() > 0.1);
  }

  TEST_CASE("contract gives the identity channel through the switch") {
    const auto w = build_quantum_switch();
    const auto& reg = w.registry();
    Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(4);
    phi[0] = phi[3] = 1.0;
    const auto ida = LabeledOperator::projector(reg, reg->subsystems({"A_I", "A_O"}), phi);
    const auto idb = LabeledOperator::projector(reg, reg->subsystems({"B_I", "B_O"}), phi);
    const auto g = contract(w, {ida, idb});
    CHECK(g.subsystems() == reg->subsystems({"P_c", "P_t", "F_t", "F_c"}));
    const auto tf = partial_trace(g, reg->subsystems({"F_t", "F_c"}));
    CHECK(max_abs(tf - LabeledOperator::identity(reg, tf.subsystems())) < 1e-14);
    CHECK_THROWS_AS(contract(w, {ida}), std::invalid_argument);
  }

  TEST_CASE("validity projector is idempotent and fixes valid directions") {
    const auto L = testing::layout(2, 1, 2, 2);
    const auto& reg = L.registry();
    const auto x = random_hermitian(reg, reg->all(), 21);
    const auto p = project_validity_subspace(L, x);
    CHECK(max_abs(project_validity_subspace(L, p) - p) < 1e-12);
    const auto w1 = random_valid_process(L, {}, 1), w2 = random_valid_process(L, {}, 2);
    const auto diff = w1.op() - w2.op();
    CHECK(max_abs(project_validity_subspace(L, diff) - diff) < 1e-12);
  }
}
