#include <doctest.h>

#include "../oracles.hpp"
#include "procmat/switch_factory.hpp"

using namespace procmat;

TEST_SUITE("switch-factory") {
  TEST_CASE("switch matches the ket oracle") {
    const auto w = build_quantum_switch();
    CHECK(w.registry()->names(w.registry()->all()) ==
          std::vector<std::string>{"P_c", "P_t", "A_I", "A_O", "B_I", "B_O", "F_t", "F_c"});
    CHECK((w.op().matrix() - oracle::quantum_switch()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(w.op().trace().real() == 16.0);
  }

  TEST_CASE("examples are valid and registries have placeholders") {
    const std::vector<std::vector<std::string>> names{
        {"P_c", "A_I", "A_O", "B_I", "B_O", "F_c"},
        {"P", "A_I", "A_O", "B_I", "B_O", "F_c"},
        {"P", "A_I", "A_O", "B_I", "B_O", "F_t", "F_c"},
    };
    for (int n = 1; n <= 3; ++n) {
      const auto w = build_example(n);
      CHECK(w.registry()->names(w.registry()->all()) == names[static_cast<std::size_t>(n - 1)]);
      CHECK(check_validity(w, 1e-12).verdict);
    }
    CHECK_THROWS_AS(build_example(4), std::invalid_argument);
  }

  TEST_CASE("closed forms match the pattern pipeline") {
    const auto qs = build_quantum_switch();
    for (int n = 1; n <= 3; ++n) {
      const auto a = build_example(n), b = apply_pattern(qs, example_pattern(n));
      REQUIRE(a.layout() == b.layout());
      CHECK((a.op().matrix() - b.op().matrix()).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  TEST_CASE("flip patterns leave no coherent system") {
    for (int n = 1; n <= 3; ++n) {
      const auto w = apply_pattern(build_example(n), flip_pattern(n));
      const auto& reg = w.registry();
      for (std::size_t s = 0; s < reg->size(); ++s) {
        if (w.layout().roles()[s].role == Role::Future || (*reg)[s].dim == 1) continue;
        const bool x = n == 1 && (*reg)[s].name == "P_c";
        CHECK(off_diagonal_mass(w.op(), basis_of(reg, s, x ? BasisType::X : BasisType::Z)) < 1e-15);
      }
    }
  }

  TEST_CASE("pattern role checks") {
    const auto qs = build_quantum_switch();
    Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(2);
    zero[0] = 1.0;
    CHECK_THROWS_AS(apply_pattern(qs, {{"A_I", SlotAction::inject(zero)}}), std::invalid_argument);
    CHECK_THROWS_AS(apply_pattern(qs, {{"A_I", SlotAction::trace_out()}}), std::invalid_argument);
    CHECK_THROWS_AS(apply_pattern(qs, {{"Q", SlotAction::keep()}}), std::invalid_argument);
    CHECK_THROWS_AS(apply_pattern(qs, {{"P_c", SlotAction::inject(2.0 * zero)}}), std::invalid_argument);
    CHECK_THROWS_AS(apply_pattern(qs, {{"P_c", SlotAction::inject(Eigen::VectorXcd::Ones(3) / std::sqrt(3.0))}}),
                    std::invalid_argument);
  }

  TEST_CASE("tracing out every future adds an F placeholder") {
    const auto w = apply_pattern(build_quantum_switch(), {{"F_t", SlotAction::trace_out()}, {"F_c", SlotAction::trace_out()}});
    const auto& reg = *w.registry();
    CHECK(reg[reg.size() - 1].name == "F");
    CHECK(reg[reg.size() - 1].dim == 1);
    CHECK(check_validity(w, 1e-12).verdict);
  }

  TEST_CASE("dephase-all pattern covers every non-future system") {
    const auto w = build_quantum_switch();
    const auto p = dephase_all_pattern(w.layout());
    CHECK(p.size() == 6);
    CHECK_FALSE(p.count("F_t"));
  }
}
