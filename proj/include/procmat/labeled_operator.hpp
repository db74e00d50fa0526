#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "procmat/space.hpp"

namespace procmat {

using cplx = std::complex<double>;

/// Hermiticity and orthonormality tolerance (relative).
inline constexpr double kHermitianTol = 1e-10;
/// Eigen-reconstruction tolerance (relative).
inline constexpr double kEigenTol = 1e-9;

/// Dense complex operator on an ordered set of registry subsystems.
///
/// Entries are stored with the subsystems in registry order, the first
/// subsystem being the most significant digit of the row/column index.
/// Two operators on the same set of subsystems are therefore comparable
/// entry-wise regardless of how they were built.
class LabeledOperator {
 public:
  LabeledOperator() = default;
  LabeledOperator(RegistryPtr registry, SubsystemSet subsystems, Eigen::MatrixXcd entries);

  static LabeledOperator identity(RegistryPtr registry, SubsystemSet subsystems);
  static LabeledOperator zero(RegistryPtr registry, SubsystemSet subsystems);
  /// Operator on a single subsystem.
  static LabeledOperator local(RegistryPtr registry, std::size_t system, Eigen::MatrixXcd entries);
  /// Rank-one |v><v| on the given subsystems.
  static LabeledOperator projector(RegistryPtr registry, SubsystemSet subsystems, const Eigen::VectorXcd& v);

  const RegistryPtr& registry() const { return registry_; }
  const SubsystemSet& subsystems() const { return subsystems_; }
  const Eigen::MatrixXcd& matrix() const { return m_; }
  Eigen::MatrixXcd& matrix() { return m_; }
  Eigen::Index side() const { return m_.rows(); }
  std::vector<int> dims() const;

  cplx trace() const { return m_.trace(); }
  LabeledOperator adjoint() const;
  bool same_space(const LabeledOperator& other) const;
  std::string describe_space() const;

  LabeledOperator& operator+=(const LabeledOperator& rhs);
  LabeledOperator& operator-=(const LabeledOperator& rhs);
  LabeledOperator& operator*=(cplx s);

  friend LabeledOperator operator+(LabeledOperator a, const LabeledOperator& b) { return a += b; }
  friend LabeledOperator operator-(LabeledOperator a, const LabeledOperator& b) { return a -= b; }
  friend LabeledOperator operator*(LabeledOperator a, cplx s) { return a *= s; }
  friend LabeledOperator operator*(cplx s, LabeledOperator a) { return a *= s; }
  friend LabeledOperator operator*(double s, LabeledOperator a) { return a *= cplx(s, 0.0); }
  friend LabeledOperator operator-(LabeledOperator a) { return a *= cplx(-1.0, 0.0); }

 private:
  void require_same_space(const LabeledOperator& other, const char* what) const;

  RegistryPtr registry_;
  SubsystemSet subsystems_;
  Eigen::MatrixXcd m_;
};

/// Largest absolute entry.
double max_abs(const LabeledOperator& w);
double max_abs(const Eigen::MatrixXcd& m);
/// max|M - M^dag| entry-wise.
double hermiticity_defect(const LabeledOperator& w);
bool is_hermitian(const LabeledOperator& w, double tol = kHermitianTol);
/// Throws std::invalid_argument when the relative Hermiticity defect exceeds tol.
void require_hermitian(const LabeledOperator& w, const char* context, double tol = kHermitianTol);
/// (M + M^dag)/2.
LabeledOperator hermitian_part(const LabeledOperator& w);

/// Matrix product of two operators on the same space.
LabeledOperator product(const LabeledOperator& a, const LabeledOperator& b);
/// Hilbert-Schmidt inner product Tr(a^dag b).
cplx hs_inner(const LabeledOperator& a, const LabeledOperator& b);
/// Full transpose.
LabeledOperator transpose(const LabeledOperator& w);

/// Kronecker product, reordered to the registry's canonical order.
LabeledOperator tensor(const LabeledOperator& a, const LabeledOperator& b);
/// w ⊗ 1 on `systems` (which must be disjoint from w's subsystems).
LabeledOperator extend(const LabeledOperator& w, const SubsystemSet& systems);
LabeledOperator partial_trace(const LabeledOperator& w, const SubsystemSet& over);
/// (Tr_X w) ⊗ 1^X / d_X.
LabeledOperator trace_and_replace(const LabeledOperator& w, const SubsystemSet& x);
/// w - trace_and_replace(w, x).
LabeledOperator one_minus(const LabeledOperator& w, const SubsystemSet& x);
/// Embeds w into a larger space by tensoring identities (no-op if already there).
LabeledOperator embed(const LabeledOperator& w, const SubsystemSet& target);

/// (U ⊗ 1) w (U ⊗ 1)^dag with U acting on one subsystem.
LabeledOperator apply_local(const LabeledOperator& w, std::size_t system, const Eigen::MatrixXcd& u);
/// (<psi| ⊗ 1) w (|psi> ⊗ 1); the subsystem disappears from the result.
LabeledOperator sandwich(const LabeledOperator& w, std::size_t system, const Eigen::VectorXcd& psi);

/// <c| w |c> where |c> is the computational basis state with flat index `cell`
/// over `cell_systems` (canonical order); the result lives on the other systems.
LabeledOperator diagonal_block(const LabeledOperator& w, const SubsystemSet& cell_systems, Eigen::Index cell);
/// Diagonal operator on `on` with the given real entries.
LabeledOperator diagonal_operator(const RegistryPtr& registry, const SubsystemSet& on, const Eigen::VectorXd& entries);

/// Orthonormal basis of one subsystem, stored as the columns of `vectors`.
class DephasingBasis {
 public:
  DephasingBasis(RegistryPtr registry, std::size_t system, Eigen::MatrixXcd vectors);

  /// Computational (Z-type) basis.
  static DephasingBasis computational(RegistryPtr registry, std::size_t system);
  /// Fourier basis; for qubits the |±> eigenbasis of Pauli X.
  static DephasingBasis fourier(RegistryPtr registry, std::size_t system);

  std::size_t system() const { return system_; }
  const Eigen::MatrixXcd& vectors() const { return vectors_; }
  bool is_computational() const;

 private:
  std::size_t system_;
  Eigen::MatrixXcd vectors_;
};

LabeledOperator dephase(const LabeledOperator& w, const DephasingBasis& basis);
/// Dephases each listed basis in turn (the maps commute).
LabeledOperator dephase(const LabeledOperator& w, const std::vector<DephasingBasis>& bases);

/// Largest |entry| among entries that differ in the given subsystem's digit
/// (after rotating into the basis). Zero means w is diagonal in that system.
double off_diagonal_mass(const LabeledOperator& w, const DephasingBasis& basis);

struct HermitianEigs {
  Eigen::VectorXd values;    ///< ascending
  Eigen::MatrixXcd vectors;  ///< columns
};

HermitianEigs hermitian_eigs(const LabeledOperator& w);
double min_eigenvalue(const LabeledOperator& w);
double min_eigenvalue(const Eigen::MatrixXcd& hermitian);
/// λ_min(w) >= -tol * max(1, max_abs(w)).
bool psd_check(const LabeledOperator& w, double tol);

}  // namespace procmat
