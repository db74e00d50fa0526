#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "procmat/circuit_classes.hpp"

namespace procmat {

/// A PSD matrix variable. With a face V (orthonormal columns) the variable is
/// restricted to X = V M V^dag and only the side(V) x side(V) block M is free.
struct BlockSpec {
  std::string name;
  SubsystemSet subsystems;
  std::optional<Eigen::MatrixXcd> face;

  Eigen::Index full_side(const SpaceRegistry& reg) const { return reg.dimension(subsystems); }
  Eigen::Index side(const SpaceRegistry& reg) const { return face ? face->cols() : full_side(reg); }
};

/// coeff * (Tr_{trace_over} X_block) ⊗ 1^{pad}.
struct EqualityTerm {
  std::size_t block = 0;
  double coeff = 1.0;
  SubsystemSet trace_over;
  SubsystemSet pad;
};

/// Σ terms = rhs on `space`. With a range U (orthonormal columns) both sides
/// are compared after compression U^dag (·) U; U must contain the ranges of
/// every term and of rhs so that the compression loses nothing.
struct Equality {
  std::string name;
  SubsystemSet space;
  std::vector<EqualityTerm> terms;
  LabeledOperator rhs;
  std::optional<Eigen::MatrixXcd> range;
};

enum class SystemKind { QcQc, QcCc };

/// Block-PSD feasibility problem with affine equalities, plus the bookkeeping
/// needed to read a solution back as a decomposition.
struct ConstraintSystem {
  SystemKind kind = SystemKind::QcQc;
  RegistryPtr registry;
  std::vector<BlockSpec> blocks;
  std::vector<Equality> equalities;
  std::vector<QcQcKey> qcqc_index;  ///< per block, QcQc systems
  std::vector<Sequence> qccc_index;  ///< per block, QcCc systems
  std::vector<bool> qccc_terminal;   ///< per block, QcCc systems

  /// Throws std::invalid_argument on inconsistent dimensions or labels.
  void validate() const;
  std::size_t n_parameters() const;
};

/// Variables W_(𝒦_n,k_{n+1}) and the layered equalities, with Tr_F W as data.
ConstraintSystem assemble_qcqc_system(const ProcessMatrix& w, bool facial_reduction = true);
/// Variables W_(k_1..k_n), W_(k_1..k_N,F) and the sequence equalities.
ConstraintSystem assemble_qccc_system(const ProcessMatrix& w, bool facial_reduction = true);

/// Shrinks block faces using ranges implied by the equalities (PSD right-hand
/// sides and positive terms), then attaches lossless equality ranges.
/// Returns the number of sweeps performed.
int facial_reduction(ConstraintSystem& sys);

/// Real coordinates of a Hermitian matrix in the orthonormal basis
/// E_ii, (E_ij + E_ji)/√2, i(E_ij - E_ji)/√2 (i < j).
Eigen::VectorXd hermitian_coords(const Eigen::MatrixXcd& h);
Eigen::MatrixXcd from_hermitian_coords(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index side);

/// Dense real form A x = c of the equalities over the concatenated block coordinates.
struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd c;
  std::vector<Eigen::Index> block_offset, block_side;
  std::vector<Eigen::Index> eq_offset, eq_side;
};

LinearSystem build_linear_system(const ConstraintSystem& sys);

/// Applies the equality maps to block values given as free (face) blocks.
std::vector<LabeledOperator> apply_equalities(const ConstraintSystem& sys, const std::vector<Eigen::MatrixXcd>& free_blocks);

/// Full-space value V M V^dag of block b.
LabeledOperator expand_block(const ConstraintSystem& sys, std::size_t b, const Eigen::MatrixXcd& m);

enum class VerdictStatus { Feasible, Infeasible, Undetermined };

std::string to_string(VerdictStatus s);

enum class CertificateKind {
  Dual,    ///< Z_b = -A_b^*(Y) ⪰ 0, Σ Tr Z_b = 1, bound <Y, c> on the slack
  Farkas,  ///< A^*(Y) = 0, <Y, c> = 1: the equalities alone are inconsistent
};

/// Equality multipliers certifying infeasibility; one Hermitian matrix per
/// equality, in the equality's compressed coordinates.
struct Certificate {
  CertificateKind kind = CertificateKind::Dual;
  std::vector<Eigen::MatrixXcd> multipliers;
  double bound = 0.0;     ///< certified lower bound on the optimal slack (inf for Farkas)
  double residual = 0.0;  ///< independent dual-feasibility residual
  bool repaired = false;  ///< a strictly feasible dual direction was mixed in
};

/// Independent re-check of a certificate with operator arithmetic and
/// compensated summation; fills bound and residual.
struct CertificateCheck {
  double bound = 0.0;
  double residual = 0.0;
  double min_eig = 0.0;
  double trace_sum = 0.0;
};
CertificateCheck recheck_certificate(const ConstraintSystem& sys, const Certificate& cert);

struct SolveOptions {
  double tol = 1e-8;          ///< accepted PSD defect and internal accuracy
  double tol_margin = 1e-6;   ///< certified slack needed to call Infeasible
  int max_iterations = 80;
  double certificate_tol = 1e-8;
  bool facial_reduction = true;  ///< used by the *_membership entry points
  /// Larger systems are reported Undetermined: the dense null-space step needs O(n^2) memory.
  std::size_t max_parameters = 10000;
};

struct Verdict {
  VerdictStatus status = VerdictStatus::Undetermined;
  /// Feasible: smallest scaled eigenvalue over the free witness blocks.
  /// Infeasible: certified lower bound on the slack (inf for a Farkas certificate).
  double margin = 0.0;
  int iterations = 0;
  double runtime_s = 0.0;
  std::string note;
  std::optional<Certificate> certificate;
  std::optional<QcQcDecomposition> qcqc_point;
  std::optional<QcCcDecomposition> qccc_point;
  /// Free blocks of the returned point (Feasible only).
  std::vector<Eigen::MatrixXcd> blocks;
};

/// min s subject to X_b + s 1 ⪰ 0 and the equalities; classifies the sign of s*.
Verdict solve_feasibility(const ConstraintSystem& sys, const SolveOptions& opt = {});

/// Assemble + solve + re-verification of feasible points with verify_*.
Verdict qcqc_membership(const ProcessMatrix& w, const SolveOptions& opt = {});
Verdict qccc_membership(const ProcessMatrix& w, const SolveOptions& opt = {});
/// Same with an already assembled system of either kind.
Verdict solve_membership(const ProcessMatrix& w, const ConstraintSystem& sys, const SolveOptions& opt = {});

/// Sum with Neumaier compensation.
double compensated_sum(const std::vector<double>& terms);

}  // namespace procmat
