#pragma once

#include <vector>

#include "procmat/circuit_classes.hpp"

namespace procmat {

/// Tr_F W = S ⊗ 1^{B_O} + T ⊗ 1^{A_O}, with S on P A_I B_I A_O and T on P A_I B_I B_O.
struct STSplit {
  LabeledOperator S;
  LabeledOperator T;
};

/// S := Tr_{B_O} x / d_{B_O},  T := Tr_{A_O} x / d_{A_O} - Tr_{A_O B_O} x ⊗ 1^{B_O} / (d_{A_O} d_{B_O}).
/// Throws std::domain_error when {}_{[1-A_O][1-B_O]} x exceeds tol.
STSplit canonical_st_split(const ProcessLayout& layout, const LabeledOperator& x, double tol = 1e-9);

/// ‖S ⊗ 1 + T ⊗ 1 - x‖.
double st_reconstruction_residual(const ProcessLayout& layout, const STSplit& st, const LabeledOperator& x);

/// (‖{}_{[1-A_O]} Tr_{B_I} S‖, ‖{}_{[1-B_O]} Tr_{A_I} T‖); both vanish for valid processes.
std::pair<double, double> st_side_residuals(const ProcessLayout& layout, const STSplit& st);

enum class DephasedSystems {
  All,         ///< P, A_I, B_I, A_O, B_O
  InputsOnly,  ///< P, A_I, B_I
};

/// Full output of the bipartite construction: the split, the shift s̲ (an
/// operator on P A_I B_I, diagonal in the dephasing bases) and the witnesses.
struct QcQcConstruction {
  STSplit split;
  LabeledOperator shift;
  QcQcDecomposition decomposition;
};

/// Runs the bipartite construction. `bases` override the computational basis
/// for the listed subsystems; the required subsystems must be diagonal in them.
QcQcConstruction construct_qcqc(const ProcessMatrix& w, DephasedSystems which,
                                const std::vector<DephasingBasis>& bases = {}, double tol = 1e-9);

QcQcDecomposition qcqc_from_dephased_all(const ProcessMatrix& w, const std::vector<DephasingBasis>& bases = {},
                                         double tol = 1e-9);
QcQcDecomposition qcqc_from_dephased_inputs(const ProcessMatrix& w, const std::vector<DephasingBasis>& bases = {},
                                            double tol = 1e-9);

/// Splits a QC-QC decomposition of a process diagonal on every non-F system into
/// per-order witnesses, cell by cell, for any number of slots.
QcCcDecomposition qccc_from_dephased_qcqc(const ProcessMatrix& w, const QcQcDecomposition& d,
                                          const std::vector<DephasingBasis>& bases = {}, double tol = 1e-9);

/// Cells whose total weight is below this fraction of Tr W get zero terms.
inline constexpr double kZeroCellCutoff = 1e-12;
/// Relative off-diagonal mass tolerated when checking diagonality.
inline constexpr double kDiagonalTol = 1e-9;

}  // namespace procmat
