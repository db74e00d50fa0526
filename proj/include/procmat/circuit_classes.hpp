#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "procmat/process.hpp"

namespace procmat {

/// Index (𝒦_n, k_{n+1}) of a QC-QC witness: the slots already applied and the next one.
struct QcQcKey {
  SlotMask done = 0;
  std::size_t next = 0;

  auto operator<=>(const QcQcKey&) const = default;
};

/// Ordered sequence of distinct slot indices.
using Sequence = std::vector<std::size_t>;

struct QcQcDecomposition {
  std::map<QcQcKey, LabeledOperator> witnesses;
};

struct QcCcDecomposition {
  /// W_(k_1..k_n) for 1 ≤ n ≤ N.
  std::map<Sequence, LabeledOperator> order_witnesses;
  /// W_(k_1..k_N, F), keyed by the full sequence.
  std::map<Sequence, LabeledOperator> terminal_witnesses;
};

/// Every admissible QC-QC index, ordered by layer.
std::vector<QcQcKey> qcqc_keys(const ProcessLayout& layout);
/// Every sequence of length 1..N, ordered by length then lexicographically.
std::vector<Sequence> qccc_sequences(const ProcessLayout& layout);
/// Sequences of length exactly n.
std::vector<Sequence> sequences_of_length(const ProcessLayout& layout, std::size_t n);

/// Subsystems of W_(𝒦_n,k_{n+1}): P A_IO^{𝒦_n} A_I^{k_{n+1}}.
SubsystemSet qcqc_support(const ProcessLayout& layout, const QcQcKey& key);
/// Subsystems of W_(k_1..k_n): P A_IO^{k_1..k_{n-1}} A_I^{k_n}.
SubsystemSet qccc_support(const ProcessLayout& layout, const Sequence& seq);
SlotMask mask_of(const Sequence& seq);

std::string key_name(const ProcessLayout& layout, const QcQcKey& key);
std::string sequence_name(const ProcessLayout& layout, const Sequence& seq, bool terminal = false);

/// Residuals of the QC-QC characterization plus PSD margins of W and of every witness.
/// Missing witnesses count as zero; witnesses on the wrong subsystems throw.
ValidityReport verify_qcqc(const ProcessMatrix& w, const QcQcDecomposition& d, double tol = 1e-8);
ValidityReport verify_qccc(const ProcessMatrix& w, const QcCcDecomposition& d, double tol = 1e-8);

/// Applies the dephasing witness-wise (witnesses not containing the system are unchanged).
QcQcDecomposition dephase_decomposition(const QcQcDecomposition& d, const DephasingBasis& basis);
QcCcDecomposition dephase_decomposition(const QcCcDecomposition& d, const DephasingBasis& basis);

/// W_(𝒦_n,k_{n+1}) := Σ over orderings of 𝒦_n of W_(k_1..k_n,k_{n+1}).
QcQcDecomposition collapse_to_qcqc(const ProcessLayout& layout, const QcCcDecomposition& d);

struct QcQcSample {
  ProcessMatrix process;
  QcQcDecomposition decomposition;
};

struct QcCcSample {
  ProcessMatrix process;
  QcCcDecomposition decomposition;
};

/// Seeded random QC-QC built layer by layer from normalized Wishart blocks.
QcQcSample random_qcqc(const ProcessLayout& layout, std::uint64_t seed);
/// Seeded random QC-CC built sequence by sequence the same way.
QcCcSample random_qccc(const ProcessLayout& layout, std::uint64_t seed);

}  // namespace procmat
