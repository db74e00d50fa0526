#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "procmat/sdp.hpp"

namespace procmat {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;

constexpr double kRankTol = 1e-9;

LabeledOperator apply_term(const EqualityTerm& t, const LabeledOperator& x) {
  LabeledOperator y = t.trace_over.empty() ? x : partial_trace(x, t.trace_over);
  if (!t.pad.empty()) y = extend(y, t.pad);
  return y * cplx(t.coeff, 0.0);
}

// T^* for T(X) = (Tr_J X) ⊗ 1^E, without the coefficient.
LabeledOperator adjoint_term(const EqualityTerm& t, const LabeledOperator& y) {
  LabeledOperator x = t.pad.empty() ? y : partial_trace(y, t.pad);
  return t.trace_over.empty() ? x : extend(x, t.trace_over);
}

// Orthonormal basis of the span of eigenvectors with |λ| above kRankTol·scale
// (or of the complement); scale defaults to the spectral radius of h.
MatrixXcd range_basis(const MatrixXcd& h, bool kernel = false, double scale = -1.0) {
  if (h.rows() == 0) return MatrixXcd(h.rows(), 0);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  const auto& ev = es.eigenvalues();
  if (scale < 0.0) scale = ev.cwiseAbs().maxCoeff();
  const double thr = kRankTol * std::max(scale, 1e-300);
  std::vector<Index> cols;
  for (Index i = 0; i < ev.size(); ++i) {
    const bool big = std::abs(ev[i]) > thr && scale > 0.0;
    if (big != kernel) cols.push_back(i);
  }
  MatrixXcd out(h.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = es.eigenvectors().col(cols[j]);
  return out;
}

MatrixXcd kernel_projector(const MatrixXcd& h) {
  MatrixXcd k = range_basis(h, true);
  return k * k.adjoint();
}

}  // namespace

void ConstraintSystem::validate() const {
  if (!registry) throw std::invalid_argument("constraint system without registry");
  const auto& reg = *registry;
  for (const auto& b : blocks) {
    for (auto s : b.subsystems)
      if (s >= reg.size()) throw std::invalid_argument("block '" + b.name + "' refers to an unknown subsystem");
    if (b.face && b.face->rows() != b.full_side(reg))
      throw std::invalid_argument("face of block '" + b.name + "' has the wrong number of rows");
  }
  for (const auto& e : equalities) {
    if (e.rhs.subsystems() != e.space || !same_registry(e.rhs.registry(), registry))
      throw std::invalid_argument("equality '" + e.name + "': right-hand side lives on the wrong space");
    if (e.range && e.range->rows() != reg.dimension(e.space))
      throw std::invalid_argument("equality '" + e.name + "': range has the wrong number of rows");
    for (const auto& t : e.terms) {
      if (t.block >= blocks.size()) throw std::invalid_argument("equality '" + e.name + "' refers to an unknown block");
      const auto& sub = blocks[t.block].subsystems;
      if (!is_subset(t.trace_over, sub) || !disjoint(t.pad, sub) ||
          set_union(set_difference(sub, t.trace_over), t.pad) != e.space)
        throw std::invalid_argument("equality '" + e.name + "': term on block '" + blocks[t.block].name +
                                    "' does not map onto " + reg.describe(e.space));
    }
  }
  if (kind == SystemKind::QcQc && qcqc_index.size() != blocks.size())
    throw std::invalid_argument("QC-QC system needs one index per block");
  if (kind == SystemKind::QcCc && (qccc_index.size() != blocks.size() || qccc_terminal.size() != blocks.size()))
    throw std::invalid_argument("QC-CC system needs one index per block");
}

std::size_t ConstraintSystem::n_parameters() const {
  std::size_t n = 0;
  for (const auto& b : blocks) {
    const auto r = static_cast<std::size_t>(b.side(*registry));
    n += r * r;
  }
  return n;
}

ConstraintSystem assemble_qcqc_system(const ProcessMatrix& w, bool reduce) {
  const auto& L = w.layout();
  const auto& reg = w.registry();
  const std::size_t n = L.n_slots();
  const SlotMask all = L.all_slots();
  ConstraintSystem sys;
  sys.kind = SystemKind::QcQc;
  sys.registry = reg;
  std::map<QcQcKey, std::size_t> idx;
  for (const auto& key : qcqc_keys(L)) {
    idx[key] = sys.blocks.size();
    sys.blocks.push_back({key_name(L, key), qcqc_support(L, key), std::nullopt});
    sys.qcqc_index.push_back(key);
  }
  auto layer_space = [&](SlotMask mask) { return set_union(L.past(), L.io(mask)); };
  auto incoming = [&](Equality& e, SlotMask mask, double sign) {
    for (std::size_t k = 0; k < n; ++k)
      if (mask >> k & 1u) e.terms.push_back({idx.at({mask & ~(SlotMask{1} << k), k}), sign, {}, L.output(k)});
  };
  auto outgoing = [&](Equality& e, SlotMask mask) {
    for (std::size_t k = 0; k < n; ++k)
      if (!(mask >> k & 1u)) e.terms.push_back({idx.at({mask, k}), 1.0, L.input(k), {}});
  };

  Equality top{"qcqc.top", layer_space(all), {}, partial_trace(w.op(), L.future()), std::nullopt};
  incoming(top, all, 1.0);
  sys.equalities.push_back(std::move(top));
  for (SlotMask mask = 1; mask < all; ++mask) {
    Equality e{"qcqc.layer[" + L.describe_mask(mask) + "]", layer_space(mask), {},
               LabeledOperator::zero(reg, layer_space(mask)), std::nullopt};
    outgoing(e, mask);
    incoming(e, mask, -1.0);
    sys.equalities.push_back(std::move(e));
  }
  Equality base{"qcqc.base", L.past(), {}, LabeledOperator::identity(reg, L.past()), std::nullopt};
  outgoing(base, 0);
  sys.equalities.push_back(std::move(base));
  sys.validate();
  if (reduce) facial_reduction(sys);
  return sys;
}

ConstraintSystem assemble_qccc_system(const ProcessMatrix& w, bool reduce) {
  const auto& L = w.layout();
  const auto& reg = w.registry();
  const std::size_t n = L.n_slots();
  ConstraintSystem sys;
  sys.kind = SystemKind::QcCc;
  sys.registry = reg;
  std::map<Sequence, std::size_t> order, terminal;
  for (const auto& s : qccc_sequences(L)) {
    order[s] = sys.blocks.size();
    sys.blocks.push_back({sequence_name(L, s), qccc_support(L, s), std::nullopt});
    sys.qccc_index.push_back(s);
    sys.qccc_terminal.push_back(false);
  }
  const auto full = sequences_of_length(L, n);
  for (const auto& s : full) {
    terminal[s] = sys.blocks.size();
    sys.blocks.push_back({sequence_name(L, s, true), reg->all(), std::nullopt});
    sys.qccc_index.push_back(s);
    sys.qccc_terminal.push_back(true);
  }
  const SubsystemSet non_future = set_difference(reg->all(), L.future());

  Equality sum{"qccc.sum", reg->all(), {}, w.op(), std::nullopt};
  for (const auto& s : full) sum.terms.push_back({terminal.at(s), 1.0, {}, {}});
  sys.equalities.push_back(std::move(sum));
  for (const auto& s : full) {
    Equality e{"qccc.terminal[" + sequence_name(L, s, true) + "]", non_future, {},
               LabeledOperator::zero(reg, non_future), std::nullopt};
    e.terms.push_back({terminal.at(s), 1.0, L.future(), {}});
    e.terms.push_back({order.at(s), -1.0, {}, L.output(s.back())});
    sys.equalities.push_back(std::move(e));
  }
  for (std::size_t len = 1; len < n; ++len)
    for (const auto& s : sequences_of_length(L, len)) {
      const SubsystemSet space = set_union(L.past(), L.io(mask_of(s)));
      Equality e{"qccc.layer[" + sequence_name(L, s) + "]", space, {}, LabeledOperator::zero(reg, space), std::nullopt};
      for (std::size_t k = 0; k < n; ++k) {
        if (mask_of(s) >> k & 1u) continue;
        Sequence next = s;
        next.push_back(k);
        e.terms.push_back({order.at(next), 1.0, L.input(k), {}});
      }
      e.terms.push_back({order.at(s), -1.0, {}, L.output(s.back())});
      sys.equalities.push_back(std::move(e));
    }
  Equality base{"qccc.base", L.past(), {}, LabeledOperator::identity(reg, L.past()), std::nullopt};
  for (std::size_t k = 0; k < n; ++k) base.terms.push_back({order.at(Sequence{k}), 1.0, L.input(k), {}});
  sys.equalities.push_back(std::move(base));
  sys.validate();
  if (reduce) facial_reduction(sys);
  return sys;
}

int facial_reduction(ConstraintSystem& sys) {
  sys.validate();
  const auto& reg = sys.registry;
  std::vector<MatrixXcd> faces;
  for (const auto& b : sys.blocks)
    faces.push_back(b.face ? *b.face : MatrixXcd::Identity(b.full_side(*reg), b.full_side(*reg)));
  auto projector = [&](std::size_t b) {
    return LabeledOperator(reg, sys.blocks[b].subsystems, faces[b] * faces[b].adjoint());
  };

  // Both sides of Σ_+ T(X) = rhs + Σ_- T(X) are PSD for feasible points, so
  // every term is confined to the intersection of their possible ranges.
  int sweeps = 0;
  for (bool changed = true; changed && sweeps < 32; ++sweeps) {
    changed = false;
    for (const auto& e : sys.equalities) {
      if (min_eigenvalue(e.rhs.matrix()) < -kHermitianTol * std::max(1.0, max_abs(e.rhs))) continue;
      LabeledOperator plus = LabeledOperator::zero(reg, e.space);
      LabeledOperator minus = e.rhs;
      for (const auto& t : e.terms) {
        LabeledOperator img = apply_term({t.block, std::abs(t.coeff), t.trace_over, t.pad}, projector(t.block));
        (t.coeff > 0 ? plus : minus) += img;
      }
      const MatrixXcd outside = kernel_projector(plus.matrix()) + kernel_projector(minus.matrix());
      if (outside.cwiseAbs().maxCoeff() == 0.0) continue;
      const LabeledOperator out_op(reg, e.space, outside);
      for (const auto& t : e.terms) {
        const MatrixXcd& v = faces[t.block];
        if (v.cols() == 0) continue;
        const MatrixXcd full = adjoint_term(t, out_op).matrix();
        const MatrixXcd q = v.adjoint() * full * v;
        const double norm = full.cwiseAbs().rowwise().sum().maxCoeff();
        const MatrixXcd k = range_basis(0.5 * (q + q.adjoint()), true, norm);
        if (k.cols() < v.cols()) {
          faces[t.block] = v * k;
          changed = true;
        }
      }
    }
  }

  for (std::size_t b = 0; b < sys.blocks.size(); ++b) {
    const Index full = sys.blocks[b].full_side(*reg);
    if (faces[b].cols() == full) sys.blocks[b].face.reset();
    else sys.blocks[b].face = faces[b];
  }
  // Lossless compression: the span of rhs and of every term's possible range.
  for (auto& e : sys.equalities) {
    const MatrixXcd r = range_basis(e.rhs.matrix());
    LabeledOperator acc(reg, e.space, r * r.adjoint());
    for (const auto& t : e.terms)
      acc += apply_term({t.block, 1.0, t.trace_over, t.pad}, projector(t.block));
    MatrixXcd u = range_basis(acc.matrix());
    if (u.cols() == acc.side()) e.range.reset();
    else e.range = std::move(u);
  }
  return sweeps;
}

Eigen::VectorXd hermitian_coords(const MatrixXcd& h) {
  const Index r = h.rows();
  Eigen::VectorXd x(r * r);
  Index k = 0;
  for (Index i = 0; i < r; ++i) x[k++] = h(i, i).real();
  for (Index i = 0; i < r; ++i)
    for (Index j = i + 1; j < r; ++j) {
      const cplx v = 0.5 * (h(i, j) + std::conj(h(j, i)));
      x[k++] = M_SQRT2 * v.real();
      x[k++] = M_SQRT2 * v.imag();
    }
  return x;
}

MatrixXcd from_hermitian_coords(const Eigen::Ref<const Eigen::VectorXd>& x, Index r) {
  if (x.size() != r * r) throw std::invalid_argument("from_hermitian_coords: size mismatch");
  MatrixXcd h(r, r);
  Index k = 0;
  for (Index i = 0; i < r; ++i) h(i, i) = x[k++];
  for (Index i = 0; i < r; ++i)
    for (Index j = i + 1; j < r; ++j) {
      const cplx v(x[k] * M_SQRT1_2, x[k + 1] * M_SQRT1_2);
      k += 2;
      h(i, j) = v;
      h(j, i) = std::conj(v);
    }
  return h;
}

LabeledOperator expand_block(const ConstraintSystem& sys, std::size_t b, const MatrixXcd& m) {
  const auto& blk = sys.blocks.at(b);
  if (!blk.face) return {sys.registry, blk.subsystems, m};
  return {sys.registry, blk.subsystems, *blk.face * m * blk.face->adjoint()};
}

std::vector<LabeledOperator> apply_equalities(const ConstraintSystem& sys, const std::vector<MatrixXcd>& free_blocks) {
  if (free_blocks.size() != sys.blocks.size()) throw std::invalid_argument("apply_equalities: one value per block expected");
  std::vector<LabeledOperator> full;
  for (std::size_t b = 0; b < sys.blocks.size(); ++b) full.push_back(expand_block(sys, b, free_blocks[b]));
  std::vector<LabeledOperator> out;
  for (const auto& e : sys.equalities) {
    LabeledOperator acc = LabeledOperator::zero(sys.registry, e.space);
    for (const auto& t : e.terms) acc += apply_term(t, full[t.block]);
    out.push_back(std::move(acc));
  }
  return out;
}

LinearSystem build_linear_system(const ConstraintSystem& sys) {
  sys.validate();
  const auto& reg = *sys.registry;
  LinearSystem ls;
  Index n = 0, m = 0;
  for (const auto& b : sys.blocks) {
    const Index r = b.side(reg);
    ls.block_offset.push_back(n);
    ls.block_side.push_back(r);
    n += r * r;
  }
  for (const auto& e : sys.equalities) {
    const Index u = e.range ? e.range->cols() : reg.dimension(e.space);
    ls.eq_offset.push_back(m);
    ls.eq_side.push_back(u);
    m += u * u;
  }
  ls.A = Eigen::MatrixXd::Zero(m, n);
  ls.c.resize(m);
  auto compress = [&](std::size_t ei, const MatrixXcd& y) -> MatrixXcd {
    const auto& e = sys.equalities[ei];
    return e.range ? MatrixXcd(e.range->adjoint() * y * *e.range) : y;
  };
  for (std::size_t ei = 0; ei < sys.equalities.size(); ++ei) {
    const Index u = ls.eq_side[ei];
    ls.c.segment(ls.eq_offset[ei], u * u) = hermitian_coords(compress(ei, sys.equalities[ei].rhs.matrix()));
  }
  for (std::size_t b = 0; b < sys.blocks.size(); ++b) {
    const Index r = ls.block_side[b];
    std::vector<std::pair<std::size_t, const EqualityTerm*>> uses;
    for (std::size_t ei = 0; ei < sys.equalities.size(); ++ei)
      for (const auto& t : sys.equalities[ei].terms)
        if (t.block == b) uses.emplace_back(ei, &t);
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(r * r);
    for (Index col = 0; col < r * r; ++col) {
      unit.setZero();
      unit[col] = 1.0;
      const LabeledOperator x = expand_block(sys, b, from_hermitian_coords(unit, r));
      for (const auto& [ei, t] : uses) {
        const Index u = ls.eq_side[ei];
        ls.A.block(ls.eq_offset[ei], ls.block_offset[b] + col, u * u, 1) +=
            hermitian_coords(compress(ei, apply_term(*t, x).matrix()));
      }
    }
  }
  return ls;
}

}  // namespace procmat
