#include "procmat/constructors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>

namespace procmat {

namespace {

// Rotates operators so that the declared dephasing bases become computational.
class Frame {
 public:
  Frame(const RegistryPtr& reg, const std::vector<DephasingBasis>& bases) {
    for (const auto& b : bases) {
      if (b.system() >= reg->size()) throw std::out_of_range("dephasing basis for unknown subsystem");
      if (!b.is_computational()) v_[b.system()] = b.vectors();
    }
  }

  LabeledOperator into(LabeledOperator x) const {
    for (const auto& [s, v] : v_)
      if (contains(x, s)) x = apply_local(x, s, v.adjoint());
    return x;
  }

  LabeledOperator out_of(LabeledOperator x) const {
    for (const auto& [s, v] : v_)
      if (contains(x, s)) x = apply_local(x, s, v);
    return hermitian_part(x);
  }

 private:
  static bool contains(const LabeledOperator& x, std::size_t s) {
    return std::binary_search(x.subsystems().begin(), x.subsystems().end(), s);
  }
  std::map<std::size_t, Eigen::MatrixXcd> v_;
};

void require_diagonal(const LabeledOperator& x, const SubsystemSet& systems, const std::string& what) {
  const double scale = std::max(1.0, max_abs(x));
  for (auto s : systems) {
    const double mass = off_diagonal_mass(x, DephasingBasis::computational(x.registry(), s));
    if (mass > kDiagonalTol * scale)
      throw std::domain_error(what + " is not diagonal on '" + (*x.registry())[s].name + "' (off-diagonal mass " +
                              std::to_string(mass) + ")");
  }
}

void require_bipartite(const ProcessLayout& layout, const char* what) {
  if (layout.n_slots() != 2) throw std::invalid_argument(std::string(what) + " requires exactly two slots");
}

}  // namespace

STSplit canonical_st_split(const ProcessLayout& layout, const LabeledOperator& x, double tol) {
  require_bipartite(layout, "canonical_st_split");
  const SubsystemSet AO = layout.output(0), BO = layout.output(1);
  const double pre = max_abs(one_minus(one_minus(x, AO), BO));
  if (pre > tol * std::max(1.0, max_abs(x)))
    throw std::domain_error("canonical_st_split: {}_[1-A_O][1-B_O] residual " + std::to_string(pre) + " exceeds tolerance");
  const auto& reg = *layout.registry();
  const double dA = static_cast<double>(reg.dimension(AO));
  const double dB = static_cast<double>(reg.dimension(BO));
  STSplit st{partial_trace(x, BO) * cplx(1.0 / dB, 0.0),
             partial_trace(x, AO) * cplx(1.0 / dA, 0.0) -
                 extend(partial_trace(x, set_union(AO, BO)), BO) * cplx(1.0 / (dA * dB), 0.0)};
  return st;
}

double st_reconstruction_residual(const ProcessLayout& layout, const STSplit& st, const LabeledOperator& x) {
  return max_abs(extend(st.S, layout.output(1)) + extend(st.T, layout.output(0)) - x);
}

std::pair<double, double> st_side_residuals(const ProcessLayout& layout, const STSplit& st) {
  return {max_abs(one_minus(partial_trace(st.S, layout.input(1)), layout.output(0))),
          max_abs(one_minus(partial_trace(st.T, layout.input(0)), layout.output(1)))};
}

QcQcConstruction construct_qcqc(const ProcessMatrix& w, DephasedSystems which, const std::vector<DephasingBasis>& bases,
                                double tol) {
  const auto& L = w.layout();
  require_bipartite(L, "construct_qcqc");
  const auto& reg = w.registry();
  auto rep = check_validity(w, tol);
  if (!rep.verdict)
    throw std::domain_error("construct_qcqc: input is not a valid process (max residual " +
                            std::to_string(rep.max_residual()) + ", min eigenvalue " + std::to_string(rep.psd_min_eig) + ")");
  const SubsystemSet AI = L.input(0), BI = L.input(1), AO = L.output(0), BO = L.output(1);
  const SubsystemSet cells = set_union(L.past(), set_union(AI, BI));
  SubsystemSet required = cells;
  if (which == DephasedSystems::All) required = set_union(required, set_union(AO, BO));

  Frame frame(reg, bases);
  LabeledOperator wr = frame.into(w.op());
  require_diagonal(wr, required, "process");

  const LabeledOperator x = partial_trace(wr, L.future());
  STSplit st = canonical_st_split(L, x, tol);

  const Eigen::Index n_cells = reg->dimension(cells);
  Eigen::VectorXd shift(n_cells);
  for (Eigen::Index c = 0; c < n_cells; ++c) {
    LabeledOperator block = diagonal_block(st.S, cells, c);
    if (which == DephasedSystems::All) shift[c] = block.matrix().diagonal().real().minCoeff();
    else shift[c] = min_eigenvalue(block.matrix());
  }
  LabeledOperator s_low = diagonal_operator(reg, cells, shift);
  const double dA = static_cast<double>(reg->dimension(AO));
  const double dB = static_cast<double>(reg->dimension(BO));

  QcQcConstruction out{st, s_low, {}};
  auto& wit = out.decomposition.witnesses;
  wit.emplace(QcQcKey{0b01, 1}, st.S - extend(s_low, AO));
  wit.emplace(QcQcKey{0b10, 0}, st.T + extend(s_low, BO));
  wit.emplace(QcQcKey{0b00, 0}, partial_trace(st.S, set_union(AO, BI)) * cplx(1.0 / dA, 0.0) - partial_trace(s_low, BI));
  wit.emplace(QcQcKey{0b00, 1}, partial_trace(st.T, set_union(BO, AI)) * cplx(1.0 / dB, 0.0) + partial_trace(s_low, AI));
  for (auto& [k, x_k] : wit) x_k = frame.out_of(x_k);
  out.split = {frame.out_of(st.S), frame.out_of(st.T)};
  out.shift = frame.out_of(s_low);
  return out;
}

QcQcDecomposition qcqc_from_dephased_all(const ProcessMatrix& w, const std::vector<DephasingBasis>& bases, double tol) {
  return construct_qcqc(w, DephasedSystems::All, bases, tol).decomposition;
}

QcQcDecomposition qcqc_from_dephased_inputs(const ProcessMatrix& w, const std::vector<DephasingBasis>& bases,
                                            double tol) {
  return construct_qcqc(w, DephasedSystems::InputsOnly, bases, tol).decomposition;
}

QcCcDecomposition qccc_from_dephased_qcqc(const ProcessMatrix& w, const QcQcDecomposition& d,
                                          const std::vector<DephasingBasis>& bases, double tol) {
  const auto& L = w.layout();
  const auto& reg = w.registry();
  const std::size_t n = L.n_slots();
  auto rep = verify_qcqc(w, d, tol);
  if (!rep.verdict)
    throw std::domain_error("qccc_from_dephased_qcqc: decomposition does not verify (max residual " +
                            std::to_string(rep.max_residual()) + ", min eigenvalue " + std::to_string(rep.psd_min_eig) + ")");
  Frame frame(reg, bases);
  const SubsystemSet non_future = set_difference(reg->all(), L.future());
  LabeledOperator wr = frame.into(w.op());
  require_diagonal(wr, non_future, "process");
  std::map<QcQcKey, LabeledOperator> dr;
  for (const auto& key : qcqc_keys(L)) {
    auto it = d.witnesses.find(key);
    LabeledOperator x = it == d.witnesses.end() ? LabeledOperator::zero(reg, qcqc_support(L, key)) : frame.into(it->second);
    require_diagonal(x, x.subsystems(), "witness " + key_name(L, key));
    dr.emplace(key, std::move(x));
  }

  const double cutoff = kZeroCellCutoff * std::abs(w.op().trace().real());
  QcCcDecomposition out;
  for (std::size_t k = 0; k < n; ++k) out.order_witnesses.emplace(Sequence{k}, dr.at({0, k}));

  // Ratio weights of each ordering of 𝒦_n per diagonal cell of P A_IO^{𝒦_n}.
  auto ratios = [&](const std::vector<Sequence>& seqs) {
    std::vector<Eigen::VectorXd> u;
    for (const auto& s : seqs) u.push_back(extend(out.order_witnesses.at(s), L.output(s.back())).matrix().diagonal().real());
    Eigen::VectorXd total = Eigen::VectorXd::Zero(u.front().size());
    for (const auto& v : u) total += v;
    std::vector<Eigen::VectorXd> r;
    for (const auto& v : u) {
      Eigen::VectorXd q(v.size());
      for (Eigen::Index i = 0; i < v.size(); ++i) q[i] = total[i] >= cutoff && total[i] > 0.0 ? v[i] / total[i] : 0.0;
      r.push_back(q);
    }
    return r;
  };
  auto scaled = [&](const Eigen::VectorXd& ratio, const SubsystemSet& base, const LabeledOperator& block) {
    LabeledOperator half = extend(diagonal_operator(reg, base, ratio.cwiseMax(0.0).cwiseSqrt()),
                                  set_difference(block.subsystems(), base));
    return hermitian_part(product(product(half, block), half));
  };

  for (std::size_t len = 1; len <= n; ++len) {
    for (SlotMask mask = 1; mask <= L.all_slots(); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != len) continue;
      std::vector<Sequence> seqs;
      for (const auto& s : sequences_of_length(L, len))
        if (mask_of(s) == mask) seqs.push_back(s);
      const SubsystemSet base = set_union(L.past(), L.io(mask));
      auto r = ratios(seqs);
      for (std::size_t i = 0; i < seqs.size(); ++i) {
        if (len == n) {
          out.terminal_witnesses.emplace(seqs[i], scaled(r[i], base, wr));
          continue;
        }
        for (std::size_t k = 0; k < n; ++k) {
          if (mask >> k & 1u) continue;
          Sequence next = seqs[i];
          next.push_back(k);
          out.order_witnesses.emplace(std::move(next), scaled(r[i], base, dr.at({mask, k})));
        }
      }
    }
  }
  for (auto& [s, x] : out.order_witnesses) x = frame.out_of(x);
  for (auto& [s, x] : out.terminal_witnesses) x = frame.out_of(x);
  return out;
}

}  // namespace procmat
