#include "procmat/circuit_classes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>

namespace procmat {

namespace {

LabeledOperator zero_on(const RegistryPtr& reg, const SubsystemSet& s) { return LabeledOperator::zero(reg, s); }

void accumulate(std::optional<LabeledOperator>& acc, const LabeledOperator& x) {
  if (acc) *acc += x;
  else acc = x;
}

void record_psd(ValidityReport& rep, const std::string& name, const LabeledOperator& x) {
  rep.psd[name] = scaled_min_eig(x);
}

void finish(ValidityReport& rep, const ProcessMatrix& w, double tol) {
  record_psd(rep, "W", w.op());
  rep.normalization_gap = w.op().trace().real() - w.layout().normalization_target();
  double worst = 0.0;
  for (const auto& [name, v] : rep.psd) worst = std::min(worst, v);
  rep.psd_min_eig = worst;
  rep.verdict = rep.max_residual() <= tol && rep.psd_min_eig >= -tol;
}

const LabeledOperator* find_witness(const std::map<QcQcKey, LabeledOperator>& m, const QcQcKey& k) {
  auto it = m.find(k);
  return it == m.end() ? nullptr : &it->second;
}

const LabeledOperator* find_witness(const std::map<Sequence, LabeledOperator>& m, const Sequence& k) {
  auto it = m.find(k);
  return it == m.end() ? nullptr : &it->second;
}

void check_witness(const ProcessMatrix& w, const LabeledOperator& x, const SubsystemSet& support, const std::string& name) {
  if (!same_registry(x.registry(), w.registry()))
    throw std::invalid_argument("witness " + name + " uses a different registry");
  if (x.subsystems() != support)
    throw std::invalid_argument("witness " + name + " must act on " + w.registry()->describe(support) + ", got " +
                                x.describe_space());
}

bool valid_sequence(const ProcessLayout& layout, const Sequence& s) {
  if (s.empty() || s.size() > layout.n_slots()) return false;
  SlotMask seen = 0;
  for (auto k : s) {
    if (k >= layout.n_slots() || (seen >> k & 1u)) return false;
    seen |= SlotMask{1} << k;
  }
  return true;
}

// Eigen-decomposition based power of a PSD matrix; eigenvalues below `floor`
// are treated as zero (pseudo-inverse for negative powers).
Eigen::MatrixXcd psd_power(const Eigen::MatrixXcd& m, double power, double floor = 0.0) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()));
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = ev[i] > floor ? std::pow(ev[i], power) : 0.0;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

LabeledOperator wishart(const RegistryPtr& reg, const SubsystemSet& on, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const long d = reg->dimension(on);
  Eigen::MatrixXcd x(d, d);
  for (long j = 0; j < d; ++j)
    for (long i = 0; i < d; ++i) x(i, j) = cplx(g(rng), g(rng));
  return {reg, on, x * x.adjoint()};
}

// Given PSD R on `base` and children G_c on base ∪ extra_c, rescales the
// children so that Σ_c Tr_{extra_c} out_c = R.
std::vector<LabeledOperator> normalize_children(const LabeledOperator& r, const std::vector<LabeledOperator>& g,
                                                const std::vector<SubsystemSet>& extra) {
  std::optional<LabeledOperator> t;
  for (std::size_t c = 0; c < g.size(); ++c) accumulate(t, partial_trace(g[c], extra[c]));
  const Eigen::MatrixXcd t_inv_sqrt = psd_power(t->matrix(), -0.5, 1e-300);
  const Eigen::MatrixXcd r_sqrt = psd_power(r.matrix(), 0.5);
  LabeledOperator left(r.registry(), r.subsystems(), r_sqrt * t_inv_sqrt);
  std::vector<LabeledOperator> out;
  for (std::size_t c = 0; c < g.size(); ++c) {
    auto l = extend(left, extra[c]);
    out.push_back(hermitian_part(LabeledOperator(l.registry(), l.subsystems(),
                                                 l.matrix() * g[c].matrix() * l.matrix().adjoint())));
  }
  return out;
}

}  // namespace

std::vector<QcQcKey> qcqc_keys(const ProcessLayout& layout) {
  std::vector<QcQcKey> keys;
  const std::size_t n = layout.n_slots();
  for (std::size_t layer = 0; layer < n; ++layer)
    for (SlotMask mask = 0; mask < layout.all_slots(); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != layer) continue;
      for (std::size_t k = 0; k < n; ++k)
        if (!(mask >> k & 1u)) keys.push_back({mask, k});
    }
  return keys;
}

std::vector<Sequence> sequences_of_length(const ProcessLayout& layout, std::size_t len) {
  std::vector<Sequence> out;
  const std::size_t n = layout.n_slots();
  Sequence cur;
  std::vector<bool> used(n, false);
  auto rec = [&](auto&& self) -> void {
    if (cur.size() == len) {
      out.push_back(cur);
      return;
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (used[k]) continue;
      used[k] = true;
      cur.push_back(k);
      self(self);
      cur.pop_back();
      used[k] = false;
    }
  };
  if (len >= 1 && len <= n) rec(rec);
  return out;
}

std::vector<Sequence> qccc_sequences(const ProcessLayout& layout) {
  std::vector<Sequence> out;
  for (std::size_t len = 1; len <= layout.n_slots(); ++len) {
    auto s = sequences_of_length(layout, len);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

SlotMask mask_of(const Sequence& seq) {
  SlotMask m = 0;
  for (auto k : seq) m |= SlotMask{1} << k;
  return m;
}

SubsystemSet qcqc_support(const ProcessLayout& layout, const QcQcKey& key) {
  return set_union(set_union(layout.past(), layout.io(key.done)), layout.input(key.next));
}

SubsystemSet qccc_support(const ProcessLayout& layout, const Sequence& seq) {
  if (seq.empty()) throw std::invalid_argument("empty sequence has no witness");
  Sequence head(seq.begin(), seq.end() - 1);
  return set_union(set_union(layout.past(), layout.io(mask_of(head))), layout.input(seq.back()));
}

std::string key_name(const ProcessLayout& layout, const QcQcKey& key) {
  return "W(" + layout.describe_mask(key.done) + "," + layout.slots().at(key.next).name + ")";
}

std::string sequence_name(const ProcessLayout& layout, const Sequence& seq, bool terminal) {
  std::string out = "W(";
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ",";
    out += layout.slots().at(seq[i]).name;
  }
  if (terminal) out += ",F";
  return out + ")";
}

ValidityReport verify_qcqc(const ProcessMatrix& w, const QcQcDecomposition& d, double tol) {
  const auto& L = w.layout();
  const auto& reg = w.registry();
  const SlotMask all = L.all_slots();
  for (const auto& [key, x] : d.witnesses) {
    if (key.next >= L.n_slots() || (key.done >> key.next & 1u) || (key.done & ~all) || key.done == all)
      throw std::invalid_argument("QC-QC witness index out of range for " + std::to_string(L.n_slots()) + " slots");
    check_witness(w, x, qcqc_support(L, key), key_name(L, key));
  }
  ValidityReport rep;
  // Σ_{k ∈ K} W_(K∖k, k) ⊗ 1^{A_O^k}, an operator on P A_IO^K.
  auto incoming = [&](SlotMask mask) {
    LabeledOperator acc = zero_on(reg, set_union(L.past(), L.io(mask)));
    for (std::size_t k = 0; k < L.n_slots(); ++k) {
      if (!(mask >> k & 1u)) continue;
      if (auto* x = find_witness(d.witnesses, {mask & ~(SlotMask{1} << k), k})) acc += extend(*x, L.output(k));
    }
    return acc;
  };
  // Σ_{k ∉ K} Tr_{A_I^k} W_(K, k).
  auto outgoing = [&](SlotMask mask) {
    LabeledOperator acc = zero_on(reg, set_union(L.past(), L.io(mask)));
    for (std::size_t k = 0; k < L.n_slots(); ++k) {
      if (mask >> k & 1u) continue;
      if (auto* x = find_witness(d.witnesses, {mask, k})) acc += partial_trace(*x, L.input(k));
    }
    return acc;
  };
  rep.residuals["qcqc.top"] = max_abs(partial_trace(w.op(), L.future()) - incoming(all));
  for (SlotMask mask = 1; mask < all; ++mask)
    rep.residuals["qcqc.layer[" + L.describe_mask(mask) + "]"] = max_abs(outgoing(mask) - incoming(mask));
  rep.residuals["qcqc.base"] = max_abs(outgoing(0) - LabeledOperator::identity(reg, L.past()));
  for (const auto& key : qcqc_keys(L)) {
    const auto* x = find_witness(d.witnesses, key);
    rep.psd[key_name(L, key)] = x ? scaled_min_eig(*x) : 0.0;
  }
  finish(rep, w, tol);
  return rep;
}

ValidityReport verify_qccc(const ProcessMatrix& w, const QcCcDecomposition& d, double tol) {
  const auto& L = w.layout();
  const auto& reg = w.registry();
  const std::size_t n = L.n_slots();
  for (const auto& [seq, x] : d.order_witnesses) {
    if (!valid_sequence(L, seq)) throw std::invalid_argument("QC-CC order witness index is not a valid sequence");
    check_witness(w, x, qccc_support(L, seq), sequence_name(L, seq));
  }
  for (const auto& [seq, x] : d.terminal_witnesses) {
    if (!valid_sequence(L, seq) || seq.size() != n)
      throw std::invalid_argument("QC-CC terminal witness index must be a full sequence");
    check_witness(w, x, reg->all(), sequence_name(L, seq, true));
  }
  ValidityReport rep;
  auto padded_order = [&](const Sequence& s) {
    const auto* x = find_witness(d.order_witnesses, s);
    return x ? extend(*x, L.output(s.back())) : zero_on(reg, set_union(L.past(), L.io(mask_of(s))));
  };
  LabeledOperator sum = zero_on(reg, reg->all());
  for (const auto& s : sequences_of_length(L, n))
    if (auto* x = find_witness(d.terminal_witnesses, s)) sum += *x;
  rep.residuals["qccc.sum"] = max_abs(w.op() - sum);
  for (const auto& s : sequences_of_length(L, n)) {
    const auto* x = find_witness(d.terminal_witnesses, s);
    LabeledOperator lhs = x ? partial_trace(*x, L.future()) : zero_on(reg, set_difference(reg->all(), L.future()));
    rep.residuals["qccc.terminal[" + sequence_name(L, s, true) + "]"] = max_abs(lhs - padded_order(s));
  }
  for (std::size_t len = 1; len < n; ++len)
    for (const auto& s : sequences_of_length(L, len)) {
      LabeledOperator acc = zero_on(reg, set_union(L.past(), L.io(mask_of(s))));
      for (std::size_t k = 0; k < n; ++k) {
        if (mask_of(s) >> k & 1u) continue;
        Sequence next = s;
        next.push_back(k);
        if (auto* x = find_witness(d.order_witnesses, next)) acc += partial_trace(*x, L.input(k));
      }
      rep.residuals["qccc.layer[" + sequence_name(L, s) + "]"] = max_abs(acc - padded_order(s));
    }
  LabeledOperator base = zero_on(reg, L.past());
  for (std::size_t k = 0; k < n; ++k)
    if (auto* x = find_witness(d.order_witnesses, Sequence{k})) base += partial_trace(*x, L.input(k));
  rep.residuals["qccc.base"] = max_abs(base - LabeledOperator::identity(reg, L.past()));
  for (const auto& s : qccc_sequences(L)) {
    const auto* x = find_witness(d.order_witnesses, s);
    rep.psd[sequence_name(L, s)] = x ? scaled_min_eig(*x) : 0.0;
  }
  for (const auto& s : sequences_of_length(L, n)) {
    const auto* x = find_witness(d.terminal_witnesses, s);
    rep.psd[sequence_name(L, s, true)] = x ? scaled_min_eig(*x) : 0.0;
  }
  finish(rep, w, tol);
  return rep;
}

namespace {

LabeledOperator dephase_if_present(const LabeledOperator& x, const DephasingBasis& b) {
  if (!std::binary_search(x.subsystems().begin(), x.subsystems().end(), b.system())) return x;
  return dephase(x, b);
}

}  // namespace

QcQcDecomposition dephase_decomposition(const QcQcDecomposition& d, const DephasingBasis& basis) {
  QcQcDecomposition out;
  for (const auto& [k, x] : d.witnesses) out.witnesses.emplace(k, dephase_if_present(x, basis));
  return out;
}

QcCcDecomposition dephase_decomposition(const QcCcDecomposition& d, const DephasingBasis& basis) {
  QcCcDecomposition out;
  for (const auto& [k, x] : d.order_witnesses) out.order_witnesses.emplace(k, dephase_if_present(x, basis));
  for (const auto& [k, x] : d.terminal_witnesses) out.terminal_witnesses.emplace(k, dephase_if_present(x, basis));
  return out;
}

QcQcDecomposition collapse_to_qcqc(const ProcessLayout& layout, const QcCcDecomposition& d) {
  std::map<QcQcKey, std::optional<LabeledOperator>> acc;
  for (const auto& [seq, x] : d.order_witnesses) {
    if (!valid_sequence(layout, seq)) throw std::invalid_argument("collapse_to_qcqc: invalid sequence");
    Sequence head(seq.begin(), seq.end() - 1);
    accumulate(acc[{mask_of(head), seq.back()}], x);
  }
  QcQcDecomposition out;
  for (auto& [k, x] : acc) out.witnesses.emplace(k, std::move(*x));
  return out;
}

QcQcSample random_qcqc(const ProcessLayout& layout, std::uint64_t seed) {
  const auto& reg = layout.registry();
  const std::size_t n = layout.n_slots();
  std::mt19937_64 rng(seed);
  QcQcDecomposition d;
  auto incoming = [&](SlotMask mask) {
    if (mask == 0) return LabeledOperator::identity(reg, layout.past());
    LabeledOperator acc = zero_on(reg, set_union(layout.past(), layout.io(mask)));
    for (std::size_t k = 0; k < n; ++k)
      if (mask >> k & 1u) acc += extend(d.witnesses.at({mask & ~(SlotMask{1} << k), k}), layout.output(k));
    return acc;
  };
  for (std::size_t layer = 0; layer < n; ++layer)
    for (SlotMask mask = 0; mask < layout.all_slots(); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != layer) continue;
      const SubsystemSet base = set_union(layout.past(), layout.io(mask));
      std::vector<std::size_t> next;
      std::vector<LabeledOperator> g;
      std::vector<SubsystemSet> extra;
      for (std::size_t k = 0; k < n; ++k) {
        if (mask >> k & 1u) continue;
        next.push_back(k);
        extra.push_back(layout.input(k));
        g.push_back(wishart(reg, set_union(base, layout.input(k)), rng));
      }
      auto out = normalize_children(incoming(mask), g, extra);
      for (std::size_t c = 0; c < next.size(); ++c) d.witnesses.emplace(QcQcKey{mask, next[c]}, std::move(out[c]));
    }
  auto g = wishart(reg, reg->all(), rng);
  auto top = normalize_children(incoming(layout.all_slots()), {g}, {layout.future()});
  return {ProcessMatrix(layout, std::move(top[0])), std::move(d)};
}

QcCcSample random_qccc(const ProcessLayout& layout, std::uint64_t seed) {
  const auto& reg = layout.registry();
  const std::size_t n = layout.n_slots();
  std::mt19937_64 rng(seed);
  QcCcDecomposition d;
  auto expand = [&](const Sequence& prefix, const LabeledOperator& r) {
    const SubsystemSet base = set_union(layout.past(), layout.io(mask_of(prefix)));
    std::vector<std::size_t> next;
    std::vector<LabeledOperator> g;
    std::vector<SubsystemSet> extra;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask_of(prefix) >> k & 1u) continue;
      next.push_back(k);
      extra.push_back(layout.input(k));
      g.push_back(wishart(reg, set_union(base, layout.input(k)), rng));
    }
    auto out = normalize_children(r, g, extra);
    for (std::size_t c = 0; c < next.size(); ++c) {
      Sequence s = prefix;
      s.push_back(next[c]);
      d.order_witnesses.emplace(std::move(s), std::move(out[c]));
    }
  };
  expand({}, LabeledOperator::identity(reg, layout.past()));
  for (std::size_t len = 1; len < n; ++len)
    for (const auto& s : sequences_of_length(layout, len)) expand(s, extend(d.order_witnesses.at(s), layout.output(s.back())));
  LabeledOperator total = zero_on(reg, reg->all());
  for (const auto& s : sequences_of_length(layout, n)) {
    auto r = extend(d.order_witnesses.at(s), layout.output(s.back()));
    auto top = normalize_children(r, {wishart(reg, reg->all(), rng)}, {layout.future()});
    total += top[0];
    d.terminal_witnesses.emplace(s, std::move(top[0]));
  }
  return {ProcessMatrix(layout, hermitian_part(total)), std::move(d)};
}

}  // namespace procmat
