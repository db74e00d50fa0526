#include "procmat/labeled_operator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace procmat {

namespace {

using Index = Eigen::Index;

void check_set(const SpaceRegistry& reg, const SubsystemSet& set) {
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (set[k] >= reg.size()) throw std::out_of_range("subsystem index out of range");
    if (k && set[k] <= set[k - 1]) throw std::invalid_argument("subsystem set must be sorted and duplicate-free");
  }
}

// Stride of each member of `within` when it is laid out in canonical order.
std::vector<Index> strides_of(const SpaceRegistry& reg, const SubsystemSet& within) {
  std::vector<Index> s(within.size());
  Index acc = 1;
  for (std::size_t k = within.size(); k-- > 0;) {
    s[k] = acc;
    acc *= reg[within[k]].dim;
  }
  return s;
}

// All flat offsets (within the layout of `within`) spanned by the members of
// `part`, enumerated with `part` in canonical order (first = most significant).
std::vector<Index> offsets(const SpaceRegistry& reg, const SubsystemSet& within, const SubsystemSet& part) {
  auto strides = strides_of(reg, within);
  std::vector<Index> out{0};
  for (auto sys : part) {
    auto it = std::lower_bound(within.begin(), within.end(), sys);
    if (it == within.end() || *it != sys) throw std::invalid_argument("subsystem not part of operator");
    Index stride = strides[static_cast<std::size_t>(it - within.begin())];
    int d = reg[sys].dim;
    std::vector<Index> next;
    next.reserve(out.size() * static_cast<std::size_t>(d));
    for (auto o : out)
      for (int x = 0; x < d; ++x) next.push_back(o + x * stride);
    out.swap(next);
  }
  return out;
}

Index stride_in(const SpaceRegistry& reg, const SubsystemSet& within, std::size_t sys) {
  auto it = std::lower_bound(within.begin(), within.end(), sys);
  if (it == within.end() || *it != sys)
    throw std::invalid_argument("subsystem '" + reg[sys].name + "' not part of operator");
  return strides_of(reg, within)[static_cast<std::size_t>(it - within.begin())];
}

void require_subset(const LabeledOperator& w, const SubsystemSet& x, const char* what) {
  for (auto s : x) {
    if (s >= w.registry()->size()) throw std::out_of_range(std::string(what) + ": subsystem index out of range");
    if (!std::binary_search(w.subsystems().begin(), w.subsystems().end(), s))
      throw std::invalid_argument(std::string(what) + ": subsystem '" + (*w.registry())[s].name +
                                  "' not in " + w.describe_space());
  }
}

}  // namespace

LabeledOperator::LabeledOperator(RegistryPtr registry, SubsystemSet subsystems, Eigen::MatrixXcd entries)
    : registry_(std::move(registry)), subsystems_(std::move(subsystems)), m_(std::move(entries)) {
  if (!registry_) throw std::invalid_argument("operator needs a registry");
  check_set(*registry_, subsystems_);
  const long d = registry_->dimension(subsystems_);
  if (m_.rows() != d || m_.cols() != d)
    throw std::invalid_argument("operator on " + registry_->describe(subsystems_) + " must be " + std::to_string(d) +
                                "x" + std::to_string(d) + ", got " + std::to_string(m_.rows()) + "x" +
                                std::to_string(m_.cols()));
}

LabeledOperator LabeledOperator::identity(RegistryPtr registry, SubsystemSet subsystems) {
  const long d = registry->dimension(subsystems);
  return {std::move(registry), std::move(subsystems), Eigen::MatrixXcd::Identity(d, d)};
}

LabeledOperator LabeledOperator::zero(RegistryPtr registry, SubsystemSet subsystems) {
  const long d = registry->dimension(subsystems);
  return {std::move(registry), std::move(subsystems), Eigen::MatrixXcd::Zero(d, d)};
}

LabeledOperator LabeledOperator::local(RegistryPtr registry, std::size_t system, Eigen::MatrixXcd entries) {
  return {std::move(registry), SubsystemSet{system}, std::move(entries)};
}

LabeledOperator LabeledOperator::projector(RegistryPtr registry, SubsystemSet subsystems, const Eigen::VectorXcd& v) {
  return {std::move(registry), std::move(subsystems), v * v.adjoint()};
}

std::vector<int> LabeledOperator::dims() const {
  std::vector<int> d;
  for (auto s : subsystems_) d.push_back((*registry_)[s].dim);
  return d;
}

LabeledOperator LabeledOperator::adjoint() const { return {registry_, subsystems_, m_.adjoint()}; }

bool LabeledOperator::same_space(const LabeledOperator& other) const {
  return subsystems_ == other.subsystems_ && same_registry(registry_, other.registry_);
}

std::string LabeledOperator::describe_space() const {
  return registry_ ? registry_->describe(subsystems_) : std::string("{}");
}

void LabeledOperator::require_same_space(const LabeledOperator& other, const char* what) const {
  if (!same_space(other))
    throw std::invalid_argument(std::string(what) + ": operands live on " + describe_space() + " and " +
                                other.describe_space());
}

LabeledOperator& LabeledOperator::operator+=(const LabeledOperator& rhs) {
  require_same_space(rhs, "operator+");
  m_ += rhs.m_;
  return *this;
}

LabeledOperator& LabeledOperator::operator-=(const LabeledOperator& rhs) {
  require_same_space(rhs, "operator-");
  m_ -= rhs.m_;
  return *this;
}

LabeledOperator& LabeledOperator::operator*=(cplx s) {
  m_ *= s;
  return *this;
}

double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }
double max_abs(const LabeledOperator& w) { return max_abs(w.matrix()); }

double hermiticity_defect(const LabeledOperator& w) { return max_abs(w.matrix() - w.matrix().adjoint()); }

bool is_hermitian(const LabeledOperator& w, double tol) {
  return hermiticity_defect(w) <= tol * std::max(1.0, max_abs(w));
}

void require_hermitian(const LabeledOperator& w, const char* context, double tol) {
  if (!is_hermitian(w, tol))
    throw std::invalid_argument(std::string(context) + ": operator is not Hermitian (defect " +
                                std::to_string(hermiticity_defect(w)) + ")");
}

LabeledOperator hermitian_part(const LabeledOperator& w) {
  Eigen::MatrixXcd h = 0.5 * (w.matrix() + w.matrix().adjoint());
  return {w.registry(), w.subsystems(), std::move(h)};
}

LabeledOperator product(const LabeledOperator& a, const LabeledOperator& b) {
  if (!a.same_space(b)) throw std::invalid_argument("product: operands live on different spaces");
  return {a.registry(), a.subsystems(), a.matrix() * b.matrix()};
}

cplx hs_inner(const LabeledOperator& a, const LabeledOperator& b) {
  if (!a.same_space(b)) throw std::invalid_argument("hs_inner: operands live on different spaces");
  return (a.matrix().conjugate().cwiseProduct(b.matrix())).sum();
}

LabeledOperator transpose(const LabeledOperator& w) { return {w.registry(), w.subsystems(), w.matrix().transpose()}; }

LabeledOperator tensor(const LabeledOperator& a, const LabeledOperator& b) {
  if (!same_registry(a.registry(), b.registry())) throw std::invalid_argument("tensor: operands use different registries");
  if (!disjoint(a.subsystems(), b.subsystems()))
    throw std::invalid_argument("tensor: overlapping subsystems " + a.describe_space() + " and " + b.describe_space());
  const auto& reg = *a.registry();
  SubsystemSet u = set_union(a.subsystems(), b.subsystems());
  auto oa = offsets(reg, u, a.subsystems());
  auto ob = offsets(reg, u, b.subsystems());
  const Index d = reg.dimension(u);
  Eigen::MatrixXcd out(d, d);
  const auto& A = a.matrix();
  const auto& B = b.matrix();
  for (Index j = 0; j < A.cols(); ++j)
    for (Index l = 0; l < B.cols(); ++l) {
      const Index col = oa[j] + ob[l];
      for (Index i = 0; i < A.rows(); ++i) {
        const cplx aij = A(i, j);
        for (Index k = 0; k < B.rows(); ++k) out(oa[i] + ob[k], col) = aij * B(k, l);
      }
    }
  return {a.registry(), std::move(u), std::move(out)};
}

LabeledOperator extend(const LabeledOperator& w, const SubsystemSet& systems) {
  if (systems.empty()) return w;
  check_set(*w.registry(), systems);
  if (!disjoint(w.subsystems(), systems))
    throw std::invalid_argument("extend: " + w.registry()->describe(systems) + " overlaps " + w.describe_space());
  const auto& reg = *w.registry();
  SubsystemSet u = set_union(w.subsystems(), systems);
  auto ow = offsets(reg, u, w.subsystems());
  auto oe = offsets(reg, u, systems);
  const Index d = reg.dimension(u);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  const auto& W = w.matrix();
  for (Index j = 0; j < W.cols(); ++j)
    for (Index i = 0; i < W.rows(); ++i) {
      const cplx v = W(i, j);
      if (v == cplx(0.0, 0.0)) continue;
      for (auto e : oe) out(ow[i] + e, ow[j] + e) = v;
    }
  return {w.registry(), std::move(u), std::move(out)};
}

LabeledOperator embed(const LabeledOperator& w, const SubsystemSet& target) {
  if (!is_subset(w.subsystems(), target))
    throw std::invalid_argument("embed: " + w.describe_space() + " is not contained in " + w.registry()->describe(target));
  return extend(w, set_difference(target, w.subsystems()));
}

LabeledOperator partial_trace(const LabeledOperator& w, const SubsystemSet& over) {
  check_set(*w.registry(), over);
  require_subset(w, over, "partial_trace");
  if (over.empty()) return w;
  const auto& reg = *w.registry();
  SubsystemSet keep = set_difference(w.subsystems(), over);
  auto ok = offsets(reg, w.subsystems(), keep);
  auto ot = offsets(reg, w.subsystems(), over);
  const Index d = static_cast<Index>(ok.size());
  Eigen::MatrixXcd out(d, d);
  const auto& W = w.matrix();
  for (Index b = 0; b < d; ++b)
    for (Index a = 0; a < d; ++a) {
      cplx acc(0.0, 0.0);
      for (auto t : ot) acc += W(ok[a] + t, ok[b] + t);
      out(a, b) = acc;
    }
  return {w.registry(), std::move(keep), std::move(out)};
}

LabeledOperator trace_and_replace(const LabeledOperator& w, const SubsystemSet& x) {
  if (x.empty()) return w;
  auto reduced = partial_trace(w, x);
  reduced *= cplx(1.0 / static_cast<double>(w.registry()->dimension(x)), 0.0);
  return extend(reduced, x);
}

LabeledOperator one_minus(const LabeledOperator& w, const SubsystemSet& x) { return w - trace_and_replace(w, x); }

LabeledOperator apply_local(const LabeledOperator& w, std::size_t system, const Eigen::MatrixXcd& u) {
  const auto& reg = *w.registry();
  const Index stride = stride_in(reg, w.subsystems(), system);
  const int d = reg[system].dim;
  if (u.rows() != d || u.cols() != d)
    throw std::invalid_argument("apply_local: matrix size does not match subsystem '" + reg[system].name + "'");
  auto rest = offsets(reg, w.subsystems(), set_difference(w.subsystems(), SubsystemSet{system}));
  Eigen::MatrixXcd m = w.matrix();
  Eigen::VectorXcd tmp(d), res(d);
  // rows: m <- (U ⊗ 1) m
  for (Index c = 0; c < m.cols(); ++c)
    for (auto r : rest) {
      for (int x = 0; x < d; ++x) tmp[x] = m(r + x * stride, c);
      res.noalias() = u * tmp;
      for (int x = 0; x < d; ++x) m(r + x * stride, c) = res[x];
    }
  // columns: m <- m (U ⊗ 1)^dag
  const Eigen::MatrixXcd uc = u.conjugate();
  for (Index rr = 0; rr < m.rows(); ++rr)
    for (auto r : rest) {
      for (int x = 0; x < d; ++x) tmp[x] = m(rr, r + x * stride);
      res.noalias() = uc * tmp;
      for (int x = 0; x < d; ++x) m(rr, r + x * stride) = res[x];
    }
  return {w.registry(), w.subsystems(), std::move(m)};
}

LabeledOperator sandwich(const LabeledOperator& w, std::size_t system, const Eigen::VectorXcd& psi) {
  const auto& reg = *w.registry();
  const Index stride = stride_in(reg, w.subsystems(), system);
  const int d = reg[system].dim;
  if (psi.size() != d) throw std::invalid_argument("sandwich: state size does not match subsystem '" + reg[system].name + "'");
  SubsystemSet keep = set_difference(w.subsystems(), SubsystemSet{system});
  auto rest = offsets(reg, w.subsystems(), keep);
  const Index n = static_cast<Index>(rest.size());
  const auto& W = w.matrix();
  Eigen::MatrixXcd out(n, n);
  for (Index b = 0; b < n; ++b)
    for (Index a = 0; a < n; ++a) {
      cplx acc(0.0, 0.0);
      for (int x = 0; x < d; ++x) {
        if (psi[x] == cplx()) continue;
        cplx inner(0.0, 0.0);
        for (int y = 0; y < d; ++y) inner += W(rest[a] + x * stride, rest[b] + y * stride) * psi[y];
        acc += std::conj(psi[x]) * inner;
      }
      out(a, b) = acc;
    }
  return {w.registry(), std::move(keep), std::move(out)};
}

LabeledOperator diagonal_block(const LabeledOperator& w, const SubsystemSet& cell_systems, Index cell) {
  check_set(*w.registry(), cell_systems);
  require_subset(w, cell_systems, "diagonal_block");
  const auto& reg = *w.registry();
  auto oc = offsets(reg, w.subsystems(), cell_systems);
  if (cell < 0 || cell >= static_cast<Index>(oc.size())) throw std::out_of_range("diagonal_block: cell out of range");
  SubsystemSet keep = set_difference(w.subsystems(), cell_systems);
  auto ok = offsets(reg, w.subsystems(), keep);
  const Index n = static_cast<Index>(ok.size());
  const Index base = oc[static_cast<std::size_t>(cell)];
  Eigen::MatrixXcd out(n, n);
  for (Index b = 0; b < n; ++b)
    for (Index a = 0; a < n; ++a) out(a, b) = w.matrix()(base + ok[a], base + ok[b]);
  return {w.registry(), std::move(keep), std::move(out)};
}

LabeledOperator diagonal_operator(const RegistryPtr& registry, const SubsystemSet& on, const Eigen::VectorXd& entries) {
  Eigen::MatrixXcd m = entries.cast<cplx>().asDiagonal();
  return {registry, on, std::move(m)};
}

DephasingBasis::DephasingBasis(RegistryPtr registry, std::size_t system, Eigen::MatrixXcd vectors)
    : system_(system), vectors_(std::move(vectors)) {
  if (!registry || system >= registry->size()) throw std::out_of_range("dephasing basis: unknown subsystem");
  const int d = (*registry)[system].dim;
  if (vectors_.rows() != d || vectors_.cols() != d)
    throw std::invalid_argument("dephasing basis for '" + (*registry)[system].name + "' needs " + std::to_string(d) +
                                " vectors of length " + std::to_string(d));
  Eigen::MatrixXcd gram = vectors_.adjoint() * vectors_;
  if (max_abs(gram - Eigen::MatrixXcd::Identity(d, d)) > kHermitianTol)
    throw std::invalid_argument("dephasing basis for '" + (*registry)[system].name + "' is not orthonormal");
}

DephasingBasis DephasingBasis::computational(RegistryPtr registry, std::size_t system) {
  const int d = (*registry)[system].dim;
  return {std::move(registry), system, Eigen::MatrixXcd::Identity(d, d)};
}

DephasingBasis DephasingBasis::fourier(RegistryPtr registry, std::size_t system) {
  const int d = (*registry)[system].dim;
  Eigen::MatrixXcd f(d, d);
  const double pi = std::acos(-1.0);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) f(j, k) = std::polar(1.0 / std::sqrt(static_cast<double>(d)), 2.0 * pi * j * k / d);
  if (d == 2) f << M_SQRT1_2, M_SQRT1_2, M_SQRT1_2, -M_SQRT1_2;
  return {std::move(registry), system, std::move(f)};
}

bool DephasingBasis::is_computational() const {
  return vectors_ == Eigen::MatrixXcd::Identity(vectors_.rows(), vectors_.cols());
}

namespace {

// Zeroes entries whose row and column differ in the digit of `system`.
void mask_offdiagonal(Eigen::MatrixXcd& m, Index stride, int d) {
  for (Index c = 0; c < m.cols(); ++c) {
    const Index dc = (c / stride) % d;
    for (Index r = 0; r < m.rows(); ++r)
      if ((r / stride) % d != dc) m(r, c) = cplx(0.0, 0.0);
  }
}

double offdiagonal_max(const Eigen::MatrixXcd& m, Index stride, int d) {
  double worst = 0.0;
  for (Index c = 0; c < m.cols(); ++c) {
    const Index dc = (c / stride) % d;
    for (Index r = 0; r < m.rows(); ++r)
      if ((r / stride) % d != dc) worst = std::max(worst, std::abs(m(r, c)));
  }
  return worst;
}

}  // namespace

LabeledOperator dephase(const LabeledOperator& w, const DephasingBasis& basis) {
  const auto& reg = *w.registry();
  const Index stride = stride_in(reg, w.subsystems(), basis.system());
  const int d = reg[basis.system()].dim;
  if (basis.vectors().rows() != d) throw std::invalid_argument("dephase: basis dimension mismatch");
  if (basis.is_computational()) {
    LabeledOperator out = w;
    mask_offdiagonal(out.matrix(), stride, d);
    return out;
  }
  LabeledOperator rotated = apply_local(w, basis.system(), basis.vectors().adjoint());
  mask_offdiagonal(rotated.matrix(), stride, d);
  return apply_local(rotated, basis.system(), basis.vectors());
}

LabeledOperator dephase(const LabeledOperator& w, const std::vector<DephasingBasis>& bases) {
  LabeledOperator out = w;
  for (const auto& b : bases) out = dephase(out, b);
  return out;
}

double off_diagonal_mass(const LabeledOperator& w, const DephasingBasis& basis) {
  const auto& reg = *w.registry();
  const Index stride = stride_in(reg, w.subsystems(), basis.system());
  const int d = reg[basis.system()].dim;
  if (basis.is_computational()) return offdiagonal_max(w.matrix(), stride, d);
  LabeledOperator rotated = apply_local(w, basis.system(), basis.vectors().adjoint());
  return offdiagonal_max(rotated.matrix(), stride, d);
}

HermitianEigs hermitian_eigs(const LabeledOperator& w) {
  require_hermitian(w, "hermitian_eigs");
  Eigen::MatrixXcd h = 0.5 * (w.matrix() + w.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_eigs: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

double min_eigenvalue(const Eigen::MatrixXcd& hermitian) {
  if (hermitian.rows() == 0) return 0.0;
  Eigen::MatrixXcd h = 0.5 * (hermitian + hermitian.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("min_eigenvalue: eigensolver failed");
  return es.eigenvalues()(0);
}

double min_eigenvalue(const LabeledOperator& w) {
  require_hermitian(w, "min_eigenvalue");
  return min_eigenvalue(w.matrix());
}

bool psd_check(const LabeledOperator& w, double tol) {
  require_hermitian(w, "psd_check");
  return min_eigenvalue(w.matrix()) >= -tol * std::max(1.0, max_abs(w));
}

}  // namespace procmat
