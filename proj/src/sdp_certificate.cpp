#include <cmath>
#include <limits>
#include <stdexcept>

#include "procmat/sdp.hpp"

namespace procmat {

double compensated_sum(const std::vector<double>& terms) {
  double sum = 0.0, comp = 0.0;
  for (double t : terms) {
    const double s = sum + t;
    comp += std::abs(sum) >= std::abs(t) ? (sum - s) + t : (t - s) + sum;
    sum = s;
  }
  return sum + comp;
}

namespace {

using Eigen::MatrixXcd;

// <Y, C> = Re Tr(Y C) entry by entry, compensated.
double inner_compensated(const MatrixXcd& y, const MatrixXcd& c) {
  std::vector<double> parts;
  parts.reserve(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    for (Eigen::Index j = 0; j < y.cols(); ++j) parts.push_back((y(i, j) * c(j, i)).real());
  return compensated_sum(parts);
}

// Z_b = Σ coeff V_b^dag T^*(U Y U^dag) V_b over the terms on block b.
std::vector<MatrixXcd> adjoint_blocks(const ConstraintSystem& sys, const std::vector<MatrixXcd>& ys) {
  const auto& reg = sys.registry;
  std::vector<LabeledOperator> full;
  for (const auto& b : sys.blocks) full.push_back(LabeledOperator::zero(reg, b.subsystems));
  for (std::size_t ei = 0; ei < sys.equalities.size(); ++ei) {
    const auto& e = sys.equalities[ei];
    const MatrixXcd& y = ys[ei];
    LabeledOperator yf(reg, e.space, e.range ? MatrixXcd(*e.range * y * e.range->adjoint()) : y);
    for (const auto& t : e.terms) {
      LabeledOperator x = t.pad.empty() ? yf : partial_trace(yf, t.pad);
      if (!t.trace_over.empty()) x = extend(x, t.trace_over);
      full[t.block] += x * cplx(t.coeff, 0.0);
    }
  }
  std::vector<MatrixXcd> out;
  for (std::size_t b = 0; b < sys.blocks.size(); ++b) {
    const auto& f = sys.blocks[b].face;
    MatrixXcd z = f ? MatrixXcd(f->adjoint() * full[b].matrix() * *f) : full[b].matrix();
    out.push_back(0.5 * (z + z.adjoint()));
  }
  return out;
}

}  // namespace

CertificateCheck recheck_certificate(const ConstraintSystem& sys, const Certificate& cert) {
  if (cert.multipliers.size() != sys.equalities.size())
    throw std::invalid_argument("certificate needs one multiplier per equality");
  std::vector<MatrixXcd> ys;
  for (std::size_t ei = 0; ei < sys.equalities.size(); ++ei) {
    const auto& e = sys.equalities[ei];
    const Eigen::Index u = e.range ? e.range->cols() : sys.registry->dimension(e.space);
    const MatrixXcd& y = cert.multipliers[ei];
    if (y.rows() != u || y.cols() != u) throw std::invalid_argument("certificate multiplier for '" + e.name + "' has the wrong size");
    ys.push_back(0.5 * (y + y.adjoint()));
  }
  std::vector<double> value_parts;
  for (std::size_t ei = 0; ei < sys.equalities.size(); ++ei) {
    const auto& e = sys.equalities[ei];
    const MatrixXcd c = e.range ? MatrixXcd(e.range->adjoint() * e.rhs.matrix() * *e.range) : e.rhs.matrix();
    value_parts.push_back(inner_compensated(ys[ei], c));
  }
  const double value = compensated_sum(value_parts);
  const auto z = adjoint_blocks(sys, ys);

  CertificateCheck chk;
  if (cert.kind == CertificateKind::Farkas) {
    // A^*(Y) must vanish while <Y, c> = 1 after normalization.
    double worst = 0.0;
    for (const auto& zb : z)
      if (zb.size() > 0) worst = std::max(worst, zb.cwiseAbs().maxCoeff());
    chk.trace_sum = value;
    chk.residual = value > 0.0 ? worst / value : std::numeric_limits<double>::infinity();
    chk.bound = value > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    chk.min_eig = 0.0;
    return chk;
  }
  // Dual certificate: X_b = -A_b^*(Y) ⪰ 0, Σ Tr X_b = 1, bound <Y, c>.
  std::vector<double> traces;
  for (const auto& zb : z)
    for (Eigen::Index i = 0; i < zb.rows(); ++i) traces.push_back(-zb(i, i).real());
  const double tr = compensated_sum(traces);
  chk.trace_sum = tr;
  if (!(tr > 0.0)) {
    chk.residual = std::numeric_limits<double>::infinity();
    chk.bound = -std::numeric_limits<double>::infinity();
    return chk;
  }
  double min_eig = std::numeric_limits<double>::infinity();
  for (const auto& zb : z)
    if (zb.rows() > 0) min_eig = std::min(min_eig, min_eigenvalue(MatrixXcd(-zb / tr)));
  chk.min_eig = min_eig;
  chk.residual = std::max(0.0, -min_eig);
  chk.bound = value / tr;
  return chk;
}

}  // namespace procmat
