#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "procmat/sdp.hpp"

namespace procmat {

std::string to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Feasible: return "Feasible";
    case VerdictStatus::Infeasible: return "Infeasible";
    case VerdictStatus::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using BlockVec = std::vector<MatrixXcd>;

constexpr double kNullTol = 1e-11;
constexpr double kConsistencyTol = 1e-9;
constexpr double kStepFraction = 0.95;
constexpr double kInf = std::numeric_limits<double>::infinity();

class Timer {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

// A x = c, optionally with one block eliminated: when the rows of equality e
// restricted to block b are κ·1, x_b = (c_e - A_eR x_R)/κ and the rest of the
// system only involves x_R. This roughly halves the QC-CC sizes.
struct Problem {
  explicit Problem(const ConstraintSystem& s) : sys(s), ls(build_linear_system(s)) {}

  const ConstraintSystem& sys;
  LinearSystem ls;
  std::vector<Index> rows_e, cols_b, rows_f, cols_r;
  double kappa = 1.0;
  MatrixXd a_red, a_er, a_fb;
  VectorXd c_red;
  MatrixXd range_vecs;   // eigenvectors of A_redᵀA_red with nonzero eigenvalue
  VectorXd range_vals;
  MatrixXd null;         // orthonormal basis of ker A
  VectorXd x0;           // a solution of A x = c
  VectorXd iota;         // coordinates of the identity on every block
  Index ntot = 0;        // Σ side_b

  BlockVec blocks(const VectorXd& x) const {
    BlockVec out;
    for (std::size_t b = 0; b < ls.block_side.size(); ++b) {
      const Index r = ls.block_side[b];
      out.push_back(from_hermitian_coords(x.segment(ls.block_offset[b], r * r), r));
    }
    return out;
  }

  VectorXd coords(const BlockVec& m) const {
    VectorXd x(ls.A.cols());
    for (std::size_t b = 0; b < m.size(); ++b) {
      const Index r = ls.block_side[b];
      if (r > 0) x.segment(ls.block_offset[b], r * r) = hermitian_coords(m[b]);
    }
    return x;
  }

  // (A_redᵀA_red)^+ v
  VectorXd gram_pinv(const VectorXd& v) const {
    VectorXd t = range_vecs.transpose() * v;
    t.array() /= range_vals.array();
    return range_vecs * t;
  }

  // Full-space y from reduced multipliers y_f, given ξ_b (zero for Farkas).
  VectorXd lift_multipliers(const VectorXd& y_f, const VectorXd& xi_b) const {
    VectorXd y(ls.A.rows());
    y(rows_f) = y_f;
    if (!rows_e.empty()) y(rows_e) = (-xi_b - a_fb.transpose() * y_f) / kappa;
    return y;
  }

  // Least-squares multipliers with Aᵀ y = -ξ for ξ ⟂ ker A.
  VectorXd multipliers_for(const VectorXd& xi) const {
    const VectorXd xi_b = xi(cols_b);
    VectorXd lt = xi(cols_r);
    if (!cols_b.empty()) lt -= a_er.transpose() * xi_b / kappa;
    return lift_multipliers(-(a_red * gram_pinv(lt)), xi_b);
  }

  std::vector<MatrixXcd> multipliers(const VectorXd& y) const {
    std::vector<MatrixXcd> out;
    for (std::size_t e = 0; e < ls.eq_side.size(); ++e) {
      const Index u = ls.eq_side[e];
      out.push_back(from_hermitian_coords(y.segment(ls.eq_offset[e], u * u), u));
    }
    return out;
  }
};

double scaled_block_min(const BlockVec& m) {
  double v = kInf;
  for (const auto& b : m)
    if (b.rows() > 0) v = std::min(v, min_eigenvalue(b) / std::max(1.0, b.cwiseAbs().maxCoeff()));
  return v;
}

double block_inner(const BlockVec& a, const BlockVec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i].conjugate().cwiseProduct(b[i])).sum().real();
  return s;
}

// Largest α with P + α D ⪰ 0 (P ≻ 0).
double max_step(const BlockVec& p, const BlockVec& d) {
  double alpha = kInf;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].rows() == 0) continue;
    Eigen::LLT<MatrixXcd> llt(p[i]);
    if (llt.info() != Eigen::Success) return 0.0;
    MatrixXcd l_inv_d = llt.matrixL().solve(d[i]);
    MatrixXcd w = llt.matrixL().solve(l_inv_d.adjoint().eval());
    const double lmin = min_eigenvalue(MatrixXcd(0.5 * (w + w.adjoint())));
    if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
  }
  return alpha;
}

// Equality/block pair whose coefficient block is κ·1, largest first.
bool find_elimination(const LinearSystem& ls, std::size_t& e_out, std::size_t& b_out, double& kappa) {
  Index best = 0;
  for (std::size_t e = 0; e < ls.eq_side.size(); ++e) {
    const Index m = ls.eq_side[e] * ls.eq_side[e];
    for (std::size_t b = 0; b < ls.block_side.size(); ++b) {
      const Index n = ls.block_side[b] * ls.block_side[b];
      if (n != m || n <= best) continue;
      const auto blk = ls.A.block(ls.eq_offset[e], ls.block_offset[b], m, n);
      const double k = blk(0, 0);
      if (std::abs(k) < 1e-12) continue;
      const double dev = (blk - k * MatrixXd::Identity(m, n)).cwiseAbs().maxCoeff();
      if (dev > 1e-14 * std::abs(k)) continue;
      best = n;
      e_out = e;
      b_out = b;
      kappa = k;
    }
  }
  return best > 0;
}

Problem prepare(const ConstraintSystem& sys) {
  Problem pr(sys);
  const auto& ls = pr.ls;
  const Index n = ls.A.cols();
  pr.iota = VectorXd::Zero(n);
  for (std::size_t b = 0; b < ls.block_side.size(); ++b) {
    const Index r = ls.block_side[b];
    pr.ntot += r;
    pr.iota.segment(ls.block_offset[b], r).setOnes();
  }
  std::size_t e_el = 0, b_el = 0;
  const bool elim = find_elimination(ls, e_el, b_el, pr.kappa);
  for (std::size_t e = 0; e < ls.eq_side.size(); ++e)
    for (Index i = 0; i < ls.eq_side[e] * ls.eq_side[e]; ++i)
      (elim && e == e_el ? pr.rows_e : pr.rows_f).push_back(ls.eq_offset[e] + i);
  for (std::size_t b = 0; b < ls.block_side.size(); ++b)
    for (Index i = 0; i < ls.block_side[b] * ls.block_side[b]; ++i)
      (elim && b == b_el ? pr.cols_b : pr.cols_r).push_back(ls.block_offset[b] + i);

  pr.a_red = ls.A(pr.rows_f, pr.cols_r);
  pr.c_red = ls.c(pr.rows_f);
  if (elim) {
    pr.a_er = ls.A(pr.rows_e, pr.cols_r);
    pr.a_fb = ls.A(pr.rows_f, pr.cols_b);
    const VectorXd c_e = ls.c(pr.rows_e);
    pr.a_red.noalias() -= pr.a_fb * pr.a_er / pr.kappa;
    pr.c_red.noalias() -= pr.a_fb * c_e / pr.kappa;
  }
  const Index nr = pr.a_red.cols();
  MatrixXd null_r(nr, 0);
  pr.range_vecs = MatrixXd(nr, 0);
  pr.range_vals = VectorXd(0);
  if (nr > 0) {
    MatrixXd gram(nr, nr);
    gram.setZero();
    gram.selfadjointView<Eigen::Lower>().rankUpdate(pr.a_red.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram);
    const VectorXd& ev = es.eigenvalues();
    const double thr = kNullTol * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    Index n_null = 0;
    while (n_null < nr && ev[n_null] <= thr) ++n_null;
    null_r = es.eigenvectors().leftCols(n_null);
    pr.range_vecs = es.eigenvectors().rightCols(nr - n_null);
    pr.range_vals = ev.tail(nr - n_null);
  }
  const VectorXd x0_r = nr > 0 ? pr.gram_pinv(pr.a_red.transpose() * pr.c_red) : VectorXd(0);
  pr.x0 = VectorXd::Zero(n);
  pr.x0(pr.cols_r) = x0_r;
  if (elim) pr.x0(pr.cols_b) = (ls.c(pr.rows_e) - pr.a_er * x0_r) / pr.kappa;

  MatrixXd basis = MatrixXd::Zero(n, null_r.cols());
  basis(pr.cols_r, Eigen::all) = null_r;
  if (elim) basis(pr.cols_b, Eigen::all) = -(pr.a_er * null_r) / pr.kappa;
  if (elim && basis.cols() > 0) {
    Eigen::HouseholderQR<MatrixXd> qr(basis);
    pr.null = qr.householderQ() * MatrixXd::Identity(n, basis.cols());
  } else {
    pr.null = std::move(basis);
  }
  return pr;
}

struct CertAttempt {
  bool ok = false;
  Certificate cert;
};

// Turns a normalized primal matrix ξ ⟂ ker A into equality multipliers and
// re-checks them; mixes in a strictly positive dual direction if needed.
CertAttempt dual_certificate(const Problem& pr, const VectorXd& xi, const SolveOptions& opt) {
  CertAttempt out;
  out.cert.kind = CertificateKind::Dual;
  VectorXd y = pr.multipliers_for(xi);
  out.cert.multipliers = pr.multipliers(y);
  CertificateCheck chk = recheck_certificate(pr.sys, out.cert);
  if (chk.residual > opt.certificate_tol && std::isfinite(chk.residual)) {
    VectorXd p = pr.iota - pr.null * (pr.null.transpose() * pr.iota);
    const double pmin = scaled_block_min(pr.blocks(p));
    if (pmin > 0.0) {
      VectorXd yd = pr.multipliers_for(p);
      double pmin_abs = kInf;
      for (const auto& b : pr.blocks(p))
        if (b.rows() > 0) pmin_abs = std::min(pmin_abs, min_eigenvalue(b));
      const double t = (chk.residual * chk.trace_sum / pmin_abs) * (1.0 + 1e-6) + 1e-300;
      Certificate repaired = out.cert;
      repaired.multipliers = pr.multipliers(y + t * yd);
      repaired.repaired = true;
      CertificateCheck chk2 = recheck_certificate(pr.sys, repaired);
      if (chk2.residual < chk.residual) {
        out.cert = repaired;
        chk = chk2;
      }
    }
  }
  out.cert.bound = chk.bound;
  out.cert.residual = chk.residual;
  out.ok = chk.residual <= opt.certificate_tol && chk.bound >= opt.tol_margin;
  return out;
}

}  // namespace

Verdict solve_feasibility(const ConstraintSystem& sys, const SolveOptions& opt) {
  Timer timer;
  Verdict v;
  if (sys.n_parameters() > opt.max_parameters) {
    v.note = std::to_string(sys.n_parameters()) + " free parameters exceed the dense solver limit of " +
             std::to_string(opt.max_parameters);
    v.runtime_s = timer.seconds();
    return v;
  }
  const Problem pr = prepare(sys);
  const auto& A = pr.ls.A;
  const auto& c = pr.ls.c;
  auto finish = [&](Verdict& out) -> Verdict {
    out.runtime_s = timer.seconds();
    return out;
  };

  // Inconsistent equalities: Farkas multipliers y with Aᵀy = 0, <y, c> = 1.
  const VectorXd resid = pr.c_red - pr.a_red * pr.x0(pr.cols_r);
  const double c_scale = std::max(1.0, c.size() ? c.cwiseAbs().maxCoeff() : 0.0);
  if (resid.size() && resid.cwiseAbs().maxCoeff() > kConsistencyTol * c_scale) {
    Certificate cert;
    cert.kind = CertificateKind::Farkas;
    cert.multipliers = pr.multipliers(pr.lift_multipliers(resid / resid.dot(pr.c_red), VectorXd::Zero(pr.cols_b.size())));
    const CertificateCheck chk = recheck_certificate(sys, cert);
    cert.bound = chk.bound;
    cert.residual = chk.residual;
    if (chk.residual <= opt.certificate_tol) {
      v.status = VerdictStatus::Infeasible;
      v.margin = kInf;
    } else {
      v.note = "equalities look inconsistent but the Farkas certificate did not re-check";
    }
    v.certificate = cert;
    return finish(v);
  }
  if (pr.ntot == 0) {
    v.status = VerdictStatus::Feasible;
    v.margin = kInf;
    v.blocks = pr.blocks(pr.x0);
    return finish(v);
  }

  // Slack problem: min s s.t. Mat(x0 + N z) + s 1 ⪰ 0, in LMI dual form with
  // y = (z, s); its primal is X ⪰ 0, Tr X = 1, Nᵀ ξ(X) = 0.
  const Index n = A.cols();
  const Index p = pr.null.cols();
  const Index q = p + 1;
  MatrixXd fcols(n, q);
  fcols.leftCols(p) = pr.null;
  fcols.col(p) = pr.iota;
  std::vector<BlockVec> fblocks;
  fblocks.reserve(static_cast<std::size_t>(q));
  for (Index j = 0; j < q; ++j) fblocks.push_back(pr.blocks(fcols.col(j)));

  const BlockVec f0 = pr.blocks(pr.x0);
  double f0_min = kInf, f0_scale = 0.0;
  for (const auto& b : f0)
    if (b.rows() > 0) {
      f0_min = std::min(f0_min, min_eigenvalue(b));
      f0_scale = std::max(f0_scale, b.cwiseAbs().maxCoeff());
    }
  VectorXd y = VectorXd::Zero(q);
  y[p] = std::max(0.0, -f0_min) + 1.0 + 0.1 * f0_scale;
  BlockVec X;
  for (const auto& b : f0) X.push_back(MatrixXcd::Identity(b.rows(), b.cols()) / static_cast<double>(pr.ntot));

  double best_margin = -kInf;
  BlockVec best_point;
  auto consider_point = [&](const VectorXd& z) {
    BlockVec m = pr.blocks(pr.x0 + pr.null * z);
    const double mm = scaled_block_min(m);
    if (mm > best_margin) {
      best_margin = mm;
      best_point = std::move(m);
    }
  };

  for (int it = 0; it < opt.max_iterations; ++it) {
    v.iterations = it + 1;
    const VectorXd zc = pr.x0 + fcols * y;
    const BlockVec Z = pr.blocks(zc);
    consider_point(y.head(p));
    if (best_margin >= opt.tol_margin) break;

    // Lower bound from the current primal matrix.
    {
      VectorXd xi = pr.coords(X);
      xi -= pr.null * (pr.null.transpose() * xi);
      const double t = pr.iota.dot(xi);
      if (t > 0.0) {
        xi /= t;
        const double est = -pr.x0.dot(xi);
        if (est >= opt.tol_margin) {
          CertAttempt ca = dual_certificate(pr, xi, opt);
          if (ca.ok) {
            v.status = VerdictStatus::Infeasible;
            v.margin = ca.cert.bound;
            v.certificate = ca.cert;
            return finish(v);
          }
        }
      }
    }

    BlockVec Zinv;
    bool ok = true;
    for (const auto& zb : Z) {
      if (zb.rows() == 0) {
        Zinv.emplace_back(0, 0);
        continue;
      }
      Eigen::LLT<MatrixXcd> llt(zb);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      Zinv.push_back(llt.solve(MatrixXcd::Identity(zb.rows(), zb.cols())));
    }
    if (!ok) {
      v.note = "dual iterate lost definiteness";
      break;
    }
    const double mu = block_inner(X, Z) / static_cast<double>(pr.ntot);
    if (mu < 1e-14 * std::max(1.0, f0_scale)) break;

    // Schur complement M_ij = <F_i, X F_j Z^{-1}>.
    MatrixXd G(n, q);
    for (Index j = 0; j < q; ++j) {
      BlockVec g;
      for (std::size_t b = 0; b < X.size(); ++b) {
        if (X[b].rows() == 0) {
          g.emplace_back(0, 0);
          continue;
        }
        MatrixXcd t = X[b] * fblocks[static_cast<std::size_t>(j)][b] * Zinv[b];
        g.push_back(0.5 * (t + t.adjoint()));
      }
      G.col(j) = pr.coords(g);
    }
    MatrixXd M = fcols.transpose() * G;
    M = 0.5 * (M + M.transpose()).eval();
    Eigen::LDLT<MatrixXd> ldlt(M);
    if (ldlt.info() != Eigen::Success) {
      v.note = "Schur complement factorization failed";
      break;
    }
    VectorXd rp = fcols.transpose() * pr.coords(X);
    rp[p] -= 1.0;

    auto direction = [&](const BlockVec& rc, BlockVec& dX, BlockVec& dZ, VectorXd& dy) {
      const VectorXd rc_x = pr.coords(rc);
      dy = ldlt.solve(rp + fcols.transpose() * rc_x);
      dX = pr.blocks(rc_x - G * dy);
      dZ = pr.blocks(fcols * dy);
    };

    BlockVec rc(X.size()), dXa, dZa, dXc, dZc;
    VectorXd dya, dyc;
    for (std::size_t b = 0; b < X.size(); ++b) rc[b] = -X[b];
    direction(rc, dXa, dZa, dya);
    const double ap = std::min(1.0, max_step(X, dXa));
    const double ad = std::min(1.0, max_step(Z, dZa));
    BlockVec xa(X.size()), za(X.size());
    for (std::size_t b = 0; b < X.size(); ++b) {
      xa[b] = X[b] + ap * dXa[b];
      za[b] = Z[b] + ad * dZa[b];
    }
    const double mu_aff = block_inner(xa, za) / static_cast<double>(pr.ntot);
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);
    for (std::size_t b = 0; b < X.size(); ++b) {
      if (X[b].rows() == 0) continue;
      MatrixXcd corr = dXa[b] * dZa[b] * Zinv[b];
      corr = 0.5 * (corr + corr.adjoint()).eval();
      rc[b] = sigma * mu * Zinv[b] - X[b] - corr;
      rc[b] = 0.5 * (rc[b] + rc[b].adjoint()).eval();
    }
    direction(rc, dXc, dZc, dyc);
    const double sp = std::min(1.0, kStepFraction * max_step(X, dXc));
    const double sd = std::min(1.0, kStepFraction * max_step(Z, dZc));
    if (sp <= 0.0 && sd <= 0.0) {
      v.note = "interior-point step stalled";
      break;
    }
    for (std::size_t b = 0; b < X.size(); ++b) {
      X[b] += sp * dXc[b];
      X[b] = 0.5 * (X[b] + X[b].adjoint()).eval();
    }
    y += sd * dyc;
  }
  consider_point(y.head(p));

  if (best_margin >= -opt.tol) {
    v.status = VerdictStatus::Feasible;
    v.margin = best_margin;
    v.blocks = best_point;
    v.note.clear();
  } else if (v.note.empty()) {
    v.note = "slack could not be certified away from zero (best scaled block minimum " + std::to_string(best_margin) + ")";
  }
  return finish(v);
}

namespace {

Verdict membership(const ProcessMatrix& w, const ConstraintSystem& sys, const SolveOptions& opt) {
  Timer timer;
  const SystemKind kind = sys.kind;
  Verdict v = solve_feasibility(sys, opt);
  if (v.status == VerdictStatus::Feasible) {
    ValidityReport rep;
    if (kind == SystemKind::QcQc) {
      QcQcDecomposition d;
      for (std::size_t b = 0; b < sys.blocks.size(); ++b)
        d.witnesses.emplace(sys.qcqc_index[b], hermitian_part(expand_block(sys, b, v.blocks[b])));
      rep = verify_qcqc(w, d, 1e-7);
      v.qcqc_point = std::move(d);
    } else {
      QcCcDecomposition d;
      for (std::size_t b = 0; b < sys.blocks.size(); ++b) {
        auto x = hermitian_part(expand_block(sys, b, v.blocks[b]));
        (sys.qccc_terminal[b] ? d.terminal_witnesses : d.order_witnesses).emplace(sys.qccc_index[b], std::move(x));
      }
      rep = verify_qccc(w, d, 1e-7);
      v.qccc_point = std::move(d);
    }
    if (!rep.verdict) {
      v.status = VerdictStatus::Undetermined;
      v.note = "returned point failed verification (max residual " + std::to_string(rep.max_residual()) +
               ", min eigenvalue " + std::to_string(rep.psd_min_eig) + ")";
    }
  } else if (v.status == VerdictStatus::Infeasible) {
    if (kind == SystemKind::QcQc) v.note = "not QC-QC";
    else v.note = w.n_slots() <= 3 ? "causally nonseparable" : "not QC-CC";
  }
  v.runtime_s = timer.seconds();
  return v;
}

}  // namespace

Verdict qcqc_membership(const ProcessMatrix& w, const SolveOptions& opt) {
  Timer timer;
  Verdict v = membership(w, assemble_qcqc_system(w, opt.facial_reduction), opt);
  v.runtime_s = timer.seconds();
  return v;
}

Verdict qccc_membership(const ProcessMatrix& w, const SolveOptions& opt) {
  Timer timer;
  Verdict v = membership(w, assemble_qccc_system(w, opt.facial_reduction), opt);
  v.runtime_s = timer.seconds();
  return v;
}

Verdict solve_membership(const ProcessMatrix& w, const ConstraintSystem& sys, const SolveOptions& opt) {
  if (!same_registry(w.registry(), sys.registry)) throw std::invalid_argument("system was assembled for another registry");
  return membership(w, sys, opt);
}

}  // namespace procmat
