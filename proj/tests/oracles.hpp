#pragma once

// Reference implementations used only by the tests. They work on raw matrices
// with explicit digit arithmetic and share no code with the library.

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Dims = std::vector<int>;

inline long total(const Dims& d) {
  long n = 1;
  for (int x : d) n *= x;
  return n;
}

// Mixed-radix digits of `index`, first factor most significant.
inline std::vector<int> digits(long index, const Dims& d) {
  std::vector<int> out(d.size());
  for (std::size_t k = d.size(); k-- > 0;) {
    out[k] = static_cast<int>(index % d[k]);
    index /= d[k];
  }
  return out;
}

inline long flat(const std::vector<int>& dig, const Dims& d) {
  long idx = 0;
  for (std::size_t k = 0; k < d.size(); ++k) idx = idx * d[k] + dig[k];
  return idx;
}

inline MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Tr over the factors with traced[k] == true.
inline MatrixXcd ptrace(const MatrixXcd& m, const Dims& d, const std::vector<bool>& traced) {
  Dims kept;
  for (std::size_t k = 0; k < d.size(); ++k)
    if (!traced[k]) kept.push_back(d[k]);
  const long n = total(kept);
  MatrixXcd out = MatrixXcd::Zero(n, n);
  const long full = total(d);
  for (long r = 0; r < full; ++r) {
    const auto dr = digits(r, d);
    for (long c = 0; c < full; ++c) {
      const auto dc = digits(c, d);
      bool diag = true;
      std::vector<int> kr, kc;
      for (std::size_t k = 0; k < d.size(); ++k) {
        if (traced[k]) {
          if (dr[k] != dc[k]) {
            diag = false;
            break;
          }
        } else {
          kr.push_back(dr[k]);
          kc.push_back(dc[k]);
        }
      }
      if (diag) out(flat(kr, kept), flat(kc, kept)) += m(r, c);
    }
  }
  return out;
}

// local ⊗ 1 with `local` acting on the listed factor positions (in that order).
inline MatrixXcd embed(const MatrixXcd& local, const Dims& d, const std::vector<int>& positions) {
  Dims ld;
  for (int p : positions) ld.push_back(d[static_cast<std::size_t>(p)]);
  const long full = total(d);
  MatrixXcd out = MatrixXcd::Zero(full, full);
  for (long r = 0; r < full; ++r) {
    const auto dr = digits(r, d);
    for (long c = 0; c < full; ++c) {
      const auto dc = digits(c, d);
      bool rest_equal = true;
      for (std::size_t k = 0; k < d.size() && rest_equal; ++k) {
        bool in = false;
        for (int p : positions) in |= static_cast<std::size_t>(p) == k;
        if (!in && dr[k] != dc[k]) rest_equal = false;
      }
      if (!rest_equal) continue;
      std::vector<int> lr, lc;
      for (int p : positions) {
        lr.push_back(dr[static_cast<std::size_t>(p)]);
        lc.push_back(dc[static_cast<std::size_t>(p)]);
      }
      out(r, c) = local(flat(lr, ld), flat(lc, ld));
    }
  }
  return out;
}

// Σ_k (|u_k><u_k| on factor s) m (|u_k><u_k| on factor s).
inline MatrixXcd dephase(const MatrixXcd& m, const Dims& d, int s, const MatrixXcd& basis) {
  MatrixXcd out = MatrixXcd::Zero(m.rows(), m.cols());
  for (Eigen::Index k = 0; k < basis.cols(); ++k) {
    const MatrixXcd proj = basis.col(k) * basis.col(k).adjoint();
    const MatrixXcd p = embed(proj, d, {s});
    out += p * m * p;
  }
  return out;
}

inline MatrixXcd random_unitary(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXcd z(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) z(i, j) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<MatrixXcd> qr(z);
  return qr.householderQ() * MatrixXcd::Identity(d, d);
}

// Choi operator Σ_ij |i><j| ⊗ E(|i><j|) of a random channel with a
// two-dimensional environment, on (input, output).
inline MatrixXcd random_channel_choi(int din, int dout, std::mt19937_64& rng) {
  const int env = 2;
  const MatrixXcd u = random_unitary(dout * env > din ? dout * env : din, rng);
  const MatrixXcd v = u.leftCols(din).topRows(dout * env);
  MatrixXcd choi = MatrixXcd::Zero(din * dout, din * dout);
  for (int i = 0; i < din; ++i)
    for (int j = 0; j < din; ++j) {
      MatrixXcd out = MatrixXcd::Zero(dout, dout);
      for (int e = 0; e < env; ++e)
        for (int a = 0; a < dout; ++a)
          for (int b = 0; b < dout; ++b) out(a, b) += v(a * env + e, i) * std::conj(v(b * env + e, j));
      for (int a = 0; a < dout; ++a)
        for (int b = 0; b < dout; ++b) choi(i * dout + a, j * dout + b) = out(a, b);
    }
  return choi;
}

// Quantum switch as |w><w| on P_c P_t A_I A_O B_I B_O F_t F_c:
// |w> = Σ |0>|i>|i>|j>|j>|k>|k>|0> over (P_t,A_I),(A_O,B_I),(B_O,F_t)
//     + Σ |1>|i>|j>|k>|i>|j>|k>|1> over (P_t,B_I),(B_O,A_I),(A_O,F_t).
inline MatrixXcd quantum_switch() {
  const Dims d(8, 2);
  VectorXcd w = VectorXcd::Zero(256);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        w[flat({0, i, i, j, j, k, k, 0}, d)] += 1.0;
        w[flat({1, i, j, k, i, j, k, 1}, d)] += 1.0;
      }
  return w * w.adjoint();
}

// Definition-level validity probe for a bipartite process with factor order
// (pasts..., A_I, A_O, B_I, B_O, futures...): inserting channels in both slots
// must give a positive, trace-preserving map from the past to the future.
// Returns the largest deviation of Tr_F of the resulting Choi from 1_P.
struct ProbeResult {
  double tp_defect = 0.0;
  double min_eig = 0.0;
};

inline ProbeResult channel_probe(const MatrixXcd& w, const Dims& d, int a_in, std::mt19937_64& rng) {
  const MatrixXcd ja = random_channel_choi(d[static_cast<std::size_t>(a_in)], d[static_cast<std::size_t>(a_in + 1)], rng);
  const MatrixXcd jb =
      random_channel_choi(d[static_cast<std::size_t>(a_in + 2)], d[static_cast<std::size_t>(a_in + 3)], rng);
  const MatrixXcd slots = embed(ja.transpose(), d, {a_in, a_in + 1}) * embed(jb.transpose(), d, {a_in + 2, a_in + 3});
  std::vector<bool> traced(d.size(), false);
  for (int k = 0; k < 4; ++k) traced[static_cast<std::size_t>(a_in + k)] = true;
  const MatrixXcd g = ptrace(slots * w, d, traced);
  Dims pf;
  std::vector<bool> future;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (traced[k]) continue;
    pf.push_back(d[k]);
    future.push_back(static_cast<int>(k) > a_in + 3);
  }
  const MatrixXcd tf = ptrace(g, pf, future);
  ProbeResult r;
  r.tp_defect = (tf - MatrixXcd::Identity(tf.rows(), tf.cols())).cwiseAbs().maxCoeff();
  const MatrixXcd gh = 0.5 * (g + g.adjoint());
  r.min_eig = Eigen::SelfAdjointEigenSolver<MatrixXcd>(gh).eigenvalues().minCoeff();
  return r;
}

}  // namespace oracle
