#include "htc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "htc/error.hpp"

namespace htc {

namespace {

// Gram eigenvalues below this fraction of the largest carry no information.
constexpr double kGramFloor = 1e-14;

struct Block {
  int charge = 0;
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
};

std::vector<Block> make_blocks(Eigen::Index m, Eigen::Index n,
                               std::span<const int> row_charges,
                               std::span<const int> col_charges) {
  std::vector<Block> blocks;
  if (row_charges.empty() && col_charges.empty()) {
    Block all;
    all.rows.resize(static_cast<std::size_t>(m));
    all.cols.resize(static_cast<std::size_t>(n));
    std::iota(all.rows.begin(), all.rows.end(), Eigen::Index{0});
    std::iota(all.cols.begin(), all.cols.end(), Eigen::Index{0});
    blocks.push_back(std::move(all));
    return blocks;
  }
  if (static_cast<Eigen::Index>(row_charges.size()) != m ||
      static_cast<Eigen::Index>(col_charges.size()) != n) {
    throw Error(ErrorCode::dimension_mismatch, "charge labels do not match matrix shape");
  }
  std::map<int, Block> by_charge;
  for (Eigen::Index i = 0; i < m; ++i) by_charge[row_charges[i]].rows.push_back(i);
  for (Eigen::Index j = 0; j < n; ++j) by_charge[col_charges[j]].cols.push_back(j);
  for (auto& [charge, block] : by_charge) {
    if (block.rows.empty() || block.cols.empty()) continue;
    block.charge = charge;
    blocks.push_back(std::move(block));
  }
  return blocks;
}

CMatrix gather(const CMatrix& m, const Block& b) { return m(b.rows, b.cols); }

// Thin Q factor of a tall-or-square matrix.
CMatrix thin_q(const CMatrix& w) {
  Eigen::HouseholderQR<CMatrix> qr(w);
  return qr.householderQ() * CMatrix::Identity(w.rows(), w.cols());
}

struct BlockDecomposition {
  std::vector<double> singular_values;  // descending
  CMatrix basis;                        // orthonormal columns
  bool basis_is_left = true;            // U (row space) or V (column space)
};

BlockDecomposition decompose(const CMatrix& a, Factorization method, Absorb absorb) {
  BlockDecomposition out;
  const bool need_left = absorb == Absorb::right;
  if (method == Factorization::svd) {
    const unsigned flags = need_left ? Eigen::ComputeThinU : Eigen::ComputeThinV;
    Eigen::BDCSVD<CMatrix> svd(a, flags);
    if (svd.info() != Eigen::Success) {
      throw Error(ErrorCode::numerical_failure, "SVD failed to converge");
    }
    const auto& s = svd.singularValues();
    out.singular_values.assign(s.data(), s.data() + s.size());
    out.basis = need_left ? CMatrix(svd.matrixU()) : CMatrix(svd.matrixV());
    out.basis_is_left = need_left;
    return out;
  }
  const bool rows_smaller = a.rows() <= a.cols();
  const CMatrix gram = rows_smaller ? CMatrix(a * a.adjoint()) : CMatrix(a.adjoint() * a);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical_failure, "Gram eigendecomposition failed");
  }
  const Eigen::Index k = gram.rows();
  const double top = std::max(eig.eigenvalues()(k - 1), 0.0);
  out.basis.resize(gram.rows(), k);
  Eigen::Index kept = 0;
  for (Eigen::Index i = k - 1; i >= 0; --i) {
    const double lam = eig.eigenvalues()(i);
    if (lam <= kGramFloor * top || lam <= 0.0) break;
    out.singular_values.push_back(std::sqrt(lam));
    out.basis.col(kept++) = eig.eigenvectors().col(i);
  }
  out.basis.conservativeResize(Eigen::NoChange, kept);
  out.basis_is_left = rows_smaller;
  return out;
}

struct Candidate {
  double s;
  std::size_t block;
  Eigen::Index index;
};

}  // namespace

SplitResult truncated_split(const CMatrix& theta, std::span<const int> row_charges,
                            std::span<const int> col_charges,
                            const TruncationPolicy& policy, Absorb absorb) {
  if (!theta.allFinite()) {
    throw Error(ErrorCode::numerical_failure, "non-finite entries in two-site tensor");
  }
  const auto blocks = make_blocks(theta.rows(), theta.cols(), row_charges, col_charges);

  std::vector<CMatrix> sub(blocks.size());
  std::vector<BlockDecomposition> dec(blocks.size());
  std::vector<Candidate> candidates;
  double total = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    sub[b] = gather(theta, blocks[b]);
    dec[b] = decompose(sub[b], policy.method, absorb);
    total += sub[b].squaredNorm();
    for (std::size_t i = 0; i < dec[b].singular_values.size(); ++i) {
      candidates.push_back({dec[b].singular_values[i], b, static_cast<Eigen::Index>(i)});
    }
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::numerical_failure, "two-site tensor has zero norm");
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.s > b.s; });

  const double norm = std::sqrt(total);
  std::size_t keep = 0;
  double kept_weight = 0.0;
  for (const auto& c : candidates) {
    if (static_cast<int>(keep) >= policy.chi_max) break;
    if (keep > 0 && c.s / norm <= policy.cutoff) break;
    kept_weight += c.s * c.s;
    ++keep;
  }
  if (keep == 0) {
    throw Error(ErrorCode::numerical_failure, "factorization produced no singular values");
  }

  // Column slots of the new bond, grouped per block but ordered globally.
  std::vector<std::vector<std::pair<Eigen::Index, Eigen::Index>>> slots(blocks.size());
  SplitResult out;
  out.charges.resize(keep);
  out.singular_values.resize(keep);
  for (std::size_t k = 0; k < keep; ++k) {
    const auto& c = candidates[k];
    slots[c.block].emplace_back(c.index, static_cast<Eigen::Index>(k));
    out.charges[k] = blocks[c.block].charge;
  }

  const Eigen::Index kdim = static_cast<Eigen::Index>(keep);
  out.left = CMatrix::Zero(theta.rows(), kdim);
  out.right = CMatrix::Zero(kdim, theta.cols());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (slots[b].empty()) continue;
    const auto& blk = blocks[b];
    const auto& d = dec[b];
    CMatrix kept(d.basis.rows(), static_cast<Eigen::Index>(slots[b].size()));
    for (std::size_t i = 0; i < slots[b].size(); ++i) {
      kept.col(static_cast<Eigen::Index>(i)) = d.basis.col(slots[b][i].first);
    }
    const bool want_left = absorb == Absorb::right;
    CMatrix ortho;
    if (d.basis_is_left == want_left) {
      ortho = std::move(kept);
    } else if (want_left) {
      ortho = thin_q(sub[b] * kept);
    } else {
      ortho = thin_q(sub[b].adjoint() * kept);
    }
    if (want_left) {
      const CMatrix rest = ortho.adjoint() * sub[b];
      for (std::size_t i = 0; i < slots[b].size(); ++i) {
        const Eigen::Index col = slots[b][i].second;
        const Eigen::Index ii = static_cast<Eigen::Index>(i);
        for (std::size_t r = 0; r < blk.rows.size(); ++r)
          out.left(blk.rows[r], col) = ortho(static_cast<Eigen::Index>(r), ii);
        for (std::size_t c = 0; c < blk.cols.size(); ++c)
          out.right(col, blk.cols[c]) = rest(ii, static_cast<Eigen::Index>(c));
      }
    } else {
      const CMatrix rest = sub[b] * ortho;
      for (std::size_t i = 0; i < slots[b].size(); ++i) {
        const Eigen::Index col = slots[b][i].second;
        const Eigen::Index ii = static_cast<Eigen::Index>(i);
        for (std::size_t c = 0; c < blk.cols.size(); ++c)
          out.right(col, blk.cols[c]) = std::conj(ortho(static_cast<Eigen::Index>(c), ii));
        for (std::size_t r = 0; r < blk.rows.size(); ++r)
          out.left(blk.rows[r], col) = rest(static_cast<Eigen::Index>(r), ii);
      }
    }
  }

  CMatrix& center = absorb == Absorb::right ? out.right : out.left;
  const double kept_norm = center.norm();
  if (!(kept_norm > 0.0)) {
    throw Error(ErrorCode::numerical_failure, "truncation removed the full state");
  }
  center /= kept_norm;
  for (std::size_t k = 0; k < keep; ++k) out.singular_values[k] = candidates[k].s / std::sqrt(kept_weight);
  double dropped = 0.0;
  for (std::size_t k = keep; k < candidates.size(); ++k) dropped += candidates[k].s * candidates[k].s;
  out.discarded_weight = std::min(1.0, dropped / total);
  return out;
}

OrthoResult blocked_qr(const CMatrix& m, std::span<const int> row_charges,
                       std::span<const int> col_charges) {
  const auto blocks = make_blocks(m.rows(), m.cols(), row_charges, col_charges);
  Eigen::Index kdim = 0;
  for (const auto& b : blocks) {
    kdim += static_cast<Eigen::Index>(std::min(b.rows.size(), b.cols.size()));
  }
  OrthoResult out;
  out.orthonormal = CMatrix::Zero(m.rows(), kdim);
  out.remainder = CMatrix::Zero(kdim, m.cols());
  out.charges.reserve(static_cast<std::size_t>(kdim));
  Eigen::Index offset = 0;
  for (const auto& b : blocks) {
    const CMatrix sub = gather(m, b);
    const Eigen::Index k = std::min(sub.rows(), sub.cols());
    Eigen::HouseholderQR<CMatrix> qr(sub);
    const CMatrix q = qr.householderQ() * CMatrix::Identity(sub.rows(), k);
    const CMatrix r = q.adjoint() * sub;
    for (Eigen::Index i = 0; i < k; ++i) {
      for (std::size_t a = 0; a < b.rows.size(); ++a)
        out.orthonormal(b.rows[a], offset + i) = q(static_cast<Eigen::Index>(a), i);
      for (std::size_t c = 0; c < b.cols.size(); ++c)
        out.remainder(offset + i, b.cols[c]) = r(i, static_cast<Eigen::Index>(c));
      out.charges.push_back(b.charge);
    }
    offset += k;
  }
  return out;
}

OrthoResult blocked_lq(const CMatrix& m, std::span<const int> row_charges,
                       std::span<const int> col_charges) {
  OrthoResult t = blocked_qr(m.adjoint(), col_charges, row_charges);
  OrthoResult out;
  out.orthonormal = t.orthonormal.adjoint();
  out.remainder = t.remainder.adjoint();
  out.charges = std::move(t.charges);
  return out;
}

CMatrix expm_hermitian(const CMatrix& h, double tau) {
  if (!h.allFinite()) {
    throw Error(ErrorCode::invalid_argument, "non-finite generator");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical_failure, "eigendecomposition of generator failed");
  }
  const auto& v = eig.eigenvectors();
  CVector phases(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    phases(i) = std::exp(cplx(0.0, -eig.eigenvalues()(i) * tau));
  }
  return v * phases.asDiagonal() * v.adjoint();
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double entropy_bits(std::span<const double> probabilities) {
  double s = 0.0;
  for (double p : probabilities) {
    if (p > 0.0) s -= p * std::log2(p);
  }
  return s;
}

double entropy_bits(const CMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(rho, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  return entropy_bits(std::span<const double>(ev.data(), static_cast<std::size_t>(ev.size())));
}

CMatrix annihilation(int n_max) {
  CMatrix b = CMatrix::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) b(n - 1, n) = std::sqrt(static_cast<double>(n));
  return b;
}

}  // namespace htc
