#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace htc {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// How a two-site block is factorized.
///  - svd: divide-and-conquer SVD of every charge block.
///  - density_matrix: eigendecomposition of the Gram matrix on the smaller
///    side (the reduced density matrix); faster, but resolves singular values
///    only down to ~1e-7 of the largest, so weights below 1e-14 are dropped.
enum class Factorization { svd, density_matrix };

struct TruncationPolicy {
  int chi_max = 128;
  double cutoff = 1e-12;  // on normalized singular values
  Factorization method = Factorization::svd;
};

/// Side that receives the singular values (becomes the orthogonality center).
enum class Absorb { left, right };

struct SplitResult {
  CMatrix left;   // m x k
  CMatrix right;  // k x n
  std::vector<double> singular_values;  // kept, normalized, descending
  std::vector<int> charges;             // charge of each kept index
  double discarded_weight = 0.0;        // relative discarded s^2 mass
};

/// Truncated factorization theta ~ left * right, renormalized so that the
/// product has unit Frobenius norm. When row/column charges are supplied the
/// matrix is treated as block diagonal in the charge label and every block is
/// factorized separately; entries coupling different charges are ignored.
/// The side opposite to `absorb` is exactly (left/right) orthonormal.
SplitResult truncated_split(const CMatrix& theta, std::span<const int> row_charges,
                            std::span<const int> col_charges,
                            const TruncationPolicy& policy, Absorb absorb);

struct OrthoResult {
  CMatrix orthonormal;
  CMatrix remainder;
  std::vector<int> charges;
};

/// m = Q R with Q having orthonormal columns (charge-blocked when charges
/// are given).
OrthoResult blocked_qr(const CMatrix& m, std::span<const int> row_charges,
                       std::span<const int> col_charges);

/// m = L Q with Q having orthonormal rows; `orthonormal` holds Q and
/// `remainder` holds L.
OrthoResult blocked_lq(const CMatrix& m, std::span<const int> row_charges,
                       std::span<const int> col_charges);

/// exp(-i h tau) for a hermitian h, through its eigendecomposition.
CMatrix expm_hermitian(const CMatrix& h, double tau);

/// Kronecker product a (x) b with index a_index * dim(b) + b_index.
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Von Neumann entropy in bits of a probability vector; nonpositive entries
/// contribute nothing.
double entropy_bits(std::span<const double> probabilities);

/// Entropy (bits) of a hermitian density matrix.
double entropy_bits(const CMatrix& rho);

/// Bosonic ladder operator b on {0..n_max}.
CMatrix annihilation(int n_max);

}  // namespace htc
