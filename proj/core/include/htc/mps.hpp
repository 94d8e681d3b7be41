#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "htc/linalg.hpp"
#include "htc/model.hpp"

namespace htc {

enum class SiteKind : std::uint8_t { photon, exciton, vibration, generic };

/// One physical degree of freedom. Sites are addressed by a fixed label
/// (their index in the site list); swaps change chain positions, never labels.
struct PhysicalSite {
  SiteKind kind = SiteKind::generic;
  int molecule = -1;  // 0-based, -1 for the photon and generic sites
  int dim = 2;
};

/// Excitation number carried by basis state `s` of a site of this kind.
int site_charge(SiteKind kind, int s);

/// Two-site operator in the basis index s_left * dim_right + s_right (chain
/// order). Nonzero entries are cached so sparse gates are applied cheaply.
class TwoSiteGate {
 public:
  struct Entry {
    int out;
    int in;
    cplx value;
  };

  TwoSiteGate() = default;
  TwoSiteGate(CMatrix matrix);  // NOLINT(google-explicit-constructor)

  const CMatrix& matrix() const { return matrix_; }
  const std::vector<Entry>& entries() const { return entries_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

 private:
  CMatrix matrix_;
  std::vector<Entry> entries_;
};

struct BlockEntropy {
  double entropy_bits = 0.0;
  double reorder_truncation = 0.0;
  bool alarm = false;
};

struct ChargeMoments {
  double norm = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

struct LocalOperator {
  int label;
  CMatrix op;
};

/// Finite matrix product state in mixed canonical form.
///
/// Site tensors are stored per chain position as (left*phys) x right matrices,
/// element (l, s, r) at l + left*(s + phys*r), so the left view
/// (left*phys x right) and the right view (left x phys*right) share memory.
///
/// When the state is an eigenstate of the total excitation number every bond
/// index carries the excitation count of the block to its left; all
/// factorizations are then done block by block. Applying a gate that does not
/// conserve the excitation number silently switches the state to dense mode.
class Mps {
 public:
  struct Options {
    int chi_max = 128;
    double svd_cutoff = 1e-12;
    Factorization factorization = Factorization::svd;
    bool conserve_charge = true;
    double reorder_alarm = 1e-6;
  };

  /// Product state; each local vector is normalized.
  Mps(std::vector<PhysicalSite> sites, std::span<const CVector> local_states, Options options);

  /// Exact MPS of a dense vector whose index runs over labels with label 0
  /// most significant. Intended for small test systems.
  static Mps from_dense(std::vector<PhysicalSite> sites, const CVector& amplitudes,
                        Options options);

  /// Dense amplitudes in label order (label 0 most significant).
  CVector to_dense() const;

  int size() const { return static_cast<int>(sites_.size()); }
  const PhysicalSite& site(int label) const { return sites_.at(static_cast<std::size_t>(label)); }
  int label_at(int position) const { return label_at_.at(static_cast<std::size_t>(position)); }
  int position_of(int label) const { return position_of_.at(static_cast<std::size_t>(label)); }
  const std::vector<int>& labels() const { return label_at_; }

  int center() const { return center_; }
  const Options& options() const { return options_; }
  void set_options(const Options& options) { options_ = options; }
  bool tracks_charge() const { return tracking_; }

  /// Bond dimension between positions bond and bond+1.
  int bond_dim(int bond) const;
  int max_bond_dim() const;
  double cumulative_truncation() const { return truncation_; }
  const CMatrix& tensor(int position) const { return tensors_.at(static_cast<std::size_t>(position)); }

  /// Apply a two-site gate on chain positions (bond, bond+1), truncate, and
  /// leave the center on the side given by `absorb`. Returns the discarded
  /// weight of this cut.
  double apply_two_site_gate(int bond, const TwoSiteGate& gate, Absorb absorb = Absorb::right);

  /// Exchange the physical sites at (bond, bond+1).
  double swap_sites(int bond, Absorb absorb = Absorb::right);

  /// Apply `gate` (in the current chain order) and then exchange the two sites.
  double apply_gate_and_swap(int bond, const TwoSiteGate& gate, Absorb absorb = Absorb::right);

  /// Move the orthogonality center with exact QR/LQ steps.
  void move_center(int position);

  double norm_squared() const;

  /// Normalized singular values across bond (bond, bond+1), descending; squares sum to one.
  std::vector<double> bond_spectrum(int bond) const;
  double bond_entropy(int bond) const;

  /// Entropy of the bipartition (all non-vibrational sites) | (all
  /// vibrational sites). With charge tracking and at most one excitation the
  /// photon+exciton block spans only N+1 states and its density matrix is
  /// contracted exactly; otherwise a copy of the chain is sorted with swaps.
  /// `force_reorder` selects the swap path unconditionally.
  BlockEntropy vib_block_entropy(bool force_reorder = false) const;

  /// Single-site reduced density matrices for every label (index = label).
  std::vector<CMatrix> site_density_matrices() const;
  CMatrix site_density_matrix(int label) const;
  cplx local_expectation(int label, const CMatrix& op) const;

  /// <psi| prod_k O_k |psi> for operators on distinct labels.
  cplx expectation(std::span<const LocalOperator> ops) const;

  /// Moments of the total excitation number (photon + excitons).
  ChargeMoments charge_moments() const;

  /// Largest deviation from the identity of the left/right orthonormality
  /// contractions implied by the current center.
  double canonical_error() const;

  void save_checkpoint(const std::filesystem::path& prefix) const;
  static Mps load_checkpoint(const std::filesystem::path& prefix);

 private:
  Mps() = default;

  std::vector<double> schmidt_weights(int bond) const;
  BlockEntropy sector_block_entropy() const;
  double update_pair(int bond, const TwoSiteGate* gate, bool swap, Absorb absorb);
  int phys_at(int position) const { return sites_[static_cast<std::size_t>(label_at_[static_cast<std::size_t>(position)])].dim; }
  Eigen::Index left_dim(int position) const;
  Eigen::Index right_dim(int position) const;
  std::vector<int> left_row_charges(int position) const;
  std::vector<int> right_col_charges(int position) const;
  void drop_charges();

  std::vector<PhysicalSite> sites_;
  std::vector<int> label_at_;
  std::vector<int> position_of_;
  std::vector<CMatrix> tensors_;
  std::vector<std::vector<int>> bond_charges_;  // size+1 entries, edges included
  bool tracking_ = false;
  int center_ = 0;
  Options options_;
  double truncation_ = 0.0;
};

// -- Holstein-Tavis-Cummings chain layout -----------------------------------

struct LocalDims {
  int n_max_p = 1;
  int n_max_v = 10;
  int photon_dim() const { return n_max_p + 1; }
  int vib_dim() const { return n_max_v + 1; }
};

/// Initial photo-excitation: one molecule (1-based index) or the cavity.
struct Excitation {
  enum class Kind { molecule, cavity };
  Kind kind = Kind::molecule;
  int molecule = 1;

  static Excitation cavity() { return {Kind::cavity, 0}; }
  static Excitation on_molecule(int index) { return {Kind::molecule, index}; }
};

std::string to_string(const Excitation& e);

constexpr int photon_label() { return 0; }
constexpr int exciton_label(int molecule) { return 1 + 2 * molecule; }
constexpr int vibration_label(int molecule) { return 2 + 2 * molecule; }

/// Sites in chain order (ph, exc_1, vib_1, ..., exc_N, vib_N).
std::vector<PhysicalSite> htc_sites(int n_molecules, const LocalDims& dims);

Mps init_product_state(const HtcParams& params, const Excitation& excitation,
                       const LocalDims& dims, Mps::Options options);

}  // namespace htc
