#include "htc/mps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "htc/error.hpp"

namespace htc {

namespace {

using ConstSlab = Eigen::Map<const CMatrix, 0, Eigen::OuterStride<>>;
using Slab = Eigen::Map<CMatrix, 0, Eigen::OuterStride<>>;

// Slab M_s (left x right) of a site tensor stored as (left*phys) x right.
ConstSlab slab(const CMatrix& t, Eigen::Index left, int phys, int s) {
  return ConstSlab(t.data() + left * s, left, t.cols(), Eigen::OuterStride<>(left * phys));
}

CMatrix reshape(const CMatrix& m, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const CMatrix>(m.data(), rows, cols);
}

void require(bool ok, ErrorCode code, const char* msg) {
  if (!ok) throw Error(code, msg);
}

}  // namespace

int site_charge(SiteKind kind, int s) {
  return (kind == SiteKind::photon || kind == SiteKind::exciton) ? s : 0;
}

TwoSiteGate::TwoSiteGate(CMatrix matrix) : matrix_(std::move(matrix)) {
  require(matrix_.rows() == matrix_.cols(), ErrorCode::dimension_mismatch, "gate must be square");
  for (Eigen::Index in = 0; in < matrix_.cols(); ++in) {
    for (Eigen::Index out = 0; out < matrix_.rows(); ++out) {
      const cplx v = matrix_(out, in);
      if (v != cplx(0.0)) entries_.push_back({static_cast<int>(out), static_cast<int>(in), v});
    }
  }
}

// ---------------------------------------------------------------------------

Mps::Mps(std::vector<PhysicalSite> sites, std::span<const CVector> local_states, Options options)
    : sites_(std::move(sites)), options_(options) {
  const int n = size();
  require(n >= 1, ErrorCode::invalid_argument, "an MPS needs at least one site");
  require(static_cast<int>(local_states.size()) == n, ErrorCode::dimension_mismatch,
          "one local state per site is required");
  label_at_.resize(static_cast<std::size_t>(n));
  std::iota(label_at_.begin(), label_at_.end(), 0);
  position_of_ = label_at_;
  tensors_.resize(static_cast<std::size_t>(n));

  tracking_ = options_.conserve_charge;
  std::vector<int> charges(static_cast<std::size_t>(n), 0);
  for (int j = 0; j < n; ++j) {
    const auto& site = sites_[static_cast<std::size_t>(j)];
    const CVector& v = local_states[static_cast<std::size_t>(j)];
    require(site.dim >= 1 && v.size() == site.dim, ErrorCode::dimension_mismatch,
            "local state has the wrong dimension");
    const double nv = v.norm();
    require(nv > 0.0 && std::isfinite(nv), ErrorCode::invalid_argument, "local state must be nonzero");
    tensors_[static_cast<std::size_t>(j)] = reshape(v / nv, site.dim, 1);
    int q = -1;
    for (int s = 0; s < site.dim; ++s) {
      if (std::abs(v(s)) == 0.0) continue;
      const int qs = site_charge(site.kind, s);
      if (q < 0) q = qs;
      else if (q != qs) tracking_ = false;
    }
    charges[static_cast<std::size_t>(j)] = q;
  }
  if (tracking_) {
    bond_charges_.assign(static_cast<std::size_t>(n + 1), {0});
    for (int j = 0; j < n; ++j)
      bond_charges_[static_cast<std::size_t>(j + 1)] = {bond_charges_[static_cast<std::size_t>(j)][0] +
                                                        charges[static_cast<std::size_t>(j)]};
  }
  center_ = 0;
}

Mps Mps::from_dense(std::vector<PhysicalSite> sites, const CVector& amplitudes, Options options) {
  Mps m;
  m.sites_ = std::move(sites);
  m.options_ = options;
  const int n = m.size();
  require(n >= 1, ErrorCode::invalid_argument, "an MPS needs at least one site");
  Eigen::Index total = 1;
  for (const auto& s : m.sites_) total *= s.dim;
  require(amplitudes.size() == total, ErrorCode::dimension_mismatch, "dense vector has the wrong size");
  const double nrm = amplitudes.norm();
  require(nrm > 0.0, ErrorCode::invalid_argument, "dense vector must be nonzero");

  m.label_at_.resize(static_cast<std::size_t>(n));
  std::iota(m.label_at_.begin(), m.label_at_.end(), 0);
  m.position_of_ = m.label_at_;
  m.tensors_.resize(static_cast<std::size_t>(n));
  m.tracking_ = false;

  TruncationPolicy exact{1 << 30, 1e-15, Factorization::svd};
  // rest: chi x (remaining physical dimension), first remaining site most significant
  CMatrix rest = reshape(amplitudes / nrm, 1, total);
  Eigen::Index remaining = total;
  for (int j = 0; j < n - 1; ++j) {
    const int d = m.sites_[static_cast<std::size_t>(j)].dim;
    const Eigen::Index chi = rest.rows();
    remaining /= d;
    CMatrix theta(chi * d, remaining);
    for (Eigen::Index l = 0; l < chi; ++l)
      for (int s = 0; s < d; ++s)
        theta.row(l + chi * s) = rest.row(l).segment(s * remaining, remaining);
    auto res = truncated_split(theta, {}, {}, exact, Absorb::right);
    m.tensors_[static_cast<std::size_t>(j)] = std::move(res.left);
    rest = std::move(res.right);
  }
  const int d_last = m.sites_.back().dim;
  m.tensors_.back() = reshape(rest, rest.rows() * d_last, 1);
  m.center_ = n - 1;
  return m;
}

CVector Mps::to_dense() const {
  const int n = size();
  CMatrix acc = CMatrix::Ones(1, 1);  // rows: chain-order configurations
  for (int p = 0; p < n; ++p) {
    const int d = phys_at(p);
    const Eigen::Index chil = left_dim(p);
    const CMatrix& t = tensors_[static_cast<std::size_t>(p)];
    CMatrix next(acc.rows() * d, t.cols());
    for (Eigen::Index c = 0; c < acc.rows(); ++c)
      for (int s = 0; s < d; ++s) next.row(c * d + s) = acc.row(c) * slab(t, chil, d, s);
    acc = std::move(next);
  }
  // permute chain order into label order
  std::vector<Eigen::Index> label_stride(static_cast<std::size_t>(n), 1);
  for (int l = n - 2; l >= 0; --l)
    label_stride[static_cast<std::size_t>(l)] =
        label_stride[static_cast<std::size_t>(l + 1)] * sites_[static_cast<std::size_t>(l + 1)].dim;
  CVector out(acc.rows());
  for (Eigen::Index c = 0; c < acc.rows(); ++c) {
    Eigen::Index rem = c, idx = 0;
    for (int p = n - 1; p >= 0; --p) {
      const int d = phys_at(p);
      idx += (rem % d) * label_stride[static_cast<std::size_t>(label_at_[static_cast<std::size_t>(p)])];
      rem /= d;
    }
    out(idx) = acc(c, 0);
  }
  return out;
}

Eigen::Index Mps::left_dim(int position) const {
  return tensors_[static_cast<std::size_t>(position)].rows() / phys_at(position);
}

Eigen::Index Mps::right_dim(int position) const {
  return tensors_[static_cast<std::size_t>(position)].cols();
}

int Mps::bond_dim(int bond) const {
  require(bond >= 0 && bond < size() - 1, ErrorCode::invalid_argument, "bond out of range");
  return static_cast<int>(right_dim(bond));
}

int Mps::max_bond_dim() const {
  Eigen::Index m = 1;
  for (int p = 0; p + 1 < size(); ++p) m = std::max(m, right_dim(p));
  return static_cast<int>(m);
}

std::vector<int> Mps::left_row_charges(int position) const {
  if (!tracking_) return {};
  const auto& ql = bond_charges_[static_cast<std::size_t>(position)];
  const auto& site = sites_[static_cast<std::size_t>(label_at_[static_cast<std::size_t>(position)])];
  const auto chil = static_cast<int>(ql.size());
  std::vector<int> out(static_cast<std::size_t>(chil * site.dim));
  for (int s = 0; s < site.dim; ++s)
    for (int l = 0; l < chil; ++l)
      out[static_cast<std::size_t>(l + chil * s)] = ql[static_cast<std::size_t>(l)] + site_charge(site.kind, s);
  return out;
}

std::vector<int> Mps::right_col_charges(int position) const {
  if (!tracking_) return {};
  const auto& qr = bond_charges_[static_cast<std::size_t>(position + 1)];
  const auto& site = sites_[static_cast<std::size_t>(label_at_[static_cast<std::size_t>(position)])];
  const auto chir = static_cast<int>(qr.size());
  std::vector<int> out(static_cast<std::size_t>(chir * site.dim));
  for (int r = 0; r < chir; ++r)
    for (int s = 0; s < site.dim; ++s)
      out[static_cast<std::size_t>(s + site.dim * r)] = qr[static_cast<std::size_t>(r)] - site_charge(site.kind, s);
  return out;
}

void Mps::drop_charges() {
  tracking_ = false;
  bond_charges_.clear();
}

void Mps::move_center(int position) {
  require(position >= 0 && position < size(), ErrorCode::invalid_argument, "center position out of range");
  while (center_ < position) {
    const int p = center_;
    CMatrix& a = tensors_[static_cast<std::size_t>(p)];
    std::vector<int> cols;
    if (tracking_) cols = bond_charges_[static_cast<std::size_t>(p + 1)];
    auto qr = blocked_qr(a, left_row_charges(p), cols);
    a = std::move(qr.orthonormal);
    CMatrix& b = tensors_[static_cast<std::size_t>(p + 1)];
    const int d = phys_at(p + 1);
    const Eigen::Index chim = b.rows() / d, chir = b.cols();
    CMatrix nb = qr.remainder * Eigen::Map<const CMatrix>(b.data(), chim, d * chir);
    b = reshape(nb, nb.rows() * d, chir);
    if (tracking_) bond_charges_[static_cast<std::size_t>(p + 1)] = std::move(qr.charges);
    ++center_;
  }
  while (center_ > position) {
    const int p = center_;
    CMatrix& b = tensors_[static_cast<std::size_t>(p)];
    const int d = phys_at(p);
    const Eigen::Index chil = b.rows() / d, chir = b.cols();
    std::vector<int> rows;
    if (tracking_) rows = bond_charges_[static_cast<std::size_t>(p)];
    auto lq = blocked_lq(Eigen::Map<const CMatrix>(b.data(), chil, d * chir), rows, right_col_charges(p));
    const Eigen::Index k = lq.orthonormal.rows();
    b = reshape(lq.orthonormal, k * d, chir);
    CMatrix& a = tensors_[static_cast<std::size_t>(p - 1)];
    a = a * lq.remainder;
    if (tracking_) bond_charges_[static_cast<std::size_t>(p)] = std::move(lq.charges);
    --center_;
  }
}

double Mps::apply_two_site_gate(int bond, const TwoSiteGate& gate, Absorb absorb) {
  return update_pair(bond, &gate, false, absorb);
}

double Mps::swap_sites(int bond, Absorb absorb) { return update_pair(bond, nullptr, true, absorb); }

double Mps::apply_gate_and_swap(int bond, const TwoSiteGate& gate, Absorb absorb) {
  return update_pair(bond, &gate, true, absorb);
}

double Mps::update_pair(int bond, const TwoSiteGate* gate, bool swap, Absorb absorb) {
  require(bond >= 0 && bond + 1 < size(), ErrorCode::invalid_argument, "bond out of range");
  if (center_ < bond) move_center(bond);
  else if (center_ > bond + 1) move_center(bond + 1);

  const int la = label_at_[static_cast<std::size_t>(bond)];
  const int lb = label_at_[static_cast<std::size_t>(bond + 1)];
  const PhysicalSite& sa_site = sites_[static_cast<std::size_t>(la)];
  const PhysicalSite& sb_site = sites_[static_cast<std::size_t>(lb)];
  const int da = sa_site.dim, db = sb_site.dim;
  if (gate != nullptr)
    require(gate->dim() == da * db, ErrorCode::dimension_mismatch, "gate does not match the site dimensions");

  const CMatrix& a = tensors_[static_cast<std::size_t>(bond)];
  const CMatrix& b = tensors_[static_cast<std::size_t>(bond + 1)];
  const Eigen::Index chil = a.rows() / da, chim = a.cols(), chir = b.cols();
  const CMatrix theta = a * Eigen::Map<const CMatrix>(b.data(), chim, db * chir);

  // theta(l + chil*sa, sb + db*r); a slab fixes (sa, sb).
  const int dl = swap ? db : da, dr = swap ? da : db;
  const Eigen::Index stride_in = chil * da * db;
  auto in_slab = [&](int sa, int sb) {
    return ConstSlab(theta.data() + chil * sa + chil * da * sb, chil, chir, Eigen::OuterStride<>(stride_in));
  };
  CMatrix out;
  if (gate == nullptr) {
    out.resize(chil * dl, dr * chir);
  } else {
    out.setZero(chil * dl, dr * chir);
  }
  auto out_slab = [&](int sa, int sb) {
    const int left = swap ? sb : sa, right = swap ? sa : sb;
    return Slab(out.data() + chil * left + chil * dl * right, chil, chir, Eigen::OuterStride<>(stride_in));
  };

  if (gate == nullptr) {
    for (int sa = 0; sa < da; ++sa)
      for (int sb = 0; sb < db; ++sb) out_slab(sa, sb) = in_slab(sa, sb);
  } else {
    if (tracking_) {
      for (const auto& e : gate->entries()) {
        if (std::abs(e.value) < 1e-13) continue;
        const int qo = site_charge(sa_site.kind, e.out / db) + site_charge(sb_site.kind, e.out % db);
        const int qi = site_charge(sa_site.kind, e.in / db) + site_charge(sb_site.kind, e.in % db);
        if (qo != qi) {
          drop_charges();
          break;
        }
      }
    }
    for (const auto& e : gate->entries())
      out_slab(e.out / db, e.out % db) += e.value * in_slab(e.in / db, e.in % db);
  }

  std::vector<int> rows, cols;
  if (tracking_) {
    const PhysicalSite& left_site = swap ? sb_site : sa_site;
    const PhysicalSite& right_site = swap ? sa_site : sb_site;
    const auto& ql = bond_charges_[static_cast<std::size_t>(bond)];
    const auto& qr = bond_charges_[static_cast<std::size_t>(bond + 2)];
    rows.resize(static_cast<std::size_t>(chil * dl));
    cols.resize(static_cast<std::size_t>(dr * chir));
    for (int s = 0; s < dl; ++s)
      for (Eigen::Index l = 0; l < chil; ++l)
        rows[static_cast<std::size_t>(l + chil * s)] = ql[static_cast<std::size_t>(l)] + site_charge(left_site.kind, s);
    for (Eigen::Index r = 0; r < chir; ++r)
      for (int s = 0; s < dr; ++s)
        cols[static_cast<std::size_t>(s + dr * r)] = qr[static_cast<std::size_t>(r)] - site_charge(right_site.kind, s);
  }

  TruncationPolicy policy{options_.chi_max, options_.svd_cutoff, options_.factorization};
  auto res = truncated_split(out, rows, cols, policy, absorb);
  const Eigen::Index k = res.left.cols();
  tensors_[static_cast<std::size_t>(bond)] = std::move(res.left);
  tensors_[static_cast<std::size_t>(bond + 1)] = reshape(res.right, k * dr, chir);
  if (tracking_) bond_charges_[static_cast<std::size_t>(bond + 1)] = std::move(res.charges);
  if (swap) {
    std::swap(label_at_[static_cast<std::size_t>(bond)], label_at_[static_cast<std::size_t>(bond + 1)]);
    position_of_[static_cast<std::size_t>(la)] = bond + 1;
    position_of_[static_cast<std::size_t>(lb)] = bond;
  }
  center_ = absorb == Absorb::left ? bond : bond + 1;
  truncation_ += res.discarded_weight;
  return res.discarded_weight;
}

double Mps::norm_squared() const { return tensors_[static_cast<std::size_t>(center_)].squaredNorm(); }

std::vector<double> Mps::schmidt_weights(int bond) const {
  require(bond >= 0 && bond + 1 < size(), ErrorCode::invalid_argument, "bond out of range");
  CMatrix env;
  if (center_ <= bond) {
    env = CMatrix::Identity(left_dim(center_), left_dim(center_));
    for (int p = center_; p <= bond; ++p) {
      const CMatrix& t = tensors_[static_cast<std::size_t>(p)];
      const int d = phys_at(p);
      const Eigen::Index chil = left_dim(p);
      CMatrix next = CMatrix::Zero(t.cols(), t.cols());
      for (int s = 0; s < d; ++s) {
        const CMatrix k = env.transpose() * slab(t, chil, d, s);
        next.noalias() += k.transpose() * slab(t, chil, d, s).conjugate();
      }
      env = std::move(next);
    }
  } else {
    env = CMatrix::Identity(right_dim(center_), right_dim(center_));
    for (int p = center_; p > bond; --p) {
      const CMatrix& t = tensors_[static_cast<std::size_t>(p)];
      const int d = phys_at(p);
      const Eigen::Index chil = left_dim(p);
      CMatrix next = CMatrix::Zero(chil, chil);
      for (int s = 0; s < d; ++s) {
        const CMatrix k = slab(t, chil, d, s) * env;
        next.noalias() += k * slab(t, chil, d, s).adjoint();
      }
      env = std::move(next);
    }
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (env + env.adjoint()), Eigen::EigenvaluesOnly);
  std::vector<double> w(static_cast<std::size_t>(eig.eigenvalues().size()));
  double total = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    w[static_cast<std::size_t>(i)] = std::max(0.0, eig.eigenvalues()(i));
    total += w[static_cast<std::size_t>(i)];
  }
  if (total > 0.0)
    for (auto& x : w) x /= total;
  std::sort(w.begin(), w.end(), std::greater<>());
  return w;
}

std::vector<double> Mps::bond_spectrum(int bond) const {
  auto w = schmidt_weights(bond);
  for (auto& x : w) x = std::sqrt(x);
  return w;
}

double Mps::bond_entropy(int bond) const {
  const auto w = schmidt_weights(bond);
  return entropy_bits(w);
}

BlockEntropy Mps::sector_block_entropy() const {
  const int n = size();
  BlockEntropy out;
  if (bond_charges_.back()[0] == 0) return out;

  auto with_charge = [&](int bond, int q) {
    std::vector<Eigen::Index> idx;
    const auto& qs = bond_charges_[static_cast<std::size_t>(bond)];
    for (std::size_t i = 0; i < qs.size(); ++i)
      if (qs[i] == q) idx.push_back(static_cast<Eigen::Index>(i));
    return idx;
  };
  auto kind_at = [&](int p) { return sites_[static_cast<std::size_t>(label_at_[static_cast<std::size_t>(p)])].kind; };
  auto block = [&](int p, int s, const std::vector<Eigen::Index>& rows, const std::vector<Eigen::Index>& cols) {
    const CMatrix& t = tensors_[static_cast<std::size_t>(p)];
    return CMatrix(slab(t, left_dim(p), phys_at(p), s)(rows, cols));
  };

  // Right environments on the charge-1 block: past the excitation only neutral states survive.
  std::vector<CMatrix> right(static_cast<std::size_t>(n + 1));
  right[static_cast<std::size_t>(n)] = CMatrix::Ones(1, 1);
  for (int p = n - 1; p >= 0; --p) {
    const auto l1 = with_charge(p, 1), r1 = with_charge(p + 1, 1);
    CMatrix env = CMatrix::Zero(static_cast<Eigen::Index>(l1.size()), static_cast<Eigen::Index>(l1.size()));
    for (int s = 0; s < phys_at(p); ++s) {
      if (site_charge(kind_at(p), s) != 0) continue;
      const CMatrix m = block(p, s, l1, r1);
      env.noalias() += m * right[static_cast<std::size_t>(p + 1)] * m.adjoint();
    }
    right[static_cast<std::size_t>(p)] = std::move(env);
  }

  // Environments are indexed (ket, bra). `none` has no excitation on either
  // side; open[a] has it on the bra at electronic site a only.
  CMatrix none = CMatrix::Ones(1, 1);
  std::vector<CMatrix> open;
  std::vector<std::vector<cplx>> gram;
  auto close = [&](const CMatrix& e, int p) { return (e.array() * right[static_cast<std::size_t>(p + 1)].array()).sum(); };

  for (int p = 0; p < n; ++p) {
    const auto l0 = with_charge(p, 0), r0 = with_charge(p + 1, 0);
    const auto l1 = with_charge(p, 1), r1 = with_charge(p + 1, 1);
    const SiteKind kind = kind_at(p);
    const bool electronic = kind == SiteKind::photon || kind == SiteKind::exciton;
    const int d = electronic ? 1 : phys_at(p);

    std::vector<CMatrix> m0(static_cast<std::size_t>(d)), m1(static_cast<std::size_t>(d));
    for (int s = 0; s < d; ++s) {
      m0[static_cast<std::size_t>(s)] = block(p, s, l0, r0);
      m1[static_cast<std::size_t>(s)] = block(p, s, l1, r1);
    }
    CMatrix fresh;
    if (electronic) {
      const CMatrix up = block(p, 1, l0, r1);
      const std::size_t a = gram.size();
      gram.emplace_back(a + 1);
      for (std::size_t b = 0; b < a; ++b) {
        const cplx v = close(up.transpose() * open[b] * m1[0].conjugate(), p);
        gram[a][b] = v;
        gram[b].push_back(std::conj(v));
      }
      gram[a][a] = close(up.transpose() * none * up.conjugate(), p);
      fresh = m0[0].transpose() * none * up.conjugate();
    }
    auto advance = [&](const CMatrix& env, const std::vector<CMatrix>& bra) {
      CMatrix next = CMatrix::Zero(m0[0].cols(), bra[0].cols());
      for (int s = 0; s < d; ++s)
        next.noalias() += m0[static_cast<std::size_t>(s)].transpose() * env * bra[static_cast<std::size_t>(s)].conjugate();
      return next;
    };
    for (auto& env : open) env = advance(env, m1);
    none = advance(none, m0);
    if (electronic) open.push_back(std::move(fresh));
  }

  const auto k = static_cast<Eigen::Index>(gram.size());
  CMatrix g(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) g(a, b) = gram[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (g + g.adjoint()), Eigen::EigenvaluesOnly);
  std::vector<double> w;
  double total = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    w.push_back(std::max(0.0, eig.eigenvalues()(i)));
    total += w.back();
  }
  if (total > 0.0)
    for (auto& x : w) x /= total;
  out.entropy_bits = entropy_bits(w);
  return out;
}

BlockEntropy Mps::vib_block_entropy(bool force_reorder) const {
  bool sector = !force_reorder && tracking_ && bond_charges_.back()[0] <= 1;
  for (const auto& s : sites_) sector = sector && s.kind != SiteKind::generic;
  if (sector) return sector_block_entropy();
  Mps copy = *this;
  const double before = copy.truncation_;
  std::vector<int> target;
  for (int l = 0; l < size(); ++l)
    if (sites_[static_cast<std::size_t>(l)].kind != SiteKind::vibration) target.push_back(l);
  const int cut = static_cast<int>(target.size());
  for (int l = 0; l < size(); ++l)
    if (sites_[static_cast<std::size_t>(l)].kind == SiteKind::vibration) target.push_back(l);
  BlockEntropy out;
  if (cut == 0 || cut == size()) return out;
  for (int t = 0; t < size(); ++t) {
    int p = copy.position_of(target[static_cast<std::size_t>(t)]);
    while (p > t) {
      copy.swap_sites(p - 1, Absorb::left);
      --p;
    }
  }
  out.reorder_truncation = copy.truncation_ - before;
  out.entropy_bits = copy.bond_entropy(cut - 1);
  out.alarm = out.reorder_truncation > options_.reorder_alarm;
  return out;
}

std::vector<CMatrix> Mps::site_density_matrices() const {
  const int n = size();
  std::vector<CMatrix> rdm(static_cast<std::size_t>(n));
  // K_s is E^T M_s on the left sweep and M_s F on the right sweep
  auto rho_from = [](const std::vector<CMatrix>& k, const CMatrix& t, Eigen::Index chil, int d) {
    CMatrix rho(d, d);
    for (int s = 0; s < d; ++s)
      for (int sp = 0; sp < d; ++sp)
        rho(s, sp) = (k[static_cast<std::size_t>(s)].array() * slab(t, chil, d, sp).array().conjugate()).sum();
    return rho;
  };
  // center and everything to its right
  CMatrix env = CMatrix::Identity(left_dim(center_), left_dim(center_));
  for (int p = center_; p < n; ++p) {
    const CMatrix& t = tensors_[static_cast<std::size_t>(p)];
    const int d = phys_at(p);
    const Eigen::Index chil = left_dim(p);
    std::vector<CMatrix> k(static_cast<std::size_t>(d));
    for (int s = 0; s < d; ++s) k[static_cast<std::size_t>(s)] = env.transpose() * slab(t, chil, d, s);
    rdm[static_cast<std::size_t>(label_at_[static_cast<std::size_t>(p)])] = rho_from(k, t, chil, d);
    if (p + 1 < n) {
      CMatrix next = CMatrix::Zero(t.cols(), t.cols());
      for (int s = 0; s < d; ++s) next.noalias() += k[static_cast<std::size_t>(s)].transpose() * slab(t, chil, d, s).conjugate();
      env = std::move(next);
    }
  }
  env = CMatrix::Identity(right_dim(center_), right_dim(center_));
  for (int p = center_; p > 0; --p) {
    const CMatrix& t = tensors_[static_cast<std::size_t>(p)];
    const int d = phys_at(p);
    const Eigen::Index chil = left_dim(p);
    CMatrix next = CMatrix::Zero(chil, chil);
    for (int s = 0; s < d; ++s) next.noalias() += (slab(t, chil, d, s) * env) * slab(t, chil, d, s).adjoint();
    env = std::move(next);
    const int q = p - 1;
    const CMatrix& tq = tensors_[static_cast<std::size_t>(q)];
    const int dq = phys_at(q);
    const Eigen::Index chilq = left_dim(q);
    std::vector<CMatrix> k(static_cast<std::size_t>(dq));
    for (int s = 0; s < dq; ++s) k[static_cast<std::size_t>(s)] = slab(tq, chilq, dq, s) * env;
    rdm[static_cast<std::size_t>(label_at_[static_cast<std::size_t>(q)])] = rho_from(k, tq, chilq, dq);
  }
  return rdm;
}

CMatrix Mps::site_density_matrix(int label) const {
  require(label >= 0 && label < size(), ErrorCode::invalid_argument, "label out of range");
  return site_density_matrices()[static_cast<std::size_t>(label)];
}

cplx Mps::local_expectation(int label, const CMatrix& op) const {
  require(label >= 0 && label < size(), ErrorCode::invalid_argument, "label out of range");
  const LocalOperator lo{label, op};
  return expectation(std::span<const LocalOperator>(&lo, 1));
}

cplx Mps::expectation(std::span<const LocalOperator> ops) const {
  const int n = size();
  std::vector<const CMatrix*> at(static_cast<std::size_t>(n), nullptr);
  int first = n, last = -1;
  for (const auto& o : ops) {
    require(o.label >= 0 && o.label < n, ErrorCode::invalid_argument, "label out of range");
    const int d = sites_[static_cast<std::size_t>(o.label)].dim;
    require(o.op.rows() == d && o.op.cols() == d, ErrorCode::dimension_mismatch, "operator has the wrong dimension");
    const int p = position_of_[static_cast<std::size_t>(o.label)];
    require(at[static_cast<std::size_t>(p)] == nullptr, ErrorCode::invalid_argument, "operators must act on distinct sites");
    at[static_cast<std::size_t>(p)] = &o.op;
    first = std::min(first, p);
    last = std::max(last, p);
  }
  if (last < 0) return cplx(norm_squared());
  // canonical form lets the contraction start and end near the center
  const int lo = std::min(first, center_), hi = std::max(last, center_);
  CMatrix env = CMatrix::Identity(left_dim(lo), left_dim(lo));
  for (int p = lo; p <= hi; ++p) {
    const CMatrix& t = tensors_[static_cast<std::size_t>(p)];
    const int d = phys_at(p);
    const Eigen::Index chil = left_dim(p);
    CMatrix next = CMatrix::Zero(t.cols(), t.cols());
    const CMatrix* op = at[static_cast<std::size_t>(p)];
    if (op == nullptr) {
      for (int s = 0; s < d; ++s) {
        const CMatrix k = env.transpose() * slab(t, chil, d, s);
        next.noalias() += k.transpose() * slab(t, chil, d, s).conjugate();
      }
    } else {
      std::vector<CMatrix> k(static_cast<std::size_t>(d));
      for (int s = 0; s < d; ++s) k[static_cast<std::size_t>(s)] = env.transpose() * slab(t, chil, d, s);
      for (int sp = 0; sp < d; ++sp) {
        CMatrix w = CMatrix::Zero(chil, t.cols());
        bool any = false;
        for (int s = 0; s < d; ++s) {
          const cplx v = (*op)(sp, s);
          if (v == cplx(0.0)) continue;
          w += v * k[static_cast<std::size_t>(s)];
          any = true;
        }
        if (any) next.noalias() += w.transpose() * slab(t, chil, d, sp).conjugate();
      }
    }
    env = std::move(next);
  }
  return env.trace();
}

ChargeMoments Mps::charge_moments() const {
  const int n = size();
  CMatrix e0 = CMatrix::Ones(1, 1), e1 = CMatrix::Zero(1, 1), e2 = CMatrix::Zero(1, 1);
  for (int p = 0; p < n; ++p) {
    const CMatrix& t = tensors_[static_cast<std::size_t>(p)];
    const int d = phys_at(p);
    const SiteKind kind = sites_[static_cast<std::size_t>(label_at_[static_cast<std::size_t>(p)])].kind;
    const Eigen::Index chil = left_dim(p);
    CMatrix n0 = CMatrix::Zero(t.cols(), t.cols()), n1 = n0, n2 = n0;
    for (int s = 0; s < d; ++s) {
      const double q = site_charge(kind, s);
      const auto m = slab(t, chil, d, s);
      const CMatrix k0 = e0.transpose() * m;
      const CMatrix t0 = k0.transpose() * m.conjugate();
      n0 += t0;
      CMatrix t1 = (e1.transpose() * m).transpose() * m.conjugate();
      n1 += t1 + q * t0;
      n2 += (e2.transpose() * m).transpose() * m.conjugate() + 2.0 * q * t1 + q * q * t0;
    }
    e0 = std::move(n0);
    e1 = std::move(n1);
    e2 = std::move(n2);
  }
  ChargeMoments out;
  out.norm = e0.trace().real();
  if (out.norm > 0.0) {
    out.mean = e1.trace().real() / out.norm;
    out.variance = std::max(0.0, e2.trace().real() / out.norm - out.mean * out.mean);
  }
  return out;
}

double Mps::canonical_error() const {
  double err = 0.0;
  for (int p = 0; p < center_; ++p) {
    const CMatrix& t = tensors_[static_cast<std::size_t>(p)];
    const CMatrix g = t.adjoint() * t;
    err = std::max(err, (g - CMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
  }
  for (int p = center_ + 1; p < size(); ++p) {
    const CMatrix& t = tensors_[static_cast<std::size_t>(p)];
    const int d = phys_at(p);
    const auto v = Eigen::Map<const CMatrix>(t.data(), t.rows() / d, d * t.cols());
    const CMatrix g = v * v.adjoint();
    err = std::max(err, (g - CMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
  }
  return err;
}

// -- checkpoints --------------------------------------------------------------

namespace {

std::string kind_name(SiteKind k) {
  switch (k) {
    case SiteKind::photon: return "photon";
    case SiteKind::exciton: return "exciton";
    case SiteKind::vibration: return "vibration";
    case SiteKind::generic: break;
  }
  return "generic";
}

SiteKind parse_kind(const std::string& s) {
  if (s == "photon") return SiteKind::photon;
  if (s == "exciton") return SiteKind::exciton;
  if (s == "vibration") return SiteKind::vibration;
  return SiteKind::generic;
}

}  // namespace

void Mps::save_checkpoint(const std::filesystem::path& prefix) const {
  nlohmann::json meta;
  meta["format"] = "htc-mps";
  meta["version"] = 1;
  meta["center"] = center_;
  meta["truncation"] = truncation_;
  meta["chi_max"] = options_.chi_max;
  meta["svd_cutoff"] = options_.svd_cutoff;
  meta["factorization"] = options_.factorization == Factorization::svd ? "svd" : "density_matrix";
  meta["conserve_charge"] = options_.conserve_charge;
  meta["tracking"] = tracking_;
  meta["labels"] = label_at_;
  meta["bond_charges"] = bond_charges_;
  nlohmann::json sites = nlohmann::json::array();
  for (const auto& s : sites_) sites.push_back({{"kind", kind_name(s.kind)}, {"molecule", s.molecule}, {"dim", s.dim}});
  meta["sites"] = sites;
  nlohmann::json shapes = nlohmann::json::array();
  for (const auto& t : tensors_) shapes.push_back({t.rows(), t.cols()});
  meta["shapes"] = shapes;

  auto json_path = prefix;
  json_path += ".json";
  auto bin_path = prefix;
  bin_path += ".bin";
  std::ofstream js(json_path);
  std::ofstream bin(bin_path, std::ios::binary);
  if (!js || !bin) throw Error(ErrorCode::io_failure, "cannot write checkpoint " + prefix.string());
  js << meta.dump(1) << '\n';
  for (const auto& t : tensors_)
    bin.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(cplx)));
  if (!js || !bin) throw Error(ErrorCode::io_failure, "failed writing checkpoint " + prefix.string());
}

Mps Mps::load_checkpoint(const std::filesystem::path& prefix) {
  auto json_path = prefix;
  json_path += ".json";
  auto bin_path = prefix;
  bin_path += ".bin";
  std::ifstream js(json_path);
  std::ifstream bin(bin_path, std::ios::binary);
  if (!js || !bin) throw Error(ErrorCode::io_failure, "cannot read checkpoint " + prefix.string());
  nlohmann::json meta;
  try {
    js >> meta;
    Mps m;
    if (meta.at("format") != "htc-mps") throw Error(ErrorCode::io_failure, "not an MPS checkpoint");
    for (const auto& s : meta.at("sites"))
      m.sites_.push_back({parse_kind(s.at("kind")), s.at("molecule"), s.at("dim")});
    m.label_at_ = meta.at("labels").get<std::vector<int>>();
    m.position_of_.assign(m.label_at_.size(), 0);
    for (std::size_t p = 0; p < m.label_at_.size(); ++p) m.position_of_[static_cast<std::size_t>(m.label_at_[p])] = static_cast<int>(p);
    m.center_ = meta.at("center");
    m.truncation_ = meta.at("truncation");
    m.options_.chi_max = meta.at("chi_max");
    m.options_.svd_cutoff = meta.at("svd_cutoff");
    m.options_.factorization = meta.at("factorization") == "svd" ? Factorization::svd : Factorization::density_matrix;
    m.options_.conserve_charge = meta.at("conserve_charge");
    m.tracking_ = meta.at("tracking");
    m.bond_charges_ = meta.at("bond_charges").get<std::vector<std::vector<int>>>();
    for (const auto& sh : meta.at("shapes")) {
      CMatrix t(sh.at(0).get<Eigen::Index>(), sh.at(1).get<Eigen::Index>());
      bin.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(cplx)));
      if (!bin) throw Error(ErrorCode::io_failure, "truncated checkpoint data");
      m.tensors_.push_back(std::move(t));
    }
    if (m.tensors_.size() != m.sites_.size() || m.label_at_.size() != m.sites_.size())
      throw Error(ErrorCode::io_failure, "inconsistent checkpoint");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io_failure, std::string("malformed checkpoint: ") + e.what());
  }
}

// -- HTC layout ---------------------------------------------------------------

std::string to_string(const Excitation& e) {
  return e.kind == Excitation::Kind::cavity ? std::string("cavity") : "molecule:" + std::to_string(e.molecule);
}

std::vector<PhysicalSite> htc_sites(int n_molecules, const LocalDims& dims) {
  require(n_molecules >= 1, ErrorCode::invalid_argument, "need at least one molecule");
  require(dims.n_max_p >= 1 && dims.n_max_v >= 0, ErrorCode::invalid_argument, "invalid local cutoffs");
  std::vector<PhysicalSite> sites;
  sites.push_back({SiteKind::photon, -1, dims.photon_dim()});
  for (int n = 0; n < n_molecules; ++n) {
    sites.push_back({SiteKind::exciton, n, 2});
    sites.push_back({SiteKind::vibration, n, dims.vib_dim()});
  }
  return sites;
}

Mps init_product_state(const HtcParams& params, const Excitation& excitation, const LocalDims& dims,
                       Mps::Options options) {
  params.validate();
  const int n = params.n_molecules;
  if (excitation.kind == Excitation::Kind::molecule)
    require(excitation.molecule >= 1 && excitation.molecule <= n, ErrorCode::invalid_argument,
            "excited molecule index out of range");
  auto sites = htc_sites(n, dims);
  std::vector<CVector> local;
  local.reserve(sites.size());
  for (const auto& s : sites) {
    CVector v = CVector::Zero(s.dim);
    const bool excited = (s.kind == SiteKind::photon && excitation.kind == Excitation::Kind::cavity) ||
                         (s.kind == SiteKind::exciton && excitation.kind == Excitation::Kind::molecule &&
                          s.molecule == excitation.molecule - 1);
    v(excited ? 1 : 0) = 1.0;
    local.push_back(std::move(v));
  }
  return Mps(std::move(sites), local, options);
}

}  // namespace htc
