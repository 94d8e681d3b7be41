#include "htc/perturb.hpp"

#include <cmath>
#include <complex>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "htc/error.hpp"

namespace htc {

namespace {

void require_n(int n) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "N must be >= 1");
}

// (1 - cos x) / x^2, regular at the origin
double kernel(double x) {
  if (std::abs(x) < 1e-4) return 0.5 - x * x / 24.0;
  const double s = std::sin(0.5 * x);
  return 2.0 * s * s / (x * x);
}

}  // namespace

PerturbationReport survival_tc_exact(int n, double t, double g_c) {
  require_n(n);
  const double nn = static_cast<double>(n);
  const double v = (nn - 1.0) * (nn - 1.0) / (nn * nn) + 2.0 * (nn - 1.0) * std::cos(g_c * t) / (nn * nn) +
                   0.5 / (nn * nn) + std::cos(2.0 * g_c * t) / (2.0 * nn * nn);
  return {"survival_tc_exact", v, "exact for lambda = W = 0"};
}

PerturbationReport dark_weight_initial_molecule(int n) {
  require_n(n);
  return {"dark_weight_initial_molecule", 1.0 - 1.0 / n, "exact for W = 0"};
}

PerturbationReport dark_photon_weight_disorder(double w, int n, DisorderLaw law, double g_c) {
  require_n(n);
  if (!(w >= 0.0)) throw Error(ErrorCode::invalid_argument, "W must be >= 0");
  double v = (n - 1.0) * w * w / (n * g_c * g_c);
  if (law == DisorderLaw::box) v /= 12.0;
  return {"dark_photon_weight_disorder", v, "second order, requires W << g_c"};
}

PerturbationReport dark_photon_weight_fourier(const DisorderRealization& r, double g_c) {
  const auto n = r.epsilons.size();
  if (n == 0) throw Error(ErrorCode::invalid_argument, "empty realization");
  double sum = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    std::complex<double> e(0.0);
    for (std::size_t m = 0; m < n; ++m)
      e += std::polar(1.0, 2.0 * M_PI * static_cast<double>(k * (m + 1) % n) / static_cast<double>(n)) * r.epsilons[m];
    e /= static_cast<double>(n);
    sum += std::norm(e);
  }
  return {"dark_photon_weight_fourier", sum / (g_c * g_c), "second order, requires W << g_c"};
}

PerturbationReport dark_photon_weight_vibronic(double lambda, double nu, double g_c) {
  return {"dark_photon_weight_vibronic", lambda * lambda * nu * nu / (2.0 * g_c * g_c),
          "second order in lambda nu / g_c, requires nu << g_c"};
}

PerturbationReport dark_photon_weight_vibronic_unreduced(double lambda, double nu, double g_c) {
  const double a = lambda * lambda * nu * nu / 4.0;
  auto branch = [&](double gm) { return a / (gm * gm) + a / (gm * g_c); };
  return {"dark_photon_weight_vibronic_unreduced", 0.5 * (branch(g_c - nu) + branch(g_c + nu)),
          "second order in lambda nu / g_c"};
}

PerturbationReport transfer_scaling_estimate(double w, int n, double t, double epsilon1) {
  require_n(n);
  if (!(w >= 0.0) || !(t >= 0.0)) throw Error(ErrorCode::invalid_argument, "W and t must be >= 0");
  PerturbationReport rep{"transfer_scaling_estimate", 0.0, "scaling law only, box disorder, W << g_c, lambda = 0"};
  if (w == 0.0 || t == 0.0) return rep;
  const double lo = (-0.5 * w - epsilon1) * t, hi = (0.5 * w - epsilon1) * t;
  using boost::math::quadrature::gauss_kronrod;
  const double integral = gauss_kronrod<double, 61>::integrate(kernel, lo, hi, 15, 1e-12);
  rep.value = w * t / (6.0 * n) * integral;
  return rep;
}

NoCavityReference no_cavity_reference(double lambda, double nu, int n, const TailConfig& tails, double t) {
  require_n(n);
  tails.validate();
  NoCavityReference r;
  r.x1 = std::sqrt(2.0) * lambda * (1.0 - std::cos(nu * t));
  r.p1 = std::sqrt(2.0) * lambda * std::sin(nu * t);
  r.eta_l = (n - 1) * tails.eta0 + 0.5 * (1.0 + std::erf(tails.x_thr_l - r.x1));
  r.eta_r = (n - 1) * tails.eta0 + 0.5 * (1.0 - std::erf(tails.x_thr_r - r.x1));
  return r;
}

}  // namespace htc
