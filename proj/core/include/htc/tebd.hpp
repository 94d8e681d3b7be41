#pragma once

#include <functional>
#include <vector>

#include "htc/error.hpp"
#include "htc/mps.hpp"
#include "htc/observables.hpp"

namespace htc {

/// Gates for one symmetric second-order step. Local gates act on
/// (exc_n, vib_n) and hold every on-site and Holstein term; cavity gates act
/// on the photon and one exciton, in either chain order.
struct TrotterGateSet {
  double dt = 0.0;
  std::vector<TwoSiteGate> local_half;      // tau = dt/2, order (exc, vib)
  std::vector<TwoSiteGate> local_full;      // tau = dt, joins the halves of consecutive steps
  std::vector<TwoSiteGate> cavity_half_pe;  // tau = dt/2, order (ph, exc)
  std::vector<TwoSiteGate> cavity_half_ep;  // tau = dt/2, order (exc, ph)
  TwoSiteGate cavity_full_last;             // tau = dt, (ph, exc_N)
};

/// Two-site generators (hermitian), exposed for tests and energy checks.
CMatrix local_generator(const HamiltonianTermList& terms, int molecule, const LocalDims& dims);
CMatrix cavity_generator(double g, const LocalDims& dims, bool photon_first);

TrotterGateSet build_gates(const HamiltonianTermList& terms, const LocalDims& dims, double dt);

struct StepReport {
  double truncation_weight = 0.0;
  int max_bond = 1;
};

/// Consecutive steps meet in local half gates on untouched sites, so an
/// unobserved step boundary can apply them once as a full gate.
struct StepFusion {
  bool skip_leading_local = false;   // previous step already applied it
  bool merge_trailing_local = false;  // apply a full gate; the next step skips its half
};

/// One step: the photon travels to the end of the chain applying half-step
/// gates, turns around with a full cavity gate on the last molecule, and
/// travels back. Requires the standard site order (photon first). With a
/// merged trailing gate the state is not at a step boundary until the next
/// step runs with skip_leading_local.
StepReport step(Mps& state, const TrotterGateSet& gates, StepFusion fusion = {});

/// <H> from local expectations and two-site correlators.
double energy(const Mps& state, const HamiltonianTermList& terms);

struct Schedule {
  double t_final = 0.0;
  double dt = 0.01;
  int record_every = 1;
};

/// Number of steps and effective dt that land exactly on t_final.
struct StepGrid {
  int n_steps = 0;
  double dt = 0.0;
};
StepGrid resolve_schedule(const Schedule& schedule);

/// Whether step k (1-based) is recorded: every record_every steps and the last.
bool is_record_step(const StepGrid& grid, int record_every, int k);

/// Called after each record; throwing aborts the evolution.
using Observer = std::function<void(const ObservableRecord&, const Mps&)>;

/// Thrown when an observer or a step fails; carries the records so far.
class EvolutionAborted : public Error {
 public:
  EvolutionAborted(const std::string& why, ObservableTimeSeries partial)
      : Error(ErrorCode::aborted, why), partial_(std::move(partial)) {}
  const ObservableTimeSeries& partial() const { return partial_; }

 private:
  ObservableTimeSeries partial_;
};

ObservableTimeSeries evolve(Mps& state, const HamiltonianTermList& terms, const LocalDims& dims,
                            const Schedule& schedule, const TailOperator& tails,
                            const std::vector<Observer>& observers = {});

}  // namespace htc
