#pragma once

#include <ostream>
#include <string>

#include "blowup/integrator.hpp"

namespace blowup::reduced {

enum class TwoModeKind { fourier, taylor };
TwoModeKind kind_from_string(const std::string& s);

// Fourier kind: v ~ a - b cos x.  Taylor kind: v ~ a + b x^2.
struct TwoModeState {
  double a = 0, b = 0;
};

TwoModeState fourier_two_mode_rhs(TwoModeState s);
TwoModeState taylor_two_mode_rhs(TwoModeState s);

struct TwoModeSolution {
  TwoModeKind kind;
  double alpha, epsilon;
  ode::Trajectory trajectory;  // state (a, b) as complex 2-vectors, dense output kept
  // Where the integration must stop: b^2 = 2a^2 (Fourier), a = 0 (Taylor).
  double t_c_prime;
  // First zero of the ansatz at x = 0: a = b (Fourier); equals t_c_prime for Taylor.
  double t_ab;

  TwoModeState at(std::size_t i) const;
};

TwoModeSolution solve_two_mode(TwoModeKind kind, double alpha, double epsilon,
                               const ode::IntegratorConfig& cfg = {});

double taylor_conserved_quantity(TwoModeState s);

struct NearBlowupFit {
  TwoModeKind kind;
  double t_c;           // t_ab of the solution
  double constant;      // a_c (Fourier) or b_c (Taylor)
  double t_fit;         // where the match was made
  double observable;    // a - b or a at t_fit

  TwoModeState predict(double t) const;
};

// Matches the near-event asymptotic form at the point where the event
// observable equals `match_level` (inside [1e-4, 1e-3]).
NearBlowupFit near_blowup_forms(const TwoModeSolution& sol, double match_level = 1e-4);

// a, b, da/dt, db/dt on an na x nb lattice.
void write_phase_plane_csv(std::ostream& os, TwoModeKind kind, double a_lo, double a_hi, int na,
                           double b_lo, double b_hi, int nb);

}  // namespace blowup::reduced
