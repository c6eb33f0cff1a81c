#pragma once

#include <functional>
#include <vector>

#include "rng.hpp"

namespace coordsim {

// One atom of a finite measure on [0,1]: a location y and a nonnegative mass.
struct Atom {
  double y = 0.0;
  double mass = 0.0;

  bool operator==(const Atom&) const = default;
};

enum class EventKind { Migration, Death, Reproduction, Coalescence };

const char* event_kind_name(EventKind kind);

// Finite measure on [0,1] stored as an atomic mixture. Construction merges
// duplicate locations (summing mass) and keeps atoms sorted by location.
//
// Locations in (0, kMinAtomLocation) are rejected: the Poissonized clock rate
// of such an atom (mass/y, or mass/y^2 for coalescence) diverges as y -> 0,
// so an atom meant to act "at zero" must be written as exactly 0, where the
// per-individual rate convention applies instead.
class AtomicMeasure {
 public:
  static constexpr double kMinAtomLocation = 1e-9;

  AtomicMeasure() = default;
  explicit AtomicMeasure(std::vector<Atom> atoms);

  static AtomicMeasure zero() { return AtomicMeasure(); }
  static AtomicMeasure dirac(double y, double mass);

  const std::vector<Atom>& atoms() const { return atoms_; }
  bool is_zero() const { return atoms_.empty(); }
  double total_mass() const;
  // Mass at an exact location (0 if no atom sits there).
  double mass_at(double y) const;

  bool operator==(const AtomicMeasure&) const = default;

 private:
  std::vector<Atom> atoms_;  // sorted, strictly increasing locations
};

// mu = mass_at_zero * delta_0 + sum of strictly positive atoms.
struct MeasureSplit {
  double mass_at_zero = 0.0;
  std::vector<Atom> positive_atoms;
};

MeasureSplit split(const AtomicMeasure& m);

// Poissonized clock rate of one positive atom: mass/y for migration, death
// and reproduction, mass/y^2 for coalescence. Atoms at y == 0 never go
// through here; they contribute per-individual (resp. per-pair) rates.
double event_rate(const Atom& atom, EventKind kind);

// Number of individuals out of n joining a coordinated event of impact y:
// a Binomial(n, y) draw.
long long participation_count(long long n, double y, Rng& rng);

// Midpoint-rule atomization of a density on (0,1] over a uniform grid of
// n_atoms cells. If total_mass_error is non-null it receives an a-posteriori
// quadrature estimate (the change in total mass when the grid is doubled).
AtomicMeasure atomize_density(const std::function<double(double)>& density,
                              int n_atoms, double* total_mass_error = nullptr);

}  // namespace coordsim
