#include "measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace coordsim {

const char* event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::Migration: return "migration";
    case EventKind::Death: return "death";
    case EventKind::Reproduction: return "reproduction";
    case EventKind::Coalescence: return "coalescence";
  }
  return "?";
}

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms) {
  for (const Atom& a : atoms) {
    if (!(a.y >= 0.0 && a.y <= 1.0) || !std::isfinite(a.y))
      throw std::invalid_argument("measure atom location must lie in [0,1], got " +
                                  std::to_string(a.y));
    if (!(a.mass >= 0.0) || !std::isfinite(a.mass))
      throw std::invalid_argument("measure atom mass must be finite and >= 0, got " +
                                  std::to_string(a.mass));
    if (a.y > 0.0 && a.y < kMinAtomLocation)
      throw std::invalid_argument(
          "measure atom at y=" + std::to_string(a.y) +
          " is below the location floor " + std::to_string(kMinAtomLocation) +
          ": its event rate mass/y^2 diverges; use y=0 for per-individual rates");
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.y < b.y; });
  for (const Atom& a : atoms) {
    if (a.mass == 0.0) continue;
    if (!atoms_.empty() && atoms_.back().y == a.y)
      atoms_.back().mass += a.mass;
    else
      atoms_.push_back(a);
  }
}

AtomicMeasure AtomicMeasure::dirac(double y, double mass) {
  return AtomicMeasure({Atom{y, mass}});
}

double AtomicMeasure::total_mass() const {
  double total = 0.0;
  for (const Atom& a : atoms_) total += a.mass;
  return total;
}

double AtomicMeasure::mass_at(double y) const {
  for (const Atom& a : atoms_)
    if (a.y == y) return a.mass;
  return 0.0;
}

MeasureSplit split(const AtomicMeasure& m) {
  MeasureSplit out;
  for (const Atom& a : m.atoms()) {
    if (a.y == 0.0)
      out.mass_at_zero += a.mass;
    else
      out.positive_atoms.push_back(a);
  }
  return out;
}

double event_rate(const Atom& atom, EventKind kind) {
  if (atom.y <= 0.0)
    throw std::invalid_argument(
        "event_rate is defined for positive atoms only; atoms at zero carry "
        "per-individual rates");
  if (atom.mass < 0.0) throw std::invalid_argument("negative atom mass");
  if (kind == EventKind::Coalescence) return atom.mass / (atom.y * atom.y);
  return atom.mass / atom.y;
}

long long participation_count(long long n, double y, Rng& rng) {
  if (n < 0) throw std::invalid_argument("participation_count: n < 0");
  return binomial(rng, n, y);
}

AtomicMeasure atomize_density(const std::function<double(double)>& density,
                              int n_atoms, double* total_mass_error) {
  if (n_atoms < 1) throw std::invalid_argument("atomize_density: n_atoms < 1");
  auto midpoint_rule = [&](int n) {
    std::vector<Atom> atoms;
    atoms.reserve(n);
    for (int k = 0; k < n; ++k) {
      double mid = (k + 0.5) / n;
      double value = density(mid);
      if (value < 0.0)
        throw std::invalid_argument("atomize_density: density is negative at y=" +
                                    std::to_string(mid));
      atoms.push_back(Atom{mid, value / n});
    }
    return AtomicMeasure(std::move(atoms));
  };
  AtomicMeasure coarse = midpoint_rule(n_atoms);
  if (total_mass_error) {
    AtomicMeasure fine = midpoint_rule(2 * n_atoms);
    *total_mass_error = std::abs(fine.total_mass() - coarse.total_mass());
  }
  return coarse;
}

}  // namespace coordsim
