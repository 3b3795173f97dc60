//======================================================================================================================
//
//! \file Lattice.h
//! \brief Conversion to lattice units, time step selection and configuration checks.
//
//======================================================================================================================
#pragma once

#include "blockforge/unitsconfig/ConfigTree.h"

#include <optional>
#include <string>
#include <vector>

namespace blockforge::unitsconfig {

/// Conversion scales. The mass scale is rho0*dx^3; rho0 is only needed for quantities carrying mass.
struct LatticeScale
{
   Quantity dx;
   Quantity dt;
   std::optional<Quantity> rho0;

   void validate() const;
};

/// q / (dx^a * M^b * dt^c) for q with dimensions L^a M^b T^c.
double toLattice(const Quantity& q, const LatticeScale& scale);

struct StabilityConstraints
{
   double omegaCap = 1.95; //!< upper bound of the even relaxation rate
   double uCap     = 0.05; //!< upper bound of the lattice velocity
};

struct DtBounds
{
   Quantity dtMin; //!< from omega <= omegaCap
   Quantity dtMax; //!< from u_lattice <= uCap
};

DtBounds dtBounds(const Quantity& viscosity, const Quantity& dx, const Quantity& maxVelocity,
                  const StabilityConstraints& c = {});

/// Largest dt satisfying both bounds. Throws if the bounds contradict each other.
Quantity findOptimalDt(const Quantity& viscosity, const Quantity& dx, const std::optional<Quantity>& maxVelocity,
                       const StabilityConstraints& c = {});

/// Reads Physical.viscosity, Physical.dx and Physical.max_velocity.
Quantity findOptimalDt(const ConfigTree& config, const StabilityConstraints& c = {});

/// Scale from Physical.dx, Physical.dt and (optional) Physical.density.
LatticeScale latticeScaleFromTree(const ConfigTree& config);

/// Every quantity leaf replaced by its lattice value.
ConfigTree nondimensionalizeTree(const ConfigTree& tree, const LatticeScale& scale);

/// Uses latticeScaleFromTree when the tree holds quantities; a tree without quantities is returned unchanged.
ConfigTree nondimensionalizeTree(const ConfigTree& tree);

bool containsQuantities(const ConfigTree& tree);

struct Diagnostic
{
   std::string path;
   std::string message;
};

/// Relaxation rate from Physical.omega or, if absent, from the lattice viscosity.
std::optional<double> relaxationRate(const ConfigTree& config);

/// Range and consistency checks of a nondimensionalized tree; empty means valid.
std::vector<Diagnostic> validateConfig(const ConfigTree& config);

} // namespace blockforge::unitsconfig
