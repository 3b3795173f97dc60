//======================================================================================================================
//
//! \file LatticeModel.h
//! \brief Equilibrium, moments and the two-relaxation-time collision for a single cell.
//
//======================================================================================================================
#pragma once

#include "blockforge/lbm/Stencil.h"

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

namespace blockforge::lbm {

class LbmError : public std::runtime_error
{
 public:
   using std::runtime_error::runtime_error;
};

using Vec3 = std::array<double, 3>;

struct Macroscopic
{
   double rho = 1.0;
   Vec3 u{};
};

//**********************************************************************************************************************
/*!
 *  TRT relaxation rates. The even rate fixes the lattice viscosity nu = (1/omegaEven - 1/2) / 3, the odd rate follows
 *  from the magic parameter Lambda = (1/omegaEven - 1/2)(1/omegaOdd - 1/2).
 */
//**********************************************************************************************************************
struct TRTParams
{
   double omegaEven = 1.0;
   double omegaOdd  = 1.0;
   double magic     = 3.0 / 16.0;
   double viscosity = 1.0 / 6.0;

   static constexpr double defaultMagic = 3.0 / 16.0;

   static TRTParams fromOmega(double omegaEven, double magic = defaultMagic);
   static TRTParams fromViscosity(double latticeViscosity, double magic = defaultMagic);
};

inline double equilibriumComponent(double w, const std::array<int, 3>& e, double rho, const Vec3& u)
{
   const double eu = e[0] * u[0] + e[1] * u[1] + e[2] * u[2];
   const double uu = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
   return w * rho * (1.0 + 3.0 * eu + 4.5 * eu * eu - 1.5 * uu);
}

/// Even part of the equilibrium: (f_a^eq + f_inv(a)^eq) / 2.
inline double equilibriumEven(double w, const std::array<int, 3>& e, double rho, const Vec3& u)
{
   const double eu = e[0] * u[0] + e[1] * u[1] + e[2] * u[2];
   const double uu = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
   return w * rho * (1.0 + 4.5 * eu * eu - 1.5 * uu);
}

std::vector<double> equilibrium(double rho, const Vec3& u, const Stencil& stencil);

/// Zeroth and first moment; throws LbmError if the density is not positive.
Macroscopic macroscopic(std::span<const double> f, const Stencil& stencil);

/// One-cell TRT collision, returning the post-collision PDFs.
std::vector<double> trtCollide(std::span<const double> f, const TRTParams& params, const Stencil& stencil);

template <typename S, typename Access>
inline Macroscopic cellMoments(Access&& f)
{
   Macroscopic m;
   double rho = 0, jx = 0, jy = 0, jz = 0;
   for (int a = 0; a < S::Q; ++a)
   {
      const double v = f(a);
      rho += v;
      jx += v * S::e[a][0];
      jy += v * S::e[a][1];
      jz += v * S::e[a][2];
   }
   m.rho = rho;
   m.u   = { jx / rho, jy / rho, jz / rho };
   return m;
}

} // namespace blockforge::lbm
