//======================================================================================================================
//
//! \file LatticeModel.cpp
//
//======================================================================================================================
#include "blockforge/lbm/LatticeModel.h"

#include <cmath>

namespace blockforge::lbm {

namespace {
template <typename S>
Stencil fromTables(const char* name)
{
   Stencil s;
   s.kind = S::kind;
   s.Q    = S::Q;
   s.e.assign(S::e.begin(), S::e.end());
   s.w.assign(S::w.begin(), S::w.end());
   s.weightNumerator.assign(S::weightNumerator.begin(), S::weightNumerator.end());
   s.weightDenominator = S::weightDenominator;
   s.opposite.assign(S::inv.begin(), S::inv.end());
   s.name = name;
   return s;
}
} // namespace

Stencil makeStencil(StencilKind kind)
{
   return kind == StencilKind::D2Q9 ? fromTables<D2Q9>("D2Q9") : fromTables<D3Q19>("D3Q19");
}

Stencil makeStencil(const std::string& name)
{
   if (name == "D3Q19") return makeStencil(StencilKind::D3Q19);
   if (name == "D2Q9") return makeStencil(StencilKind::D2Q9);
   throw std::invalid_argument("unknown stencil '" + name + "'");
}

TRTParams TRTParams::fromOmega(double omegaEven, double magic)
{
   if (!(omegaEven > 0.0 && omegaEven < 2.0)) throw LbmError("omega_even must lie in (0,2)");
   if (!(magic > 0.0)) throw LbmError("magic parameter must be positive");
   TRTParams p;
   p.omegaEven = omegaEven;
   p.magic     = magic;
   p.viscosity = (1.0 / omegaEven - 0.5) / 3.0;
   p.omegaOdd  = 1.0 / (magic / (1.0 / omegaEven - 0.5) + 0.5);
   return p;
}

TRTParams TRTParams::fromViscosity(double latticeViscosity, double magic)
{
   if (!(latticeViscosity > 0.0)) throw LbmError("lattice viscosity must be positive");
   return fromOmega(1.0 / (3.0 * latticeViscosity + 0.5), magic);
}

std::vector<double> equilibrium(double rho, const Vec3& u, const Stencil& stencil)
{
   std::vector<double> f(std::size_t(stencil.Q));
   for (int a = 0; a < stencil.Q; ++a)
      f[std::size_t(a)] = equilibriumComponent(stencil.w[std::size_t(a)], stencil.e[std::size_t(a)], rho, u);
   return f;
}

Macroscopic macroscopic(std::span<const double> f, const Stencil& stencil)
{
   if (int(f.size()) != stencil.Q) throw LbmError("PDF count does not match stencil");
   Macroscopic m;
   double rho = 0;
   Vec3 j{};
   for (int a = 0; a < stencil.Q; ++a)
   {
      const double v = f[std::size_t(a)];
      rho += v;
      for (int d = 0; d < 3; ++d)
         j[std::size_t(d)] += v * stencil.e[std::size_t(a)][std::size_t(d)];
   }
   if (!(rho > 0.0)) throw LbmError("non-positive density " + std::to_string(rho));
   m.rho = rho;
   for (int d = 0; d < 3; ++d)
      m.u[std::size_t(d)] = j[std::size_t(d)] / rho;
   return m;
}

std::vector<double> trtCollide(std::span<const double> f, const TRTParams& params, const Stencil& stencil)
{
   const Macroscopic m   = macroscopic(f, stencil);
   const auto feq        = equilibrium(m.rho, m.u, stencil);
   std::vector<double> out(f.size());
   for (int a = 0; a < stencil.Q; ++a)
   {
      const auto i         = std::size_t(a);
      const auto ia        = std::size_t(stencil.opposite[i]);
      const double fPlus   = 0.5 * (f[i] + f[ia]);
      const double fMinus  = 0.5 * (f[i] - f[ia]);
      const double eqPlus  = 0.5 * (feq[i] + feq[ia]);
      const double eqMinus = 0.5 * (feq[i] - feq[ia]);
      out[i]               = f[i] - params.omegaEven * (fPlus - eqPlus) - params.omegaOdd * (fMinus - eqMinus);
   }
   return out;
}

} // namespace blockforge::lbm
