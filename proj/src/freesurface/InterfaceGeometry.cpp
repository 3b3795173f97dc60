//======================================================================================================================
//
//! \file InterfaceGeometry.cpp
//
//======================================================================================================================
#include "Internal.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace blockforge::freesurface {

using field::Field;
using namespace detail;

namespace {

double phiAt(const Field& fill, const Field& flags, int x, int y, int z, double fallback)
{
   if (!isDomainCell(flagAt(flags, x, y, z))) return fallback;
   return std::clamp(fill(x, y, z), 0.0, 1.0);
}

/// Unnormalized -grad(phi) with weights 4 (faces), 2 (edges), 1 (corners).
Vec3 negativeGradient(const Field& fill, const Field& flags, int x, int y, int z)
{
   const double center = phiAt(fill, flags, x, y, z, std::clamp(fill(x, y, z), 0.0, 1.0));
   Vec3 g{ 0.0, 0.0, 0.0 };
   for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
         for (int dx = -1; dx <= 1; ++dx)
         {
            const int nonZero = (dx != 0) + (dy != 0) + (dz != 0);
            if (nonZero == 0) continue;
            const double w   = nonZero == 1 ? 4.0 : (nonZero == 2 ? 2.0 : 1.0);
            const double phi = phiAt(fill, flags, x + dx, y + dy, z + dz, center);
            g[0] -= w * dx * phi;
            g[1] -= w * dy * phi;
            g[2] -= w * dz * phi;
         }
   return g;
}

bool normalAt(const Field& fill, const Field& flags, int x, int y, int z, Vec3& n)
{
   const Vec3 g    = negativeGradient(fill, flags, x, y, z);
   const double len = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
   if (len < 1e-12)
   {
      n = { 0.0, 0.0, 0.0 };
      return false;
   }
   n = { g[0] / len, g[1] / len, g[2] / len };
   return true;
}

} // namespace

InterfaceGeometry interfaceGeometry(const Field& fill, const Field& flags, int x, int y, int z)
{
   InterfaceGeometry geo;
   Vec3 n;
   if (!normalAt(fill, flags, x, y, z, n))
   {
      geo.degenerate = true;
      return geo;
   }
   geo.normal = n;

   double div = 0.0;
   for (int d = 0; d < 3; ++d)
   {
      int o[3] = { 0, 0, 0 };
      o[d]     = 1;
      Vec3 plus = n, minus = n;
      if (isDomainCell(flagAt(flags, x + o[0], y + o[1], z + o[2])))
         normalAt(fill, flags, x + o[0], y + o[1], z + o[2], plus);
      if (isDomainCell(flagAt(flags, x - o[0], y - o[1], z - o[2])))
         normalAt(fill, flags, x - o[0], y - o[1], z - o[2], minus);
      div += 0.5 * (plus[std::size_t(d)] - minus[std::size_t(d)]);
   }
   geo.curvature = div;
   return geo;
}

void computeCurvature(blockgrid::Block& block, const FreeSurfaceParams& params)
{
   auto& kappa = block.getField(fields::curvature);
   kappa.fill(0.0);
   if (params.sigma <= 0.0) return;
   const auto& fill  = block.getField(fields::fill);
   const auto& flags = block.getField(lbm::fields::flags);
   forInterior(kappa, [&](int x, int y, int z) {
      if (flagAt(flags, x, y, z) == CellType::Interface) kappa(x, y, z) = interfaceGeometry(fill, flags, x, y, z).curvature;
   });
}

void computeGasDensity(blockgrid::Block& block, const BubbleTable& table)
{
   auto& rho         = block.getField(fields::gasDensity);
   const auto& ids   = block.getField(fields::bubbleId);
   const auto& flags = block.getField(lbm::fields::flags);
   const int g       = rho.ghostLayers();
   for (int z = -g; z < rho.zSize() + g; ++z)
      for (int y = -g; y < rho.ySize() + g; ++y)
         for (int x = -g; x < rho.xSize() + g; ++x)
         {
            const int id = int(ids(x, y, z));
            if (!isGasOrInterface(flagAt(flags, x, y, z)) || id < 0 || !table.contains(id))
            {
               rho(x, y, z) = std::numeric_limits<double>::quiet_NaN();
               continue;
            }
            const Bubble& bubble = table.at(id);
            rho(x, y, z)         = bubble.V > 0.0 ? bubble.pressure() : 1.0; // vanishing bubble: reference pressure
         }
}

} // namespace blockforge::freesurface
