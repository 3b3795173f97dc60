//======================================================================================================================
//
//! \file Internal.h
//! \brief Helpers shared by the free surface sources.
//
//======================================================================================================================
#pragma once

#include "blockforge/comms/GhostExchange.h"
#include "blockforge/freesurface/FreeSurface.h"

namespace blockforge::freesurface::detail {

using S = lbm::D3Q19;

inline CellType flagAt(const field::Field& flags, int x, int y, int z) { return lbm::cellType(flags(x, y, z)); }

inline bool isDomainCell(CellType t)
{
   return t == CellType::Fluid || t == CellType::Gas || t == CellType::Interface || t == CellType::ToLiquid ||
          t == CellType::ToGas;
}

inline bool isGasOrInterface(CellType t) { return t == CellType::Gas || t == CellType::Interface; }

/// Calls fn(x, y, z) for the interior cells of a field.
template <typename Fn>
void forInterior(const field::Field& f, Fn&& fn)
{
   for (int z = 0; z < f.zSize(); ++z)
      for (int y = 0; y < f.ySize(); ++y)
         for (int x = 0; x < f.xSize(); ++x)
            fn(x, y, z);
}

/// True if any stencil neighbor of (x,y,z) satisfies pred(flag).
template <typename Pred>
bool anyNeighbor(const field::Field& flags, int x, int y, int z, Pred&& pred)
{
   for (int a = 1; a < S::Q; ++a)
      if (pred(flagAt(flags, x + S::e[a][0], y + S::e[a][1], z + S::e[a][2]))) return true;
   return false;
}

inline void exchange(blockgrid::BlockStorage& storage, comms::Transport& transport, int ghostLayers,
                     const std::vector<std::string>& names)
{
   const comms::ExchangePlan plan(storage, transport.rank(), ghostLayers);
   comms::exchangeGhostLayers(plan, storage, names, transport);
}

inline lbm::Macroscopic moments(const field::Field& pdf, int x, int y, int z)
{
   return lbm::cellMoments<S>([&](int a) { return pdf(x, y, z, a); });
}

} // namespace blockforge::freesurface::detail
