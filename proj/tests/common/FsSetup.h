// Shared setup of free surface test domains.
#pragma once

#include "blockforge/comms/GhostExchange.h"
#include "blockforge/freesurface/FreeSurface.h"

#include <functional>

namespace testutil {

using namespace blockforge;

struct FsDomain
{
   blockgrid::Vec3i size{ 16, 16, 16 };
   blockgrid::Vec3i blockSize{ 16, 16, 16 };
   std::array<bool, 3> periodic{ false, false, false };
   freesurface::FreeSurfaceParams params;
   std::function<double(int, int, int)> fill = [](int, int, int) { return 1.0; };
   std::function<lbm::Vec3(int, int, int)> velocity = [](int, int, int) { return lbm::Vec3{ 0, 0, 0 }; };
   /// optional extra flags (e.g. obstacles); return Fluid to keep the cell a domain cell
   std::function<lbm::CellType(int, int, int)> flag = [](int, int, int) { return lbm::CellType::Fluid; };
};

inline blockgrid::BlockStorage makeLbmStorage(const FsDomain& d, comms::Transport& t)
{
   blockgrid::BlockStorage s(d.size, d.blockSize, d.periodic, t.size());
   lbm::LbmFieldConfig cfg;
   cfg.flagGhostLayers = d.params.ghostLayers();
   lbm::addLbmFields(s, t.rank(), cfg);
   for (auto* b : s.localBlocks(t.rank()))
   {
      auto& flags = b->getField(lbm::fields::flags);
      for (int z = 0; z < flags.zSize(); ++z)
         for (int y = 0; y < flags.ySize(); ++y)
            for (int x = 0; x < flags.xSize(); ++x)
            {
               const auto g = b->toGlobal(x, y, z);
               flags(x, y, z) = lbm::flagValue(d.flag(g[0], g[1], g[2]));
               lbm::setEquilibrium(*b, lbm::StencilKind::D3Q19, x, y, z, 1.0, d.velocity(g[0], g[1], g[2]));
            }
   }
   lbm::exchangeBoundarySetup(s, t);
   return s;
}

inline blockgrid::BlockStorage makeFsStorage(const FsDomain& d, freesurface::FreeSurfaceState& state,
                                             comms::Transport& t)
{
   auto s = makeLbmStorage(d, t);
   freesurface::addFreeSurfaceFields(s, t.rank(), d.params);
   for (auto* b : s.localBlocks(t.rank()))
   {
      auto& fill = b->getField(freesurface::fields::fill);
      for (int z = 0; z < fill.zSize(); ++z)
         for (int y = 0; y < fill.ySize(); ++y)
            for (int x = 0; x < fill.xSize(); ++x)
            {
               const auto g = b->toGlobal(x, y, z);
               fill(x, y, z) = d.fill(g[0], g[1], g[2]);
            }
   }
   lbm::exchangeBoundarySetup(s, t);
   freesurface::classifyCells(s, t, d.params);
   state.params = d.params;
   freesurface::initializeFreeSurface(s, state, t);
   return s;
}

/// Calls fn(block, x, y, z, global) for all interior cells of the worker's blocks.
template <typename Fn>
void forCells(blockgrid::BlockStorage& s, int worker, Fn&& fn)
{
   for (auto* b : s.localBlocks(worker))
   {
      const auto n = b->size();
      for (int z = 0; z < n[2]; ++z)
         for (int y = 0; y < n[1]; ++y)
            for (int x = 0; x < n[0]; ++x)
               fn(*b, x, y, z, b->toGlobal(x, y, z));
   }
}

} // namespace testutil
