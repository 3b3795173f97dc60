//======================================================================================================================
//
//! \file Conversion.cpp
//
//======================================================================================================================
#include "Internal.h"

#include <cmath>
#include <iostream>
#include <limits>

namespace blockforge::freesurface {

using blockgrid::Block;
using blockgrid::BlockStorage;
using field::Field;
using namespace detail;

namespace {

struct Cell
{
   int x, y, z;
};

struct NewInterface
{
   Cell c;
   double rho;
   Vec3 u;
};

struct Converted
{
   Cell c;
   double excess;
};

/// Nearest interior Interface cell of the block (ties: lowest linear index), or false.
bool nearestInterface(const Field& flags, const Cell& from, Cell& out)
{
   long best = std::numeric_limits<long>::max();
   bool found = false;
   forInterior(flags, [&](int x, int y, int z) {
      if (flagAt(flags, x, y, z) != CellType::Interface) return;
      const long d = long(x - from.x) * (x - from.x) + long(y - from.y) * (y - from.y) + long(z - from.z) * (z - from.z);
      if (d < best)
      {
         best  = d;
         out   = { x, y, z };
         found = true;
      }
   });
   return found;
}

} // namespace

ConversionReport convertCells(BlockStorage& storage, FreeSurfaceState& state, comms::Transport& transport)
{
   const auto blocks = storage.localBlocks(transport.rank());
   const int gFlags  = state.params.ghostLayers();
   const double eps  = state.params.epsilon;
   ConversionReport report;

   // mark cells crossing the thresholds
   for (Block* b : blocks)
   {
      auto& flags      = b->getField(lbm::fields::flags);
      const auto& fill = b->getField(fields::fill);
      forInterior(fill, [&](int x, int y, int z) {
         if (flagAt(flags, x, y, z) != CellType::Interface) return;
         const double phi = fill(x, y, z);
         if (phi >= 1.0 + eps) flags(x, y, z) = lbm::flagValue(CellType::ToLiquid);
         else if (phi <= -eps) flags(x, y, z) = lbm::flagValue(CellType::ToGas);
      });
   }
   exchange(storage, transport, gFlags, { lbm::fields::flags });

   // filling wins over emptying
   for (Block* b : blocks)
   {
      auto& flags = b->getField(lbm::fields::flags);
      std::vector<Cell> revert;
      forInterior(flags, [&](int x, int y, int z) {
         if (flagAt(flags, x, y, z) == CellType::ToGas &&
             anyNeighbor(flags, x, y, z, [](CellType t) { return t == CellType::ToLiquid; }))
            revert.push_back({ x, y, z });
      });
      for (const auto& c : revert)
         flags(c.x, c.y, c.z) = lbm::flagValue(CellType::Interface);
   }
   exchange(storage, transport, gFlags, { lbm::fields::flags });
   exchange(storage, transport, 1, { lbm::fields::pdf, fields::bubbleId });

   std::vector<std::vector<Converted>> converted(blocks.size());
   for (std::size_t bi = 0; bi < blocks.size(); ++bi)
   {
      Block* b     = blocks[bi];
      auto& flags  = b->getField(lbm::fields::flags);
      auto& pdf    = b->getField(lbm::fields::pdf);
      auto& fill   = b->getField(fields::fill);
      auto& mass   = b->getField(fields::mass);
      auto& ids    = b->getField(fields::bubbleId);

      // gas cells next to filled cells become interface cells without mass
      std::vector<NewInterface> fromGas;
      // liquid cells next to emptied cells become interface cells
      std::vector<std::pair<Cell, int>> fromLiquid;
      forInterior(flags, [&](int x, int y, int z) {
         const CellType t = flagAt(flags, x, y, z);
         if (t == CellType::Gas)
         {
            if (!anyNeighbor(flags, x, y, z, [](CellType n) { return n == CellType::ToLiquid; })) return;
            double rho = 0.0;
            Vec3 u{ 0.0, 0.0, 0.0 };
            int n = 0;
            for (int a = 1; a < S::Q; ++a)
            {
               const int nx = x + S::e[a][0], ny = y + S::e[a][1], nz = z + S::e[a][2];
               const CellType nt = flagAt(flags, nx, ny, nz);
               if (nt != CellType::Fluid && nt != CellType::Interface && nt != CellType::ToLiquid) continue;
               const auto m = moments(pdf, nx, ny, nz);
               rho += m.rho;
               for (std::size_t d = 0; d < 3; ++d)
                  u[d] += m.u[d];
               ++n;
            }
            for (auto& c : u)
               c /= n;
            fromGas.push_back({ { x, y, z }, rho / n, u });
         }
         else if (t == CellType::Fluid)
         {
            int label    = -1;
            bool touches = false;
            for (int a = 1; a < S::Q; ++a)
            {
               const int nx = x + S::e[a][0], ny = y + S::e[a][1], nz = z + S::e[a][2];
               if (flagAt(flags, nx, ny, nz) != CellType::ToGas) continue;
               touches      = true;
               const int id = int(ids(nx, ny, nz));
               if (id >= 0 && (label < 0 || id < label)) label = id;
            }
            if (touches) fromLiquid.push_back({ { x, y, z }, label });
         }
      });
      for (const auto& n : fromGas)
      {
         flags(n.c.x, n.c.y, n.c.z) = lbm::flagValue(CellType::Interface);
         fill(n.c.x, n.c.y, n.c.z)  = 0.0;
         mass(n.c.x, n.c.y, n.c.z)  = 0.0;
         lbm::setEquilibrium(*b, lbm::StencilKind::D3Q19, n.c.x, n.c.y, n.c.z, n.rho, n.u);
      }
      for (const auto& [c, label] : fromLiquid)
      {
         flags(c.x, c.y, c.z) = lbm::flagValue(CellType::Interface);
         fill(c.x, c.y, c.z)  = 1.0;
         mass(c.x, c.y, c.z)  = moments(pdf, c.x, c.y, c.z).rho;
         ids(c.x, c.y, c.z)   = label;
      }
      report.newInterface += std::int64_t(fromGas.size() + fromLiquid.size());

      // finalize the converting cells
      forInterior(flags, [&](int x, int y, int z) {
         const CellType t = flagAt(flags, x, y, z);
         if (t == CellType::ToLiquid)
         {
            const double rho = moments(pdf, x, y, z).rho;
            converted[bi].push_back({ { x, y, z }, mass(x, y, z) - rho });
            flags(x, y, z) = lbm::flagValue(CellType::Fluid);
            mass(x, y, z)  = rho;
            fill(x, y, z)  = 1.0;
            ids(x, y, z)   = -1.0;
            ++report.toLiquid;
         }
         else if (t == CellType::ToGas)
         {
            converted[bi].push_back({ { x, y, z }, mass(x, y, z) });
            flags(x, y, z) = lbm::flagValue(CellType::Gas);
            mass(x, y, z)  = 0.0;
            fill(x, y, z)  = 0.0;
            ++report.toGas;
         }
      });
   }
   exchange(storage, transport, gFlags, { lbm::fields::flags });

   // excess mass: equal shares to neighboring interface cells, pulled through the exchanged share field
   for (std::size_t bi = 0; bi < blocks.size(); ++bi)
   {
      Block* b    = blocks[bi];
      auto& flags = b->getField(lbm::fields::flags);
      auto& share = b->getField(fields::excess);
      auto& mass  = b->getField(fields::mass);
      auto& pdf   = b->getField(lbm::fields::pdf);
      share.fill(0.0);
      for (const auto& cv : converted[bi])
      {
         int n = 0;
         for (int a = 1; a < S::Q; ++a)
            if (flagAt(flags, cv.c.x + S::e[a][0], cv.c.y + S::e[a][1], cv.c.z + S::e[a][2]) == CellType::Interface) ++n;
         if (n > 0)
         {
            share(cv.c.x, cv.c.y, cv.c.z) = cv.excess / n;
            continue;
         }
         Cell target{};
         if (nearestInterface(flags, cv.c, target))
         {
            mass(target.x, target.y, target.z) += cv.excess;
            ++state.fallbackEvents;
         }
         else if (flagAt(flags, cv.c.x, cv.c.y, cv.c.z) == CellType::Fluid)
         {
            const double rho   = moments(pdf, cv.c.x, cv.c.y, cv.c.z).rho;
            const double scale = (rho + cv.excess) / rho;
            for (int a = 0; a < S::Q; ++a)
               pdf(cv.c.x, cv.c.y, cv.c.z, a) *= scale;
            mass(cv.c.x, cv.c.y, cv.c.z) = rho + cv.excess;
            ++state.fallbackEvents;
         }
         else
         {
            state.lostMass += cv.excess;
            ++state.lostMassEvents;
            std::clog << "blockforge: excess mass " << cv.excess << " of block " << b->id()
                      << " has no interface cell to go to\n";
         }
      }
   }
   exchange(storage, transport, 1, { fields::excess });

   for (Block* b : blocks)
   {
      const auto& flags = b->getField(lbm::fields::flags);
      const auto& share = b->getField(fields::excess);
      const auto& pdf   = b->getField(lbm::fields::pdf);
      auto& mass        = b->getField(fields::mass);
      auto& fill        = b->getField(fields::fill);
      forInterior(mass, [&](int x, int y, int z) {
         if (flagAt(flags, x, y, z) != CellType::Interface) return;
         double add = 0.0;
         for (int a = 1; a < S::Q; ++a)
            add += share(x + S::e[a][0], y + S::e[a][1], z + S::e[a][2]);
         mass(x, y, z) += add;
         fill(x, y, z) = mass(x, y, z) / moments(pdf, x, y, z).rho;
      });
   }
   return report;
}

} // namespace blockforge::freesurface
