//======================================================================================================================
//
//! \file FreeSurface.cpp
//
//======================================================================================================================
#include "Internal.h"

#include <cmath>
#include <limits>

namespace blockforge::freesurface {

using blockgrid::Block;
using blockgrid::BlockStorage;
using field::Field;
using namespace detail;

void FreeSurfaceParams::validate() const
{
   if (!(sigma >= 0.0)) throw FreeSurfaceError("surface tension must be non-negative");
   if (!(epsilon > 0.0 && epsilon < 0.5)) throw FreeSurfaceError("conversion epsilon must lie in (0, 0.5)");
   if (relabelInterval < 1) throw FreeSurfaceError("relabel interval must be >= 1");
}

void addFreeSurfaceFields(BlockStorage& storage, int worker, const FreeSurfaceParams& params)
{
   params.validate();
   const int g = params.ghostLayers();
   for (Block* block : storage.localBlocks(worker))
   {
      if (block->getField(lbm::fields::flags).ghostLayers() != g)
         throw FreeSurfaceError("flags need " + std::to_string(g) + " ghost layers for this surface tension");
      block->addField(fields::fill, 1, g).fill(1.0);
      block->addField(fields::mass, 1, 0);
      block->addField(fields::bubbleId, 1, 1).fill(-1.0);
      block->addField(fields::curvature, 1, 0);
      block->addField(fields::gasDensity, 1, 1).fill(std::numeric_limits<double>::quiet_NaN());
      block->addField(fields::excess, 1, 1);
   }
}

void exchangeFreeSurfaceFields(BlockStorage& storage, comms::Transport& transport, const FreeSurfaceParams& params)
{
   exchange(storage, transport, params.ghostLayers(), { fields::fill, lbm::fields::flags });
   exchange(storage, transport, 1, { fields::bubbleId });
}

void classifyCells(BlockStorage& storage, comms::Transport& transport, const FreeSurfaceParams& params)
{
   const auto blocks = storage.localBlocks(transport.rank());
   for (Block* b : blocks)
   {
      auto& fill  = b->getField(fields::fill);
      auto& flags = b->getField(lbm::fields::flags);
      forInterior(fill, [&](int x, int y, int z) {
         if (!isDomainCell(flagAt(flags, x, y, z))) return;
         double phi = fill(x, y, z);
         if (!(phi >= -1e-9 && phi <= 1.0 + 1e-9))
         {
            const auto gc = b->toGlobal(x, y, z);
            throw FreeSurfaceError("fill level " + std::to_string(phi) + " outside [0,1] at cell (" +
                                   std::to_string(gc[0]) + "," + std::to_string(gc[1]) + "," + std::to_string(gc[2]) +
                                   ")");
         }
         phi             = std::min(1.0, std::max(0.0, phi));
         fill(x, y, z)   = phi;
         flags(x, y, z)  = lbm::flagValue(phi >= 1.0 ? CellType::Fluid
                                                     : (phi <= 0.0 ? CellType::Gas : CellType::Interface));
      });
   }
   exchange(storage, transport, params.ghostLayers(), { fields::fill, lbm::fields::flags });

   for (Block* b : blocks)
   {
      auto& fill  = b->getField(fields::fill);
      auto& flags = b->getField(lbm::fields::flags);
      std::vector<std::array<int, 3>> close;
      forInterior(fill, [&](int x, int y, int z) {
         if (flagAt(flags, x, y, z) == CellType::Fluid &&
             anyNeighbor(flags, x, y, z, [](CellType t) { return t == CellType::Gas; }))
            close.push_back({ x, y, z });
      });
      for (const auto& c : close)
      {
         flags(c[0], c[1], c[2]) = lbm::flagValue(CellType::Interface);
         fill(c[0], c[1], c[2])  = 1.0;
      }
   }
   exchange(storage, transport, params.ghostLayers(), { fields::fill, lbm::fields::flags });
}

void initializeFreeSurface(BlockStorage& storage, FreeSurfaceState& state, comms::Transport& transport)
{
   state.params.validate();
   for (Block* b : storage.localBlocks(transport.rank()))
   {
      const auto& pdf   = b->getField(lbm::fields::pdf);
      const auto& flags = b->getField(lbm::fields::flags);
      auto& fill        = b->getField(fields::fill);
      auto& mass        = b->getField(fields::mass);
      b->getField(fields::bubbleId).fill(-1.0);
      forInterior(fill, [&](int x, int y, int z) {
         switch (flagAt(flags, x, y, z))
         {
         case CellType::Fluid:
            fill(x, y, z) = 1.0;
            mass(x, y, z) = moments(pdf, x, y, z).rho;
            break;
         case CellType::Interface: mass(x, y, z) = fill(x, y, z) * moments(pdf, x, y, z).rho; break;
         case CellType::Gas:
            fill(x, y, z) = 0.0;
            mass(x, y, z) = 0.0;
            break;
         default: mass(x, y, z) = 0.0;
         }
      });
   }
   state.bubbles = BubbleTable();
   relabelBubbles(storage, state, transport);
   exchangeFreeSurfaceFields(storage, transport, state.params);
}

double reconstructLink(int a, double fOpposite, double rhoGas, const Vec3& u)
{
   const int ia = S::inv[std::size_t(a)];
   return lbm::equilibriumComponent(S::w[std::size_t(a)], S::e[std::size_t(a)], rhoGas, u) +
          lbm::equilibriumComponent(S::w[std::size_t(ia)], S::e[std::size_t(ia)], rhoGas, u) - fOpposite;
}

std::vector<double> reconstructFreeBoundary(const std::vector<double>& f, const std::vector<bool>& gasUpstream,
                                            double rhoGas)
{
   if (f.size() != std::size_t(S::Q) || gasUpstream.size() != std::size_t(S::Q))
      throw FreeSurfaceError("reconstruction needs 19 PDFs and 19 link flags");
   const auto m = lbm::cellMoments<S>([&](int a) { return f[std::size_t(a)]; });
   std::vector<double> out = f;
   for (int a = 0; a < S::Q; ++a)
      if (gasUpstream[std::size_t(a)]) out[std::size_t(a)] = reconstructLink(a, f[std::size_t(S::inv[a])], rhoGas, m.u);
   return out;
}

void advectMass(Block& block)
{
   const auto& src   = block.getField(lbm::fields::pdf);
   const auto& dst   = block.getField(lbm::fields::pdfTmp);
   const auto& flags = block.getField(lbm::fields::flags);
   auto& fill        = block.getField(fields::fill);
   auto& mass        = block.getField(fields::mass);

   forInterior(mass, [&](int x, int y, int z) {
      if (flagAt(flags, x, y, z) != CellType::Interface) return;
      const double phiX = fill(x, y, z);
      double dm         = 0.0;
      for (int a = 1; a < S::Q; ++a)
      {
         const int nx = x + S::e[a][0], ny = y + S::e[a][1], nz = z + S::e[a][2];
         const int ia = S::inv[a];
         switch (flagAt(flags, nx, ny, nz))
         {
         case CellType::Fluid: dm += src(nx, ny, nz, ia) - src(x, y, z, a); break;
         case CellType::Interface:
            dm += (src(nx, ny, nz, ia) - src(x, y, z, a)) * (0.5 * (phiX + fill(nx, ny, nz)));
            break;
         case CellType::Gas: break;
         default: dm += dst(x, y, z, ia) - src(x, y, z, a); break; // boundary link
         }
      }
      mass(x, y, z) += dm;
   });
   forInterior(mass, [&](int x, int y, int z) {
      if (flagAt(flags, x, y, z) == CellType::Interface) fill(x, y, z) = mass(x, y, z) / moments(dst, x, y, z).rho;
   });
}

void fslbmTimestep(BlockStorage& storage, const lbm::TRTParams& trt, FreeSurfaceState& state,
                   comms::Transport& transport)
{
   const auto blocks = storage.localBlocks(transport.rank());
   exchangeFreeSurfaceFields(storage, transport, state.params);

   for (Block* b : blocks)
   {
      computeGasDensity(*b, state.bubbles);
      computeCurvature(*b, state.params);
      lbm::collideSweep(*b, trt, lbm::StencilKind::D3Q19);
   }

   exchange(storage, transport, 1, { lbm::fields::pdf });

   for (Block* b : blocks)
   {
      lbm::FreeBoundary fb;
      fb.gasDensity = &b->getField(fields::gasDensity);
      fb.curvature  = state.params.sigma > 0.0 ? &b->getField(fields::curvature) : nullptr;
      fb.sigma      = state.params.sigma;
      lbm::streamSweep(*b, lbm::StencilKind::D3Q19, &fb);
      advectMass(*b);
      lbm::swapPdfs(*b);
   }

   convertCells(storage, state, transport);
   ++state.step;
   updateBubbles(storage, state, transport);
}

double liquidMass(const BlockStorage& storage, int worker)
{
   double total = 0.0;
   for (const Block* b : storage.localBlocks(worker))
   {
      const auto& pdf   = b->getField(lbm::fields::pdf);
      const auto& flags = b->getField(lbm::fields::flags);
      const auto& mass  = b->getField(fields::mass);
      forInterior(mass, [&](int x, int y, int z) {
         const CellType t = flagAt(flags, x, y, z);
         if (t == CellType::Fluid) total += moments(pdf, x, y, z).rho;
         else if (t == CellType::Interface) total += mass(x, y, z);
      });
   }
   return total;
}

std::int64_t closedLayerViolations(const BlockStorage& storage, int worker, bool faceOnly)
{
   std::int64_t count = 0;
   for (const Block* b : storage.localBlocks(worker))
   {
      const auto& flags = b->getField(lbm::fields::flags);
      forInterior(flags, [&](int x, int y, int z) {
         if (flagAt(flags, x, y, z) != CellType::Fluid) return;
         const int last = faceOnly ? 7 : S::Q;
         for (int a = 1; a < last; ++a)
            if (flagAt(flags, x + S::e[a][0], y + S::e[a][1], z + S::e[a][2]) == CellType::Gas)
            {
               ++count;
               return;
            }
      });
   }
   return count;
}

} // namespace blockforge::freesurface
