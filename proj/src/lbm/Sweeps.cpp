//======================================================================================================================
//
//! \file Sweeps.cpp
//
//======================================================================================================================
#include "blockforge/lbm/Sweeps.h"

#include "blockforge/comms/GhostExchange.h"

#include <cmath>

namespace blockforge::lbm {

using blockgrid::Block;
using field::Field;

const char* cellTypeName(CellType t)
{
   switch (t)
   {
   case CellType::Fluid: return "Fluid";
   case CellType::NoSlip: return "NoSlip";
   case CellType::Pressure: return "Pressure";
   case CellType::Velocity: return "Velocity";
   case CellType::Gas: return "Gas";
   case CellType::Interface: return "Interface";
   case CellType::Obstacle: return "Obstacle";
   case CellType::ToLiquid: return "ToLiquid";
   case CellType::ToGas: return "ToGas";
   }
   return "Unknown";
}

void addLbmFields(blockgrid::BlockStorage& storage, int worker, const LbmFieldConfig& config)
{
   const int Q = makeStencil(config.stencil).Q;
   for (Block* block : storage.localBlocks(worker))
   {
      block->addField(fields::pdf, Q, 1, config.layout, config.alignment);
      block->addField(fields::pdfTmp, Q, 1, config.layout, config.alignment);
      auto& flags = block->addField(fields::flags, 1, config.flagGhostLayers);
      block->addField(fields::boundary, 4, 1);
      block->addField(fields::density, 1, 0);
      block->addField(fields::velocity, 3, 0);

      flags.fill(flagValue(CellType::NoSlip));
      for (int z = 0; z < flags.zSize(); ++z)
         for (int y = 0; y < flags.ySize(); ++y)
            for (int x = 0; x < flags.xSize(); ++x)
               flags(x, y, z) = flagValue(CellType::Fluid);
      initializeEquilibrium(*block, config.stencil, 1.0, { 0, 0, 0 });
   }
}

void setEquilibrium(Block& block, StencilKind kind, int x, int y, int z, double rho, const Vec3& u)
{
   auto& pdf = block.getField(fields::pdf);
   dispatchStencil(kind, [&](auto s) {
      using S = decltype(s);
      for (int a = 0; a < S::Q; ++a)
         pdf(x, y, z, a) = equilibriumComponent(S::w[a], S::e[a], rho, u);
   });
}

void initializeEquilibrium(Block& block, StencilKind kind, double rho, const Vec3& u)
{
   auto& pdf = block.getField(fields::pdf);
   const int g = pdf.ghostLayers();
   for (int z = -g; z < pdf.zSize() + g; ++z)
      for (int y = -g; y < pdf.ySize() + g; ++y)
         for (int x = -g; x < pdf.xSize() + g; ++x)
            setEquilibrium(block, kind, x, y, z, rho, u);
}

// ---------------------------------------------------------------------------------------------------------------------
//   Collision
// ---------------------------------------------------------------------------------------------------------------------

namespace {

template <typename S>
void collideKernel(Field& pdf, const Field& flags, const TRTParams& p)
{
   const double we = p.omegaEven, wo = p.omegaOdd;
   double f[S::Q];
   double feq[S::Q];
   for (int z = 0; z < pdf.zSize(); ++z)
      for (int y = 0; y < pdf.ySize(); ++y)
         for (int x = 0; x < pdf.xSize(); ++x)
         {
            if (!isLbmCell(cellType(flags(x, y, z)))) continue;
            for (int a = 0; a < S::Q; ++a)
               f[a] = pdf(x, y, z, a);
            const Macroscopic m = cellMoments<S>([&](int a) { return f[a]; });
            for (int a = 0; a < S::Q; ++a)
               feq[a] = equilibriumComponent(S::w[a], S::e[a], m.rho, m.u);
            for (int a = 0; a < S::Q; ++a)
            {
               const int ia         = S::inv[a];
               const double fPlus   = 0.5 * (f[a] + f[ia]);
               const double fMinus  = 0.5 * (f[a] - f[ia]);
               const double eqPlus  = 0.5 * (feq[a] + feq[ia]);
               const double eqMinus = 0.5 * (feq[a] - feq[ia]);
               pdf(x, y, z, a)      = f[a] - we * (fPlus - eqPlus) - wo * (fMinus - eqMinus);
            }
         }
}

// ---------------------------------------------------------------------------------------------------------------------
//   Streaming and boundary links
// ---------------------------------------------------------------------------------------------------------------------

template <typename S, bool Stream, bool Boundaries>
void streamKernel(const Field& src, Field& dst, const Field& flags, const Field* boundary, const FreeBoundary* fb)
{
   for (int z = 0; z < src.zSize(); ++z)
      for (int y = 0; y < src.ySize(); ++y)
         for (int x = 0; x < src.xSize(); ++x)
         {
            const CellType self = cellType(flags(x, y, z));
            if (!isLbmCell(self)) continue;

            bool haveMoments = false;
            Macroscopic m;
            auto moments = [&]() -> const Macroscopic& {
               if (!haveMoments)
               {
                  m           = cellMoments<S>([&](int a) { return src(x, y, z, a); });
                  haveMoments = true;
               }
               return m;
            };

            for (int a = 0; a < S::Q; ++a)
            {
               const int ux = x - S::e[a][0], uy = y - S::e[a][1], uz = z - S::e[a][2];
               const CellType up = cellType(flags(ux, uy, uz));
               if (isLbmCell(up) || up == CellType::ToLiquid || up == CellType::ToGas)
               {
                  if constexpr (Stream) dst(x, y, z, a) = src(ux, uy, uz, a);
                  continue;
               }
               if constexpr (!Boundaries) continue;

               const int ia = S::inv[a];
               switch (up)
               {
               case CellType::NoSlip:
               case CellType::Obstacle:
                  dst(x, y, z, a) = src(x, y, z, ia);
                  break;
               case CellType::Velocity: {
                  const double eu = S::e[a][0] * (*boundary)(ux, uy, uz, 1) + S::e[a][1] * (*boundary)(ux, uy, uz, 2) +
                                    S::e[a][2] * (*boundary)(ux, uy, uz, 3);
                  dst(x, y, z, a) = src(x, y, z, ia) + 6.0 * S::w[a] * eu;
                  break;
               }
               case CellType::Pressure: {
                  const double rhoW = (*boundary)(ux, uy, uz, 0);
                  dst(x, y, z, a)   = -src(x, y, z, ia) + 2.0 * equilibriumEven(S::w[a], S::e[a], rhoW, moments().u);
                  break;
               }
               case CellType::Gas: {
                  if (!fb || !fb->gasDensity)
                     throw LbmError("cell streams from a Gas cell but no free boundary treatment is active");
                  double rhoGas = (*fb->gasDensity)(ux, uy, uz);
                  if (std::isnan(rhoGas)) throw LbmError("Gas neighbor without bubble id");
                  if (fb->curvature && fb->sigma != 0.0) rhoGas += 3.0 * fb->sigma * (*fb->curvature)(x, y, z);
                  dst(x, y, z, a) = -src(x, y, z, ia) + 2.0 * equilibriumEven(S::w[a], S::e[a], rhoGas, moments().u);
                  break;
               }
               default:
                  throw LbmError(std::string("unknown upstream flag ") + cellTypeName(up));
               }
            }
         }
}

} // namespace

void collideSweep(Block& block, const TRTParams& params, StencilKind kind)
{
   auto& pdf         = block.getField(fields::pdf);
   const auto& flags = block.getField(fields::flags);
   dispatchStencil(kind, [&](auto s) { collideKernel<decltype(s)>(pdf, flags, params); });
}

void streamPull(const Field& src, Field& dst, const Field& flags, StencilKind kind)
{
   if (&src == &dst) throw LbmError("streamPull needs distinct source and destination fields");
   dispatchStencil(kind, [&](auto s) { streamKernel<decltype(s), true, false>(src, dst, flags, nullptr, nullptr); });
}

void applyBoundaries(Field& dst, const Field& src, const Field& flags, const Field& boundary, StencilKind kind,
                     const FreeBoundary* freeBoundary)
{
   dispatchStencil(kind,
                   [&](auto s) { streamKernel<decltype(s), false, true>(src, dst, flags, &boundary, freeBoundary); });
}

void streamSweep(Block& block, StencilKind kind, const FreeBoundary* freeBoundary)
{
   const auto& src      = block.getField(fields::pdf);
   auto& dst            = block.getField(fields::pdfTmp);
   const auto& flags    = block.getField(fields::flags);
   const auto& boundary = block.getField(fields::boundary);
   dispatchStencil(kind,
                   [&](auto s) { streamKernel<decltype(s), true, true>(src, dst, flags, &boundary, freeBoundary); });
}

void swapPdfs(Block& block)
{
   block.getField(fields::pdf).swapBuffers(block.getField(fields::pdfTmp));
}

void computeMacroscopic(Block& block, StencilKind kind)
{
   const auto& pdf   = block.getField(fields::pdf);
   const auto& flags = block.getField(fields::flags);
   auto& rho         = block.getField(fields::density);
   auto& vel         = block.getField(fields::velocity);
   dispatchStencil(kind, [&](auto s) {
      using S = decltype(s);
      for (int z = 0; z < pdf.zSize(); ++z)
         for (int y = 0; y < pdf.ySize(); ++y)
            for (int x = 0; x < pdf.xSize(); ++x)
            {
               if (!isLbmCell(cellType(flags(x, y, z))))
               {
                  rho(x, y, z) = 0.0;
                  for (int d = 0; d < 3; ++d)
                     vel(x, y, z, d) = 0.0;
                  continue;
               }
               const Macroscopic m = cellMoments<S>([&](int a) { return pdf(x, y, z, a); });
               rho(x, y, z)        = m.rho;
               for (int d = 0; d < 3; ++d)
                  vel(x, y, z, d) = m.u[std::size_t(d)];
            }
   });
}

void lbmTimestep(blockgrid::BlockStorage& storage, const TRTParams& params, comms::Transport& transport,
                 StencilKind kind)
{
   const auto blocks = storage.localBlocks(transport.rank());
   for (Block* b : blocks)
      collideSweep(*b, params, kind);

   const comms::ExchangePlan plan(storage, transport.rank(), 1);
   comms::exchangeGhostLayers(plan, storage, { fields::pdf }, transport);

   for (Block* b : blocks)
      streamSweep(*b, kind);
   for (Block* b : blocks)
      swapPdfs(*b);
}

void exchangeBoundarySetup(blockgrid::BlockStorage& storage, comms::Transport& transport)
{
   const auto blocks = storage.localBlocks(transport.rank());
   // a worker without blocks has no links, so its ghost count is irrelevant
   const int flagGhosts = blocks.empty() ? 1 : blocks.front()->getField(fields::flags).ghostLayers();
   const comms::ExchangePlan flagPlan(storage, transport.rank(), flagGhosts);
   comms::exchangeGhostLayers(flagPlan, storage, { fields::flags }, transport);
   const comms::ExchangePlan plan(storage, transport.rank(), 1);
   comms::exchangeGhostLayers(plan, storage, { fields::boundary }, transport);
}

} // namespace blockforge::lbm
