//======================================================================================================================
//
//! \file Sweeps.h
//! \brief Block sweeps of the lattice Boltzmann scheme (collide, pull-stream, boundary links) and the timestep.
//
//======================================================================================================================
#pragma once

#include "blockforge/blockgrid/BlockStorage.h"
#include "blockforge/comms/Transport.h"
#include "blockforge/lbm/LatticeModel.h"

#include <string>

namespace blockforge::lbm {

//! Cell tags stored (as small integers) in the "flags" field. ToLiquid/ToGas only appear transiently while the free
//! surface conversion runs.
enum class CellType : int { Fluid = 0, NoSlip = 1, Pressure = 2, Velocity = 3, Gas = 4, Interface = 5, Obstacle = 6,
                            ToLiquid = 7, ToGas = 8 };

const char* cellTypeName(CellType t);

inline CellType cellType(double flag) { return CellType(int(flag)); }
inline double flagValue(CellType t) { return double(int(t)); }
inline bool isLbmCell(CellType t) { return t == CellType::Fluid || t == CellType::Interface; }

namespace fields {
inline const std::string pdf      = "pdf";
inline const std::string pdfTmp   = "pdf_tmp";
inline const std::string flags    = "flags";
inline const std::string boundary = "boundary"; //!< (rho_w, u_w) of Pressure/Velocity cells
inline const std::string density  = "density";
inline const std::string velocity = "velocity";
} // namespace fields

struct LbmFieldConfig
{
   StencilKind stencil = StencilKind::D3Q19;
   field::Layout layout = field::Layout::AoS;
   std::size_t alignment = 8;
   int flagGhostLayers   = 1;
};

/// Adds pdf, pdf_tmp, flags, boundary, density and velocity to the worker's blocks. Flags start as Fluid inside and
/// NoSlip in the ghost layers; PDFs start at the rest equilibrium with density 1.
void addLbmFields(blockgrid::BlockStorage& storage, int worker, const LbmFieldConfig& config);

void setEquilibrium(blockgrid::Block& block, StencilKind kind, int x, int y, int z, double rho, const Vec3& u);
void initializeEquilibrium(blockgrid::Block& block, StencilKind kind, double rho, const Vec3& u);

/// TRT collision in place on `pdf` for all Fluid and Interface cells.
void collideSweep(blockgrid::Block& block, const TRTParams& params, StencilKind kind);

/// Inputs of the free boundary reconstruction inside the stream sweep.
struct FreeBoundary
{
   const field::Field* gasDensity = nullptr; //!< rho of the bubble owning each Gas cell (NaN: no bubble)
   const field::Field* curvature  = nullptr; //!< interface curvature, may be null when sigma == 0
   double sigma = 0.0;
};

/// Pull streaming of Fluid/Interface cells from streamable upstream cells: dst(x,a) = src(x - e_a, a).
void streamPull(const field::Field& src, field::Field& dst, const field::Field& flags, StencilKind kind);

/// Boundary links of Fluid/Interface cells: bounce-back (NoSlip, Obstacle), moving wall (Velocity), anti-bounce-back
/// (Pressure) and, with `freeBoundary`, reconstruction of links coming from Gas cells.
void applyBoundaries(field::Field& dst, const field::Field& src, const field::Field& flags,
                     const field::Field& boundary, StencilKind kind, const FreeBoundary* freeBoundary = nullptr);

/// Fused streamPull + applyBoundaries from pdf into pdf_tmp.
void streamSweep(blockgrid::Block& block, StencilKind kind, const FreeBoundary* freeBoundary = nullptr);

void swapPdfs(blockgrid::Block& block);

/// Fills density and velocity from pdf for Fluid/Interface cells (zero elsewhere).
void computeMacroscopic(blockgrid::Block& block, StencilKind kind);

/// One lattice timestep on all local blocks: collide, exchange pdf ghosts, stream + boundaries, swap.
void lbmTimestep(blockgrid::BlockStorage& storage, const TRTParams& params, comms::Transport& transport,
                 StencilKind kind = StencilKind::D3Q19);

/// Synchronizes flags and boundary values; needed once after the domain has been initialized.
void exchangeBoundarySetup(blockgrid::BlockStorage& storage, comms::Transport& transport);

} // namespace blockforge::lbm
