//======================================================================================================================
//
//! \file FreeSurface.h
//! \brief Free-surface extension: fill levels, interface layer, free boundary, mass advection, conversion, bubbles.
//
//======================================================================================================================
#pragma once

#include "blockforge/blockgrid/BlockStorage.h"
#include "blockforge/comms/Transport.h"
#include "blockforge/lbm/Sweeps.h"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockforge::freesurface {

using lbm::CellType;
using lbm::Vec3;

class FreeSurfaceError : public std::runtime_error
{
 public:
   using std::runtime_error::runtime_error;
};

namespace fields {
inline const std::string fill       = "fill";
inline const std::string mass       = "mass";
inline const std::string bubbleId   = "bubble_id";   //!< bubble label of Gas and Interface cells, -1 elsewhere
inline const std::string curvature  = "curvature";
inline const std::string gasDensity = "gas_density"; //!< V0/V of the bubble owning a Gas/Interface cell, NaN elsewhere
inline const std::string excess     = "fs_excess";   //!< per-neighbor share of excess mass during conversion
} // namespace fields

struct FreeSurfaceParams
{
   double sigma       = 0.0;  //!< lattice surface tension
   double epsilon     = 1e-2; //!< conversion threshold
   int relabelInterval = 100;

   /// Ghost layers of fill and flags: the curvature stencil reaches two cells.
   int ghostLayers() const { return sigma > 0.0 ? 2 : 1; }
   void validate() const;
};

struct Bubble
{
   double V0 = 0.0;
   double V  = 0.0;

   double pressure() const { return V0 / V; }
};

//**********************************************************************************************************************
/*!
 *  Bubble bookkeeping, replicated on every worker. All workers apply the same collective updates, so the tables stay
 *  identical.
 */
//**********************************************************************************************************************
class BubbleTable
{
 public:
   std::map<int, Bubble>& bubbles() { return bubbles_; }
   const std::map<int, Bubble>& bubbles() const { return bubbles_; }

   bool contains(int id) const { return bubbles_.count(id) != 0; }
   Bubble& at(int id);
   const Bubble& at(int id) const;
   int add(double V0, double V);
   int nextId() const { return nextId_; }
   void setNextId(int id) { nextId_ = id; }

   /// Merges `other` into `winner`: V0 and V are summed.
   void merge(int winner, int other);

   double totalVolume() const;

   comms::Bytes serialize() const;
   static BubbleTable deserialize(const comms::Bytes& bytes);

 private:
   std::map<int, Bubble> bubbles_;
   int nextId_ = 0;
};

struct FreeSurfaceState
{
   FreeSurfaceParams params;
   BubbleTable bubbles;
   std::int64_t step = 0;             //!< number of completed free surface timesteps
   std::int64_t fallbackEvents = 0;   //!< excess mass placed on a non-neighboring interface cell
   std::int64_t lostMassEvents = 0;   //!< excess mass without any interface cell in the block
   double lostMass = 0.0;
};

/// Adds fill, mass, bubble_id, curvature, gas_density and fs_excess to the worker's blocks. The LBM fields have to
/// exist already, with params.ghostLayers() ghost layers on the flags.
void addFreeSurfaceFields(blockgrid::BlockStorage& storage, int worker, const FreeSurfaceParams& params);

/// Sets flags of domain cells (Fluid/Gas/Interface) from the fill level and closes the interface layer: Fluid cells
/// with a Gas cell in their stencil neighborhood become Interface (fill 1).
void classifyCells(blockgrid::BlockStorage& storage, comms::Transport& transport, const FreeSurfaceParams& params);

/// After classification and PDF initialization: mass from fill and density, initial bubble labels (V0 = V).
void initializeFreeSurface(blockgrid::BlockStorage& storage, FreeSurfaceState& state, comms::Transport& transport);

struct InterfaceGeometry
{
   Vec3 normal{ 0.0, 0.0, 1.0 };
   double curvature = 0.0;
   bool degenerate  = false;
};

/// Normal n = -grad(phi)/|grad(phi)| (Parker-Youngs weights) and curvature div(n) (central differences) at a cell.
/// Needs two synchronized ghost layers of fill and flags near block borders.
InterfaceGeometry interfaceGeometry(const field::Field& fill, const field::Field& flags, int x, int y, int z);

/// Curvature of all Interface cells (zero elsewhere); with sigma == 0 the field is just zeroed.
void computeCurvature(blockgrid::Block& block, const FreeSurfaceParams& params);

/// Fills gas_density (ghost layers included) from bubble_id and the bubble table.
void computeGasDensity(blockgrid::Block& block, const BubbleTable& table);

/// Free boundary condition for one link: f_a = f_a^eq(rhoG,u) + f_inv(a)^eq(rhoG,u) - f_inv(a).
double reconstructLink(int a, double fOpposite, double rhoGas, const Vec3& u);

/// One-cell reconstruction: every direction whose upstream cell is gas (gasUpstream[a]) is replaced.
std::vector<double> reconstructFreeBoundary(const std::vector<double>& f, const std::vector<bool>& gasUpstream,
                                            double rhoGas);

/// Mass exchange of Interface cells from the post-collision PDFs (pdf) and the streamed PDFs (pdf_tmp); updates mass
/// and sets fill = mass / rho on Interface cells.
void advectMass(blockgrid::Block& block);

struct ConversionReport
{
   std::int64_t toLiquid = 0;
   std::int64_t toGas    = 0;
   std::int64_t newInterface = 0;
};

/// Interface cells crossing 1+eps / -eps become Fluid / Gas, neighbors are converted to keep the interface closed and
/// excess mass is distributed to neighboring Interface cells. Collective. Returns the counts of this worker.
ConversionReport convertCells(blockgrid::BlockStorage& storage, FreeSurfaceState& state, comms::Transport& transport);

/// Merges touching bubbles, refreshes bubble volumes and relabels every relabelInterval steps. Collective.
void updateBubbles(blockgrid::BlockStorage& storage, FreeSurfaceState& state, comms::Transport& transport);

/// Global 6-connected relabeling of Gas and Interface cells, gathered on the root worker. Collective.
void relabelBubbles(blockgrid::BlockStorage& storage, FreeSurfaceState& state, comms::Transport& transport);

/// Per bubble: number of Gas cells + sum of (1 - fill) over Interface cells, computed from the local blocks.
std::map<int, double> localBubbleVolumes(const blockgrid::BlockStorage& storage, int worker);

/// exchange -> curvature -> collide -> exchange(pdf) -> stream with free boundary -> advect_mass -> swap ->
/// convert_cells -> update_bubbles.
void fslbmTimestep(blockgrid::BlockStorage& storage, const lbm::TRTParams& trt, FreeSurfaceState& state,
                   comms::Transport& transport);

/// Synchronizes fill, flags and bubble_id ghost layers.
void exchangeFreeSurfaceFields(blockgrid::BlockStorage& storage, comms::Transport& transport,
                               const FreeSurfaceParams& params);

// diagnostics (local to the worker's blocks)

/// Sum of rho over Fluid cells plus mass over Interface cells.
double liquidMass(const blockgrid::BlockStorage& storage, int worker);

/// Fluid cells that touch a Gas cell, through faces only (faceOnly) or through any stencil link. Needs synchronized
/// flag ghost layers.
std::int64_t closedLayerViolations(const blockgrid::BlockStorage& storage, int worker, bool faceOnly = true);

} // namespace blockforge::freesurface
