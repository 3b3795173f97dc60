//======================================================================================================================
//
//! \file GhostExchange.h
//! \brief Ghost layer synchronization between neighboring blocks by three sequential axis sweeps.
//
//======================================================================================================================
#pragma once

#include "blockforge/blockgrid/BlockStorage.h"
#include "blockforge/comms/Transport.h"
#include "blockforge/field/FieldView.h"

#include <string>
#include <vector>

namespace blockforge::comms {

/// One face link of a local block. Intervals are in the local coordinates of the respective block.
struct ExchangeLink
{
   int blockId   = -1;
   int axis      = 0;
   int direction = 0; //!< -1 or +1: side of `blockId` this link belongs to
   int peerBlockId  = -1;
   int peerWorker   = -1;
   field::Interval4 sendInterval;    //!< interior slab of `blockId` sent to the peer (f range left open)
   field::Interval4 receiveInterval; //!< ghost slab of `blockId` filled by the peer
};

//**********************************************************************************************************************
/*!
 *  Links of all local blocks for ghost width g. The send slab spans the full allocated extent (ghosts included) of
 *  the two non-sweep axes, so after the x, y and z sweeps edge and corner ghosts hold the diagonal neighbor's data.
 *  Faces without neighbor (domain border without periodicity, discarded block) have no link.
 */
//**********************************************************************************************************************
class ExchangePlan
{
 public:
   ExchangePlan(const blockgrid::BlockStorage& storage, int worker, int ghostLayers);

   int ghostLayers() const { return ghost_; }
   int worker() const { return worker_; }
   const std::vector<ExchangeLink>& links() const { return links_; }
   std::vector<const ExchangeLink*> linksOfAxis(int axis) const;

 private:
   int worker_;
   int ghost_;
   std::vector<ExchangeLink> links_;
};

/// Deterministic message tag of the slab that fills ghost side (axis, direction) of block `receiverBlockId`.
Tag exchangeTag(int receiverBlockId, int axis, int direction, const std::vector<std::string>& fieldNames);

void exchangeGhostLayers(const ExchangePlan& plan, blockgrid::BlockStorage& storage,
                         const std::vector<std::string>& fieldNames, Transport& transport);

} // namespace blockforge::comms
