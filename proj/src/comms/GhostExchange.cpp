//======================================================================================================================
//
//! \file GhostExchange.cpp
//
//======================================================================================================================
#include "blockforge/comms/GhostExchange.h"

#include <map>

namespace blockforge::comms {

using blockgrid::Block;
using blockgrid::BlockStorage;
using blockgrid::Vec3i;

ExchangePlan::ExchangePlan(const BlockStorage& storage, int worker, int ghostLayers)
   : worker_(worker), ghost_(ghostLayers)
{
   if (ghostLayers < 1) throw CommsError("ghost exchange needs at least one ghost layer");
   for (int d = 0; d < 3; ++d)
      if (storage.blockSize()[d] < ghostLayers)
         throw CommsError("block extent smaller than ghost layer count");

   const int g = ghostLayers;
   for (const Block* block : storage.localBlocks(worker))
   {
      const Vec3i pos = storage.gridPosition(block->id());
      const Vec3i n   = block->size();
      for (int axis = 0; axis < 3; ++axis)
         for (int dir : { -1, +1 })
         {
            Vec3i npos = pos;
            npos[axis] += dir;
            const Block* peer = storage.blockAtGridPosition(npos);
            if (!peer) continue;

            ExchangeLink link;
            link.blockId     = block->id();
            link.axis        = axis;
            link.direction   = dir;
            link.peerBlockId = peer->id();
            link.peerWorker  = storage.ownerOf(peer->id());
            for (int d = 0; d < 3; ++d)
            {
               if (d == axis)
               {
                  link.sendInterval[d]    = dir > 0 ? field::Range{ n[d] - g, n[d] } : field::Range{ 0, g };
                  link.receiveInterval[d] = dir > 0 ? field::Range{ n[d], n[d] + g } : field::Range{ -g, 0 };
               }
               else
               {
                  link.sendInterval[d]    = { -g, n[d] + g };
                  link.receiveInterval[d] = { -g, n[d] + g };
               }
            }
            links_.push_back(link);
         }
   }
}

std::vector<const ExchangeLink*> ExchangePlan::linksOfAxis(int axis) const
{
   std::vector<const ExchangeLink*> out;
   for (const auto& l : links_)
      if (l.axis == axis) out.push_back(&l);
   return out;
}

Tag exchangeTag(int receiverBlockId, int axis, int direction, const std::vector<std::string>& fieldNames)
{
   std::uint64_t h = 1469598103934665603ull;
   auto mix        = [&h](std::uint64_t v) {
      for (int i = 0; i < 8; ++i)
      {
         h ^= (v >> (8 * i)) & 0xffu;
         h *= 1099511628211ull;
      }
   };
   mix(std::uint64_t(receiverBlockId));
   mix(std::uint64_t(axis));
   mix(std::uint64_t(direction + 1));
   for (const auto& name : fieldNames)
   {
      for (char c : name)
         mix(std::uint64_t(static_cast<unsigned char>(c)));
      mix(0xffu);
   }
   return h & ~(Tag(1) << 63);
}

namespace {

void packSlab(const Block& block, const std::vector<std::string>& names, const field::Interval4& iv, Bytes& out)
{
   for (const auto& name : names)
   {
      const auto& f = block.getField(name);
      const std::size_t start = out.size();
      const std::size_t count =
         std::size_t(iv[0].size()) * std::size_t(iv[1].size()) * std::size_t(iv[2].size()) * std::size_t(f.fSize());
      out.resize(start + count * sizeof(double));
      auto* dst = reinterpret_cast<double*>(out.data() + start);
      for (int z = iv[2].begin; z < iv[2].end; ++z)
         for (int y = iv[1].begin; y < iv[1].end; ++y)
            for (int x = iv[0].begin; x < iv[0].end; ++x)
               for (int q = 0; q < f.fSize(); ++q)
                  *dst++ = f(x, y, z, q);
   }
}

void unpackSlab(Block& block, const std::vector<std::string>& names, const field::Interval4& iv, const Bytes& in)
{
   const auto* src = reinterpret_cast<const double*>(in.data());
   std::size_t expected = 0;
   for (const auto& name : names)
      expected += std::size_t(iv[0].size()) * std::size_t(iv[1].size()) * std::size_t(iv[2].size()) *
                  std::size_t(block.getField(name).fSize());
   if (in.size() != expected * sizeof(double)) throw CommsError("ghost slab size mismatch");

   for (const auto& name : names)
   {
      auto& f = block.getField(name);
      for (int z = iv[2].begin; z < iv[2].end; ++z)
         for (int y = iv[1].begin; y < iv[1].end; ++y)
            for (int x = iv[0].begin; x < iv[0].end; ++x)
               for (int q = 0; q < f.fSize(); ++q)
                  f(x, y, z, q) = *src++;
   }
}

} // namespace

void exchangeGhostLayers(const ExchangePlan& plan, BlockStorage& storage, const std::vector<std::string>& fieldNames,
                         Transport& transport)
{
   for (Block* block : storage.localBlocks(plan.worker()))
      for (const auto& name : fieldNames)
      {
         if (!block->hasField(name))
            throw CommsError("ghost exchange: block " + std::to_string(block->id()) + " lacks field '" + name + "'");
         if (block->getField(name).ghostLayers() != plan.ghostLayers())
            throw CommsError("ghost exchange: field '" + name + "' has " +
                             std::to_string(block->getField(name).ghostLayers()) + " ghost layers, plan expects " +
                             std::to_string(plan.ghostLayers()));
      }

   for (int axis = 0; axis < 3; ++axis)
   {
      const auto links = plan.linksOfAxis(axis);
      std::map<Tag, Bytes> localMessages;

      for (const ExchangeLink* link : links)
      {
         const Block& block = *storage.findBlock(link->blockId);
         Bytes slab;
         packSlab(block, fieldNames, link->sendInterval, slab);
         // the peer receives into its ghost side facing us
         const Tag tag = exchangeTag(link->peerBlockId, axis, -link->direction, fieldNames);
         if (link->peerWorker == plan.worker())
            localMessages[tag] = std::move(slab);
         else
            transport.send(link->peerWorker, tag, std::move(slab));
      }

      for (const ExchangeLink* link : links)
      {
         Block& block  = *storage.findBlock(link->blockId);
         const Tag tag = exchangeTag(link->blockId, axis, link->direction, fieldNames);
         if (link->peerWorker == plan.worker())
         {
            auto it = localMessages.find(tag);
            if (it == localMessages.end()) throw CommsError("ghost exchange: missing local slab");
            unpackSlab(block, fieldNames, link->receiveInterval, it->second);
         }
         else
            unpackSlab(block, fieldNames, link->receiveInterval, transport.recv(link->peerWorker, tag));
      }
   }
}

} // namespace blockforge::comms
