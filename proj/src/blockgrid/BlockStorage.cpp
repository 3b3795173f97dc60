//======================================================================================================================
//
//! \file BlockStorage.cpp
//
//======================================================================================================================
#include "blockforge/blockgrid/BlockStorage.h"

#include <algorithm>
#include <numeric>

namespace blockforge::blockgrid {

field::Field& Block::addField(const std::string& name, int fSize, int ghostLayers, field::Layout layout,
                              std::size_t alignment)
{
   if (hasField(name)) throw BlockGridError("block " + std::to_string(id_) + ": field '" + name + "' already exists");
   const Vec3i s = size();
   auto [it, ok] = fields_.emplace(name, field::Field(name, { s[0], s[1], s[2], fSize }, ghostLayers, layout, alignment));
   return it->second;
}

field::Field& Block::getField(const std::string& name)
{
   auto it = fields_.find(name);
   if (it == fields_.end()) throw BlockGridError("block " + std::to_string(id_) + " has no field '" + name + "'");
   return it->second;
}

const field::Field& Block::getField(const std::string& name) const
{
   auto it = fields_.find(name);
   if (it == fields_.end()) throw BlockGridError("block " + std::to_string(id_) + " has no field '" + name + "'");
   return it->second;
}

std::vector<std::string> Block::fieldNames() const
{
   std::vector<std::string> names;
   for (const auto& [n, f] : fields_)
      names.push_back(n);
   return names;
}

std::vector<Block> decomposeDomain(const Vec3i& globalSize, const Vec3i& blockSize, const KeepPredicate& keep)
{
   for (int d = 0; d < 3; ++d)
   {
      if (globalSize[d] < 1 || blockSize[d] < 1) throw BlockGridError("domain and block extents must be positive");
      if (globalSize[d] % blockSize[d] != 0)
         throw BlockGridError("block size " + std::to_string(blockSize[d]) + " does not divide domain size " +
                              std::to_string(globalSize[d]) + " in dimension " + std::to_string(d));
   }
   const Vec3i n{ globalSize[0] / blockSize[0], globalSize[1] / blockSize[1], globalSize[2] / blockSize[2] };
   std::vector<Block> blocks;
   for (int bz = 0; bz < n[2]; ++bz)
      for (int by = 0; by < n[1]; ++by)
         for (int bx = 0; bx < n[0]; ++bx)
         {
            CellInterval ci;
            ci.min = { bx * blockSize[0], by * blockSize[1], bz * blockSize[2] };
            ci.max = { ci.min[0] + blockSize[0] - 1, ci.min[1] + blockSize[1] - 1, ci.min[2] + blockSize[2] - 1 };
            if (keep && !keep(ci)) continue;
            blocks.emplace_back(bx + n[0] * (by + n[1] * bz), ci);
         }
   return blocks;
}

std::map<int, int> assignBlocks(const std::vector<Block>& blocks, int workerCount, const WeightFunction& weight)
{
   if (workerCount < 1) throw BlockGridError("worker count must be >= 1");
   std::vector<std::pair<double, int>> order; // (weight, id)
   for (const auto& b : blocks)
      order.emplace_back(weight ? weight(b) : b.weight(), b.id());
   std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
   });

   std::vector<double> load(std::size_t(workerCount), 0.0);
   std::map<int, int> assignment;
   for (const auto& [w, id] : order)
   {
      const auto lightest = std::size_t(std::min_element(load.begin(), load.end()) - load.begin());
      load[lightest] += w;
      assignment[id] = int(lightest);
   }
   return assignment;
}

BlockStorage::BlockStorage(const Vec3i& globalSize, const Vec3i& blockSize, std::array<bool, 3> periodic,
                           int workerCount, const KeepPredicate& keep, const WeightFunction& weight)
   : globalSize_(globalSize), blockSize_(blockSize), periodic_(periodic), workerCount_(workerCount),
     blocks_(decomposeDomain(globalSize, blockSize, keep))
{
   if (weight)
      for (auto& b : blocks_)
         b.setWeight(weight(b));
   assignment_ = assignBlocks(blocks_, workerCount);
   for (std::size_t i = 0; i < blocks_.size(); ++i)
      indexById_[blocks_[i].id()] = i;
}

Vec3i BlockStorage::blockGridSize() const
{
   return { globalSize_[0] / blockSize_[0], globalSize_[1] / blockSize_[1], globalSize_[2] / blockSize_[2] };
}

int BlockStorage::ownerOf(int blockId) const
{
   auto it = assignment_.find(blockId);
   if (it == assignment_.end()) throw BlockGridError("unknown block id " + std::to_string(blockId));
   return it->second;
}

Block* BlockStorage::findBlock(int blockId)
{
   auto it = indexById_.find(blockId);
   return it == indexById_.end() ? nullptr : &blocks_[it->second];
}

const Block* BlockStorage::findBlock(int blockId) const
{
   auto it = indexById_.find(blockId);
   return it == indexById_.end() ? nullptr : &blocks_[it->second];
}

Vec3i BlockStorage::gridPosition(int blockId) const
{
   const Vec3i n = blockGridSize();
   return { blockId % n[0], (blockId / n[0]) % n[1], blockId / (n[0] * n[1]) };
}

const Block* BlockStorage::blockAtGridPosition(Vec3i pos) const
{
   const Vec3i n = blockGridSize();
   for (int d = 0; d < 3; ++d)
   {
      if (pos[d] < 0 || pos[d] >= n[d])
      {
         if (!periodic_[d]) return nullptr;
         pos[d] = ((pos[d] % n[d]) + n[d]) % n[d];
      }
   }
   return findBlock(pos[0] + n[0] * (pos[1] + n[1] * pos[2]));
}

const Block* BlockStorage::blockContaining(const Vec3i& cell) const
{
   for (int d = 0; d < 3; ++d)
      if (cell[d] < 0 || cell[d] >= globalSize_[d]) return nullptr;
   return blockAtGridPosition({ cell[0] / blockSize_[0], cell[1] / blockSize_[1], cell[2] / blockSize_[2] });
}

std::vector<Block*> BlockStorage::localBlocks(int worker)
{
   if (worker < 0 || worker >= workerCount_) throw BlockGridError("unknown worker id " + std::to_string(worker));
   std::vector<Block*> out;
   for (auto& b : blocks_)
      if (assignment_.at(b.id()) == worker) out.push_back(&b);
   return out;
}

std::vector<const Block*> BlockStorage::localBlocks(int worker) const
{
   if (worker < 0 || worker >= workerCount_) throw BlockGridError("unknown worker id " + std::to_string(worker));
   std::vector<const Block*> out;
   for (const auto& b : blocks_)
      if (assignment_.at(b.id()) == worker) out.push_back(&b);
   return out;
}

void BlockStorage::addFieldToLocalBlocks(int worker, const std::string& name, int fSize, int ghostLayers,
                                         field::Layout layout, std::size_t alignment)
{
   for (Block* b : localBlocks(worker))
      b->addField(name, fSize, ghostLayers, layout, alignment);
}

std::vector<Block*> localBlocks(BlockStorage& storage, int worker)
{
   return storage.localBlocks(worker);
}

} // namespace blockforge::blockgrid
