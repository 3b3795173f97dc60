//======================================================================================================================
//
//! \file BlockStorage.h
//! \brief Uniform block decomposition of the global cell domain, load-weighted block assignment and per-block fields.
//
//======================================================================================================================
#pragma once

#include "blockforge/field/Field.h"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockforge::blockgrid {

using Vec3i = std::array<int, 3>;

class BlockGridError : public std::runtime_error
{
 public:
   using std::runtime_error::runtime_error;
};

/// Axis aligned cell box, both bounds inclusive.
struct CellInterval
{
   Vec3i min{};
   Vec3i max{};

   int size(int d) const { return max[d] - min[d] + 1; }
   Vec3i sizes() const { return { size(0), size(1), size(2) }; }
   std::int64_t numCells() const { return std::int64_t(size(0)) * size(1) * size(2); }
   bool contains(const Vec3i& c) const
   {
      return c[0] >= min[0] && c[0] <= max[0] && c[1] >= min[1] && c[1] <= max[1] && c[2] >= min[2] && c[2] <= max[2];
   }
   bool empty() const { return min[0] > max[0] || min[1] > max[1] || min[2] > max[2]; }
   bool operator==(const CellInterval&) const = default;
};

class Block
{
 public:
   Block(int id, const CellInterval& interval) : id_(id), interval_(interval) {}

   int id() const { return id_; }
   const CellInterval& interval() const { return interval_; }
   Vec3i size() const { return interval_.sizes(); }

   double weight() const { return weight_; }
   void setWeight(double w) { weight_ = w; }

   /// Allocates a field whose spatial extents equal the block extents.
   field::Field& addField(const std::string& name, int fSize, int ghostLayers,
                          field::Layout layout = field::Layout::AoS, std::size_t alignment = 8);

   bool hasField(const std::string& name) const { return fields_.count(name) != 0; }
   field::Field& getField(const std::string& name);
   const field::Field& getField(const std::string& name) const;
   field::Field& operator[](const std::string& name) { return getField(name); }

   std::vector<std::string> fieldNames() const;
   std::map<std::string, field::Field>& fields() { return fields_; }
   const std::map<std::string, field::Field>& fields() const { return fields_; }

   Vec3i toGlobal(int x, int y, int z) const { return { interval_.min[0] + x, interval_.min[1] + y, interval_.min[2] + z }; }
   Vec3i toLocal(const Vec3i& g) const { return { g[0] - interval_.min[0], g[1] - interval_.min[1], g[2] - interval_.min[2] }; }

 private:
   int id_;
   CellInterval interval_;
   double weight_ = 1.0;
   std::map<std::string, field::Field> fields_;
};

using KeepPredicate = std::function<bool(const CellInterval&)>;
using WeightFunction = std::function<double(const Block&)>;

/// Splits the global domain into equally sized blocks; block ids are the linear block-grid positions (x fastest).
std::vector<Block> decomposeDomain(const Vec3i& globalSize, const Vec3i& blockSize, const KeepPredicate& keep = {});

/// Greedy longest-processing-time assignment. Returns block id -> worker id.
std::map<int, int> assignBlocks(const std::vector<Block>& blocks, int workerCount, const WeightFunction& weight = {});

//**********************************************************************************************************************
/*!
 *  Block metadata (decomposition, assignment, periodicity) plus the blocks themselves. Every worker holds its own
 *  BlockStorage instance with identical metadata; fields are only allocated on the blocks the worker owns.
 */
//**********************************************************************************************************************
class BlockStorage
{
 public:
   BlockStorage(const Vec3i& globalSize, const Vec3i& blockSize, std::array<bool, 3> periodic, int workerCount,
                const KeepPredicate& keep = {}, const WeightFunction& weight = {});

   const Vec3i& cellCount() const { return globalSize_; }
   const Vec3i& blockSize() const { return blockSize_; }
   const std::array<bool, 3>& periodic() const { return periodic_; }
   Vec3i blockGridSize() const;
   int workerCount() const { return workerCount_; }

   std::vector<Block>& blocks() { return blocks_; }
   const std::vector<Block>& blocks() const { return blocks_; }
   const std::map<int, int>& assignment() const { return assignment_; }

   int ownerOf(int blockId) const;
   Block* findBlock(int blockId);
   const Block* findBlock(int blockId) const;

   /// Block at block-grid position, with periodic wrap where enabled; nullptr if outside or discarded.
   const Block* blockAtGridPosition(Vec3i pos) const;
   Vec3i gridPosition(int blockId) const;

   /// Block containing a global cell, or nullptr.
   const Block* blockContaining(const Vec3i& cell) const;

   std::vector<Block*> localBlocks(int worker);
   std::vector<const Block*> localBlocks(int worker) const;

   /// Adds a field to every block owned by `worker`.
   void addFieldToLocalBlocks(int worker, const std::string& name, int fSize, int ghostLayers,
                              field::Layout layout = field::Layout::AoS, std::size_t alignment = 8);

 private:
   Vec3i globalSize_;
   Vec3i blockSize_;
   std::array<bool, 3> periodic_;
   int workerCount_;
   std::vector<Block> blocks_;
   std::map<int, std::size_t> indexById_;
   std::map<int, int> assignment_;
};

std::vector<Block*> localBlocks(BlockStorage& storage, int worker);
inline const Vec3i& cellCount(const BlockStorage& storage) { return storage.cellCount(); }

} // namespace blockforge::blockgrid
