//======================================================================================================================
//
//! \file Bubbles.cpp
//
//======================================================================================================================
#include "Internal.h"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>

namespace blockforge::freesurface {

using blockgrid::Block;
using blockgrid::BlockStorage;
using comms::BufferReader;
using comms::BufferWriter;
using namespace detail;

// ---------------------------------------------------------------------------------------------------------------------
//   BubbleTable
// ---------------------------------------------------------------------------------------------------------------------

Bubble& BubbleTable::at(int id)
{
   auto it = bubbles_.find(id);
   if (it == bubbles_.end()) throw FreeSurfaceError("unknown bubble " + std::to_string(id));
   return it->second;
}

const Bubble& BubbleTable::at(int id) const
{
   auto it = bubbles_.find(id);
   if (it == bubbles_.end()) throw FreeSurfaceError("unknown bubble " + std::to_string(id));
   return it->second;
}

int BubbleTable::add(double V0, double V)
{
   const int id = nextId_++;
   bubbles_[id] = { V0, V };
   return id;
}

void BubbleTable::merge(int winner, int other)
{
   if (winner == other) return;
   Bubble& w       = at(winner);
   const Bubble& o = at(other);
   w.V0 += o.V0;
   w.V += o.V;
   bubbles_.erase(other);
}

double BubbleTable::totalVolume() const
{
   double v = 0.0;
   for (const auto& [id, b] : bubbles_)
      v += b.V;
   return v;
}

comms::Bytes BubbleTable::serialize() const
{
   BufferWriter w;
   w.put(std::int32_t(nextId_));
   w.put(std::uint64_t(bubbles_.size()));
   for (const auto& [id, b] : bubbles_)
      w.put(std::int32_t(id)).put(b.V0).put(b.V);
   return w.release();
}

BubbleTable BubbleTable::deserialize(const comms::Bytes& bytes)
{
   BufferReader r(bytes);
   BubbleTable t;
   t.nextId_    = r.get<std::int32_t>();
   const auto n = r.get<std::uint64_t>();
   for (std::uint64_t i = 0; i < n; ++i)
   {
      const int id     = r.get<std::int32_t>();
      const double V0  = r.get<double>();
      const double V   = r.get<double>();
      t.bubbles_[id]   = { V0, V };
   }
   return t;
}

// ---------------------------------------------------------------------------------------------------------------------
//   Volumes, merging, relabeling
// ---------------------------------------------------------------------------------------------------------------------

namespace {

double volumeContribution(CellType t, double phi) { return t == CellType::Gas ? 1.0 : 1.0 - phi; }

class UnionFind
{
 public:
   int find(int a)
   {
      auto it = parent_.find(a);
      if (it == parent_.end())
      {
         parent_[a] = a;
         return a;
      }
      if (it->second == a) return a;
      const int root = find(it->second);
      parent_[a]     = root;
      return root;
   }
   void unite(int a, int b)
   {
      a = find(a);
      b = find(b);
      if (a == b) return;
      if (b < a) std::swap(a, b);
      parent_[b] = a; // smaller id wins
   }
   const std::map<int, int>& parents() const { return parent_; }

 private:
   std::map<int, int> parent_;
};

struct GatheredCell
{
   std::int64_t index;
   int label;
   double volume;
};

} // namespace

std::map<int, double> localBubbleVolumes(const BlockStorage& storage, int worker)
{
   std::map<int, double> vol;
   for (const Block* b : storage.localBlocks(worker))
   {
      const auto& flags = b->getField(lbm::fields::flags);
      const auto& fill  = b->getField(fields::fill);
      const auto& ids   = b->getField(fields::bubbleId);
      forInterior(fill, [&](int x, int y, int z) {
         const CellType t = flagAt(flags, x, y, z);
         const int id     = int(ids(x, y, z));
         if (isGasOrInterface(t) && id >= 0) vol[id] += volumeContribution(t, fill(x, y, z));
      });
   }
   return vol;
}

void updateBubbles(BlockStorage& storage, FreeSurfaceState& state, comms::Transport& transport)
{
   const auto blocks = storage.localBlocks(transport.rank());
   exchange(storage, transport, 1, { fields::bubbleId });

   // bubbles touching through a face are merged
   BufferWriter pairs;
   for (Block* b : blocks)
   {
      const auto& flags = b->getField(lbm::fields::flags);
      const auto& ids   = b->getField(fields::bubbleId);
      forInterior(ids, [&](int x, int y, int z) {
         if (!isGasOrInterface(flagAt(flags, x, y, z))) return;
         const int a = int(ids(x, y, z));
         if (a < 0) return;
         for (int d = 1; d < 7; ++d)
         {
            const int nx = x + S::e[d][0], ny = y + S::e[d][1], nz = z + S::e[d][2];
            if (!isGasOrInterface(flagAt(flags, nx, ny, nz))) continue;
            const int c = int(ids(nx, ny, nz));
            if (c >= 0 && c != a) pairs.put(std::int32_t(std::min(a, c))).put(std::int32_t(std::max(a, c)));
         }
      });
   }
   UnionFind uf;
   for (const auto& bytes : transport.allGather(pairs.release()))
   {
      BufferReader r(bytes);
      while (!r.atEnd())
      {
         const int a = r.get<std::int32_t>();
         const int c = r.get<std::int32_t>();
         uf.unite(a, c);
      }
   }
   std::vector<int> labels;
   for (const auto& entry : uf.parents())
      labels.push_back(entry.first);
   std::map<int, int> rename;
   for (int id : labels)
      if (const int root = uf.find(id); root != id) rename[id] = root;
   for (const auto& [from, to] : rename)
      if (state.bubbles.contains(from) && state.bubbles.contains(to)) state.bubbles.merge(to, from);
   if (!rename.empty())
      for (Block* b : blocks)
      {
         auto& ids = b->getField(fields::bubbleId);
         for (double& v : ids.data())
         {
            auto it = rename.find(int(v));
            if (it != rename.end()) v = it->second;
         }
      }

   if (state.step % state.params.relabelInterval == 0)
   {
      relabelBubbles(storage, state, transport);
      return;
   }

   BufferWriter vols;
   for (const auto& [id, v] : localBubbleVolumes(storage, transport.rank()))
      vols.put(std::int32_t(id)).put(v);
   std::map<int, double> total;
   for (const auto& bytes : transport.allGather(vols.release()))
   {
      BufferReader r(bytes);
      while (!r.atEnd())
      {
         const int id = r.get<std::int32_t>();
         total[id] += r.get<double>();
      }
   }
   for (auto it = state.bubbles.bubbles().begin(); it != state.bubbles.bubbles().end();)
   {
      auto found = total.find(it->first);
      if (found == total.end())
         it = state.bubbles.bubbles().erase(it); // no cells left
      else
      {
         it->second.V = found->second;
         ++it;
      }
   }
}

void relabelBubbles(BlockStorage& storage, FreeSurfaceState& state, comms::Transport& transport)
{
   const auto blocks = storage.localBlocks(transport.rank());
   const auto n      = storage.cellCount();
   auto linear       = [&](const blockgrid::Vec3i& g) {
      return (std::int64_t(g[2]) * n[1] + g[1]) * n[0] + g[0];
   };

   BufferWriter mine;
   for (Block* b : blocks)
   {
      const auto& flags = b->getField(lbm::fields::flags);
      const auto& fill  = b->getField(fields::fill);
      const auto& ids   = b->getField(fields::bubbleId);
      forInterior(fill, [&](int x, int y, int z) {
         const CellType t = flagAt(flags, x, y, z);
         if (!isGasOrInterface(t)) return;
         mine.put(linear(b->toGlobal(x, y, z))).put(std::int32_t(ids(x, y, z))).put(volumeContribution(t, fill(x, y, z)));
      });
   }
   const auto gathered = transport.gather(mine.release());

   comms::Bytes answer;
   if (transport.isRoot())
   {
      std::vector<GatheredCell> cells;
      std::vector<std::size_t> rankCount;
      for (const auto& bytes : gathered)
      {
         BufferReader r(bytes);
         std::size_t count = 0;
         while (!r.atEnd())
         {
            GatheredCell c;
            c.index  = r.get<std::int64_t>();
            c.label  = r.get<std::int32_t>();
            c.volume = r.get<double>();
            cells.push_back(c);
            ++count;
         }
         rankCount.push_back(count);
      }

      // process in global index order so the result does not depend on the decomposition
      std::vector<std::size_t> order(cells.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cells[a].index < cells[b].index; });
      std::unordered_map<std::int64_t, std::size_t> where;
      where.reserve(cells.size() * 2);
      for (std::size_t i = 0; i < cells.size(); ++i)
         where[cells[i].index] = i;

      std::vector<int> component(cells.size(), -1);
      int componentCount = 0;
      std::vector<std::size_t> stack;
      for (std::size_t start : order)
      {
         if (component[start] >= 0) continue;
         const int c      = componentCount++;
         component[start] = c;
         stack.assign(1, start);
         while (!stack.empty())
         {
            const std::size_t cur = stack.back();
            stack.pop_back();
            const std::int64_t idx = cells[cur].index;
            const int gx = int(idx % n[0]), gy = int((idx / n[0]) % n[1]), gz = int(idx / (std::int64_t(n[0]) * n[1]));
            for (int d = 1; d < 7; ++d)
            {
               blockgrid::Vec3i nb{ gx + S::e[d][0], gy + S::e[d][1], gz + S::e[d][2] };
               bool inside = true;
               for (int k = 0; k < 3; ++k)
               {
                  if (nb[k] >= 0 && nb[k] < n[k]) continue;
                  if (!storage.periodic()[k]) inside = false;
                  nb[k] = (nb[k] + n[k]) % n[k];
               }
               if (!inside) continue;
               auto it = where.find(linear(nb));
               if (it == where.end() || component[it->second] >= 0) continue;
               component[it->second] = c;
               stack.push_back(it->second);
            }
         }
      }

      std::vector<double> compVolume(static_cast<std::size_t>(componentCount), 0.0);
      std::vector<std::set<int>> compLabels(static_cast<std::size_t>(componentCount));
      for (std::size_t i : order)
      {
         compVolume[std::size_t(component[i])] += cells[i].volume;
         if (cells[i].label >= 0 && state.bubbles.contains(cells[i].label))
            compLabels[std::size_t(component[i])].insert(cells[i].label);
      }

      // labels sharing a component belong together
      UnionFind uf;
      for (const auto& labels : compLabels)
         for (int l : labels)
            uf.unite(*labels.begin(), l);
      std::map<int, double> groupV0;
      for (const auto& [id, b] : state.bubbles.bubbles())
         if (uf.parents().count(id)) groupV0[uf.find(id)] += b.V0;
      std::map<int, std::vector<int>> groupComponents;
      for (int c = 0; c < componentCount; ++c)
         if (!compLabels[std::size_t(c)].empty()) groupComponents[uf.find(*compLabels[std::size_t(c)].begin())].push_back(c);

      BubbleTable next;
      std::vector<int> compId(static_cast<std::size_t>(componentCount), -1);
      int nextId = state.bubbles.nextId();
      for (auto& [group, comps] : groupComponents)
      {
         std::stable_sort(comps.begin(), comps.end(),
                          [&](int a, int b) { return compVolume[std::size_t(a)] > compVolume[std::size_t(b)]; });
         double sum = 0.0;
         for (int c : comps)
            sum += compVolume[std::size_t(c)];
         for (std::size_t k = 0; k < comps.size(); ++k)
         {
            const int c      = comps[k];
            const int id     = k == 0 ? group : nextId++;
            const double v   = compVolume[std::size_t(c)];
            const double V0  = comps.size() == 1 ? groupV0[group]
                                                 : (sum > 0.0 ? groupV0[group] * v / sum : groupV0[group] / double(comps.size()));
            next.bubbles()[id] = { V0, v };
            compId[std::size_t(c)] = id;
         }
      }
      for (int c = 0; c < componentCount; ++c)
         if (compId[std::size_t(c)] < 0)
         {
            compId[std::size_t(c)] = nextId++;
            next.bubbles()[compId[std::size_t(c)]] = { compVolume[std::size_t(c)], compVolume[std::size_t(c)] };
         }
      next.setNextId(nextId);

      BufferWriter out;
      const auto table = next.serialize();
      out.put(std::uint64_t(table.size()));
      out.bytes().insert(out.bytes().end(), table.begin(), table.end());
      std::size_t offset = 0;
      for (std::size_t r = 0; r < rankCount.size(); ++r)
      {
         out.put(std::uint64_t(rankCount[r]));
         for (std::size_t i = 0; i < rankCount[r]; ++i)
            out.put(std::int32_t(compId[std::size_t(component[offset + i])]));
         offset += rankCount[r];
      }
      answer = out.release();
   }
   answer = transport.broadcast(std::move(answer));

   BufferReader r(answer);
   const auto tableSize = r.get<std::uint64_t>();
   comms::Bytes table(tableSize);
   for (auto& byte : table)
      byte = r.get<std::uint8_t>();
   state.bubbles = BubbleTable::deserialize(table);
   for (int rank = 0; rank < transport.rank(); ++rank)
   {
      const auto count = r.get<std::uint64_t>();
      for (std::uint64_t i = 0; i < count; ++i)
         r.get<std::int32_t>();
   }
   r.get<std::uint64_t>();
   for (Block* b : blocks)
   {
      const auto& flags = b->getField(lbm::fields::flags);
      auto& ids         = b->getField(fields::bubbleId);
      forInterior(ids, [&](int x, int y, int z) {
         ids(x, y, z) = isGasOrInterface(flagAt(flags, x, y, z)) ? double(r.get<std::int32_t>()) : -1.0;
      });
   }
   exchange(storage, transport, 1, { fields::bubbleId });
}

} // namespace blockforge::freesurface
