//======================================================================================================================
//
//! \file Collectives.cpp
//
//======================================================================================================================
#include "blockforge/comms/Collectives.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace blockforge::comms {

const char* reduceOpName(ReduceOp op)
{
   switch (op)
   {
   case ReduceOp::Min: return "MIN";
   case ReduceOp::Max: return "MAX";
   case ReduceOp::Sum: return "SUM";
   }
   return "?";
}

namespace {
double fold(ReduceOp op, double a, double b)
{
   switch (op)
   {
   case ReduceOp::Min: return std::min(a, b);
   case ReduceOp::Max: return std::max(a, b);
   case ReduceOp::Sum: return a + b;
   }
   return a;
}
} // namespace

std::optional<double> reduceScalar(double value, ReduceOp op, Transport& transport)
{
   BufferWriter w;
   w.put(std::uint8_t(op)).put(value);
   auto all = transport.gather(w.release(), 0);
   if (!transport.isRoot()) return std::nullopt;

   double acc = 0;
   for (std::size_t r = 0; r < all.size(); ++r)
   {
      BufferReader rd(all[r]);
      const auto theirOp = ReduceOp(rd.get<std::uint8_t>());
      const double v     = rd.get<double>();
      if (theirOp != op)
         throw CommsError(std::string("reduce: worker ") + std::to_string(r) + " used " + reduceOpName(theirOp) +
                          ", root used " + reduceOpName(op));
      acc = r == 0 ? v : fold(op, acc, v);
   }
   return acc;
}

double allReduceScalar(double value, ReduceOp op, Transport& transport)
{
   auto root = reduceScalar(value, op, transport);
   BufferWriter w;
   if (root) w.put(*root);
   Bytes b = transport.broadcast(w.release(), 0);
   return BufferReader(b).get<double>();
}

int LineSpec::freeAxis() const
{
   const int fixed = int(x.has_value()) + int(y.has_value()) + int(z.has_value());
   if (fixed != 2) throw CommsError("line spec needs exactly two fixed coordinates");
   return !x ? 0 : (!y ? 1 : 2);
}

std::optional<std::vector<double>> gatherSlice(const blockgrid::BlockStorage& storage, const LineSpec& line,
                                               const std::string& fieldName, int f, int coarsen, Transport& transport)
{
   if (coarsen < 1) throw CommsError("coarsen must be >= 1");
   const int axis   = line.freeAxis();
   const auto& size = storage.cellCount();
   const std::array<std::optional<int>, 3> fixed{ line.x, line.y, line.z };
   for (int d = 0; d < 3; ++d)
      if (fixed[d] && (*fixed[d] < 0 || *fixed[d] >= size[d]))
         throw CommsError("line outside domain: coordinate " + std::to_string(*fixed[d]) + " in dimension " +
                          std::to_string(d));

   const int count = (size[axis] + coarsen - 1) / coarsen;

   BufferWriter w;
   std::vector<double> indices, values;
   for (const auto* block : storage.localBlocks(transport.rank()))
   {
      const auto& iv = block->interval();
      bool hit       = true;
      for (int d = 0; d < 3; ++d)
         if (d != axis && (*fixed[d] < iv.min[d] || *fixed[d] > iv.max[d])) hit = false;
      if (!hit) continue;
      const auto& fld = block->getField(fieldName);
      for (int k = 0; k < count; ++k)
      {
         const int g = k * coarsen;
         if (g < iv.min[axis] || g > iv.max[axis]) continue;
         blockgrid::Vec3i cell{};
         for (int d = 0; d < 3; ++d)
            cell[d] = d == axis ? g : *fixed[d];
         const auto local = block->toLocal(cell);
         indices.push_back(k);
         values.push_back(fld(local[0], local[1], local[2], f));
      }
   }
   w.putDoubles(indices).putDoubles(values);

   auto all = transport.gather(w.release(), 0);
   if (!transport.isRoot()) return std::nullopt;

   std::vector<double> out(std::size_t(count), std::numeric_limits<double>::quiet_NaN());
   for (const auto& part : all)
   {
      BufferReader r(part);
      const auto idx = r.getDoubles();
      const auto val = r.getDoubles();
      for (std::size_t i = 0; i < idx.size(); ++i)
         out[std::size_t(idx[i])] = val[i];
   }
   return out;
}

std::string broadcastLine(const std::string& text, Transport& transport)
{
   Bytes b(text.begin(), text.end());
   Bytes r = transport.broadcast(std::move(b), 0);
   return std::string(r.begin(), r.end());
}

} // namespace blockforge::comms
