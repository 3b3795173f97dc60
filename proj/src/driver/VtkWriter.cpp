//======================================================================================================================
//
//! \file VtkWriter.cpp
//
//======================================================================================================================
#include "blockforge/driver/VtkWriter.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace blockforge::driver {

using blockgrid::Block;

namespace {

void appendNumber(std::string& out, double v)
{
   char buf[40];
   std::snprintf(buf, sizeof(buf), "%.9g", v);
   out += buf;
}

std::size_t globalIndex(const blockgrid::Vec3i& size, const blockgrid::Vec3i& c)
{
   return std::size_t(c[0]) + std::size_t(size[0]) * (std::size_t(c[1]) + std::size_t(size[1]) * std::size_t(c[2]));
}

} // namespace

std::string vtkFileName(const std::string& dir, std::int64_t step)
{
   char name[40];
   std::snprintf(name, sizeof(name), "step_%06lld.vtk", static_cast<long long>(step));
   return (std::filesystem::path(dir) / name).string();
}

std::string formatVtk(const blockgrid::Vec3i& size, std::int64_t step,
                      const std::vector<std::pair<std::string, std::vector<double>>>& scalars,
                      const std::vector<double>& velocity)
{
   const std::size_t n = std::size_t(size[0]) * std::size_t(size[1]) * std::size_t(size[2]);
   if (velocity.size() != 3 * n) throw VtkError("velocity array does not match the domain size");

   std::string out;
   out.reserve(n * 16 * (scalars.size() + 3) + 256);
   out += "# vtk DataFile Version 3.0\n";
   out += "blockforge step " + std::to_string(step) + "\n";
   out += "ASCII\n";
   out += "DATASET STRUCTURED_POINTS\n";
   out += "DIMENSIONS " + std::to_string(size[0]) + " " + std::to_string(size[1]) + " " + std::to_string(size[2]) + "\n";
   out += "ORIGIN 0 0 0\n";
   out += "SPACING 1 1 1\n";
   out += "POINT_DATA " + std::to_string(n) + "\n";
   for (const auto& [name, values] : scalars)
   {
      if (values.size() != n) throw VtkError("scalar array '" + name + "' does not match the domain size");
      out += "SCALARS " + name + " double 1\n";
      out += "LOOKUP_TABLE default\n";
      for (double v : values)
      {
         appendNumber(out, v);
         out += '\n';
      }
   }
   out += "VECTORS velocity double\n";
   for (std::size_t i = 0; i < n; ++i)
   {
      appendNumber(out, velocity[3 * i]);
      out += ' ';
      appendNumber(out, velocity[3 * i + 1]);
      out += ' ';
      appendNumber(out, velocity[3 * i + 2]);
      out += '\n';
   }
   return out;
}

std::string writeVtk(const blockgrid::BlockStorage& storage, const std::vector<std::string>& scalarFields,
                     std::int64_t step, const std::string& dir, comms::Transport& transport)
{
   // per block: id, then every scalar field, then velocity, interior cells x-fastest
   comms::BufferWriter w;
   const auto blocks = storage.localBlocks(transport.rank());
   w.put(std::int64_t(blocks.size()));
   for (const Block* b : blocks)
   {
      w.put(std::int64_t(b->id()));
      const auto n = b->size();
      auto take = [&](const std::string& name, int components) {
         if (!b->hasField(name)) throw VtkError("block " + std::to_string(b->id()) + " has no field '" + name + "'");
         const auto& f = b->getField(name);
         std::vector<double> v;
         v.reserve(std::size_t(b->interval().numCells()) * std::size_t(components));
         for (int z = 0; z < n[2]; ++z)
            for (int y = 0; y < n[1]; ++y)
               for (int x = 0; x < n[0]; ++x)
                  for (int c = 0; c < components; ++c)
                     v.push_back(f(x, y, z, c));
         w.putDoubles(v);
      };
      for (const auto& name : scalarFields)
         take(name, 1);
      take("velocity", 3);
   }
   const auto parts = transport.gather(w.release());
   if (!transport.isRoot()) return {};

   const auto& size     = storage.cellCount();
   const std::size_t n  = std::size_t(size[0]) * std::size_t(size[1]) * std::size_t(size[2]);
   std::vector<std::pair<std::string, std::vector<double>>> scalars;
   for (const auto& name : scalarFields)
      scalars.emplace_back(name, std::vector<double>(n, 0.0));
   std::vector<double> velocity(3 * n, 0.0);

   for (const auto& part : parts)
   {
      comms::BufferReader r(part);
      const auto count = r.get<std::int64_t>();
      for (std::int64_t i = 0; i < count; ++i)
      {
         const Block* b = storage.findBlock(int(r.get<std::int64_t>()));
         if (!b) throw VtkError("gathered data of an unknown block");
         const auto bs = b->size();
         auto place = [&](std::vector<double>& dst, int components) {
            const auto v = r.getDoubles();
            std::size_t k = 0;
            for (int z = 0; z < bs[2]; ++z)
               for (int y = 0; y < bs[1]; ++y)
                  for (int x = 0; x < bs[0]; ++x)
                  {
                     const std::size_t g = globalIndex(size, b->toGlobal(x, y, z));
                     for (int c = 0; c < components; ++c)
                        dst[std::size_t(components) * g + std::size_t(c)] = v.at(k++);
                  }
         };
         for (auto& s : scalars)
            place(s.second, 1);
         place(velocity, 3);
      }
   }

   std::error_code ec;
   std::filesystem::create_directories(dir, ec);
   if (ec) throw VtkError("cannot create VTK directory '" + dir + "': " + ec.message());
   const std::string path = vtkFileName(dir, step);
   std::ofstream file(path, std::ios::binary | std::ios::trunc);
   if (!file) throw VtkError("cannot write VTK file '" + path + "'");
   file << formatVtk(size, step, scalars, velocity);
   file.close();
   if (!file) throw VtkError("error while writing VTK file '" + path + "'");
   return path;
}

} // namespace blockforge::driver
