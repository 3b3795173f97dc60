//======================================================================================================================
//
//! \file Benchmark.cpp
//
//======================================================================================================================
#include "blockforge/driver/Benchmark.h"

#include <algorithm>
#include <cstdio>

namespace blockforge::driver {

double mlups(std::int64_t fluidCells, std::int64_t steps, double seconds)
{
   if (fluidCells <= 0 || steps <= 0 || !(seconds > 0.0)) return 0.0;
   return double(fluidCells) * double(steps) / (seconds * 1e6);
}

BenchmarkReport benchmarkReport(const std::vector<WorkerTiming>& timings)
{
   BenchmarkReport r;
   std::int64_t cells = 0, steps = 0;
   double slowest = 0.0;
   for (const auto& t : timings)
   {
      r.perWorker.push_back(mlups(t.fluidCells, t.steps, t.seconds));
      cells += t.fluidCells;
      steps   = std::max(steps, t.steps);
      slowest = std::max(slowest, t.seconds);
   }
   r.total = mlups(cells, steps, slowest);
   return r;
}

std::string BenchmarkReport::format() const
{
   std::string out;
   char line[96];
   for (std::size_t w = 0; w < perWorker.size(); ++w)
   {
      std::snprintf(line, sizeof(line), "worker %zu: %.3f MLUP/s\n", w, perWorker[w]);
      out += line;
   }
   std::snprintf(line, sizeof(line), "total: %.3f MLUP/s\n", total);
   out += line;
   return out;
}

} // namespace blockforge::driver
