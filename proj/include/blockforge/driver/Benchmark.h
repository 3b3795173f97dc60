//======================================================================================================================
//
//! \file Benchmark.h
//! \brief MLUP/s throughput report.
//
//======================================================================================================================
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace blockforge::driver {

/// Steps before this many completed timesteps are not timed.
inline constexpr std::int64_t warmupSteps = 10;

struct WorkerTiming
{
   std::int64_t fluidCells = 0;
   std::int64_t steps      = 0; //!< timed steps
   double seconds          = 0.0;
};

struct BenchmarkReport
{
   std::vector<double> perWorker; //!< MLUP/s
   double total = 0.0;            //!< all fluid cells over the slowest worker's time

   std::string format() const;
};

/// (fluid cells * steps) / (seconds * 1e6); 0 if nothing was timed.
double mlups(std::int64_t fluidCells, std::int64_t steps, double seconds);

BenchmarkReport benchmarkReport(const std::vector<WorkerTiming>& timings);

} // namespace blockforge::driver
