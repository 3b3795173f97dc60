//======================================================================================================================
//
//! \file Collectives.h
//! \brief Reductions, coarsened line gathers and text broadcasts used for in-situ evaluation and steering.
//
//======================================================================================================================
#pragma once

#include "blockforge/blockgrid/BlockStorage.h"
#include "blockforge/comms/Transport.h"

#include <optional>
#include <string>
#include <vector>

namespace blockforge::comms {

enum class ReduceOp : std::uint8_t { Min = 0, Max = 1, Sum = 2 };

const char* reduceOpName(ReduceOp op);

/// Folds the contributions in rank order on the root. Non-root workers get std::nullopt.
std::optional<double> reduceScalar(double value, ReduceOp op, Transport& transport);

/// Like reduceScalar, but every worker receives the result.
double allReduceScalar(double value, ReduceOp op, Transport& transport);

/// Line through the domain: exactly two of the coordinates are fixed, the remaining axis is free.
struct LineSpec
{
   std::optional<int> x;
   std::optional<int> y;
   std::optional<int> z;

   int freeAxis() const;
};

/// Values of `fieldName[f]` at global positions k*coarsen along the free axis, k = 0 .. ceil(N/coarsen)-1, assembled
/// on the root from the owning blocks. Cells of discarded blocks read as NaN. Non-root workers get std::nullopt.
std::optional<std::vector<double>> gatherSlice(const blockgrid::BlockStorage& storage, const LineSpec& line,
                                               const std::string& fieldName, int f, int coarsen, Transport& transport);

/// Every worker returns the root's text.
std::string broadcastLine(const std::string& text, Transport& transport);

} // namespace blockforge::comms
