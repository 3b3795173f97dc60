//======================================================================================================================
//
//! \file VtkWriter.h
//! \brief Legacy ASCII structured points output, gathered on the root worker.
//
//======================================================================================================================
#pragma once

#include "blockforge/blockgrid/BlockStorage.h"
#include "blockforge/comms/Transport.h"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockforge::driver {

class VtkError : public std::runtime_error
{
 public:
   using std::runtime_error::runtime_error;
};

/// "<dir>/step_<step, six digits>.vtk"
std::string vtkFileName(const std::string& dir, std::int64_t step);

/*!
 *  Collective. Writes the scalar fields (component 0) and the three-component "velocity" field of all blocks. Returns
 *  the file path on the root and an empty string elsewhere. Cells of discarded blocks are written as 0.
 */
std::string writeVtk(const blockgrid::BlockStorage& storage, const std::vector<std::string>& scalarFields,
                     std::int64_t step, const std::string& dir, comms::Transport& transport);

/// File content for already gathered global arrays in x-fastest order.
std::string formatVtk(const blockgrid::Vec3i& size, std::int64_t step,
                      const std::vector<std::pair<std::string, std::vector<double>>>& scalars,
                      const std::vector<double>& velocity);

} // namespace blockforge::driver
