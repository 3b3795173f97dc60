//======================================================================================================================
//
//! \file Internal.h
//! \brief Shared pieces of the script implementation (not installed).
//
//======================================================================================================================
#pragma once

#include "blockforge/script/Script.h"

#include <pybind11/embed.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>

#include <map>
#include <set>
#include <string>

namespace blockforge::script::detail {

namespace py = pybind11;

struct WorkerContext
{
   HostServices* services = nullptr;
   std::map<std::string, py::object> callbacks;
   std::set<std::string> batchCallbacks;
   bool capturing = false;
   std::string captured;
   bool resumeRequested   = false;
   bool shutdownRequested = false;
};

/// Context of the interpreter currently running on this thread, or nullptr.
WorkerContext* currentContext();
WorkerContext& requireContext();

class ContextScope
{
 public:
   explicit ContextScope(WorkerContext* ctx);
   ~ContextScope();

   ContextScope(const ContextScope&)            = delete;
   ContextScope& operator=(const ContextScope&) = delete;

 private:
   WorkerContext* previous_;
};

/// The embedded module; its import also installs the helper functions.
py::module_ blockforgeModule();

py::object toPython(const unitsconfig::ConfigValue& value);
unitsconfig::ConfigValue toConfig(py::handle object, const std::string& path);

py::object exposeToPython(const Exposure& exposure);

/// Traceback text of a caught Python error.
std::string formatError(py::error_already_set& e);

} // namespace blockforge::script::detail
