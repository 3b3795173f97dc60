//======================================================================================================================
//
//! \file Driver.h
//! \brief Orchestration of a scenario run.
//
//======================================================================================================================
#pragma once

#include "blockforge/blockgrid/BlockStorage.h"
#include "blockforge/comms/Transport.h"
#include "blockforge/driver/Benchmark.h"
#include "blockforge/freesurface/FreeSurface.h"
#include "blockforge/steering/Server.h"
#include "blockforge/unitsconfig/ConfigTree.h"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace blockforge::driver {

enum class Mode { Lbm, Fslbm };

const char* modeName(Mode mode);

/// Error of one run stage; what() is "<stage>: <message>".
class StageError : public std::runtime_error
{
 public:
   StageError(std::string stage, const std::string& message);
   const std::string& stage() const { return stage_; }
   const std::string& message() const { return message_; }

 private:
   std::string stage_;
   std::string message_;
};

namespace stages {
inline const std::string load          = "load";
inline const std::string config        = "config";
inline const std::string nondimensionalize = "nondimensionalize";
inline const std::string validate      = "validate";
inline const std::string decompose     = "decompose";
inline const std::string domainInit    = "domain_init";
inline const std::string timestep      = "timestep";
inline const std::string endOfTimestep = "at_end_of_timestep";
inline const std::string steering      = "steering";
inline const std::string vtk           = "vtk";
inline const std::string results       = "results";
} // namespace stages

/// Values left unset come from the scenario config (Control section) or the defaults.
struct RunPlan
{
   std::string scenario;                   //!< path of the scenario script
   std::string scenarioSource;             //!< inline script; used instead of the file when not empty
   std::optional<std::int64_t> timesteps;
   std::optional<std::int64_t> vtkInterval;
   std::string vtkDir;                     //!< empty: no VTK output
   std::string resultsPath;                //!< empty: results are only kept in the report
   int workers   = 1;
   int steerPort = -1;                     //!< -1 disabled, 0 any free port
   int wsPort    = -1;
   bool benchmark = false;
   std::optional<Mode> mode;

   void validate() const;
};

struct RunState
{
   blockgrid::BlockStorage& storage;
   comms::Transport& transport;
   const unitsconfig::ConfigTree& config;
   Mode mode;
   freesurface::FreeSurfaceState* freeSurface; //!< null in lbm mode
   std::int64_t step;                          //!< completed timesteps
};

/// Test and embedding hooks; each is called on every worker thread.
struct RunHooks
{
   std::function<void(RunState&)> afterInit;
   /// After the at_end_of_timestep callback, before the steering check.
   std::function<void(RunState&)> afterStep;
   std::function<void(RunState&)> atEnd;
   /// Root only, once the listeners are bound.
   std::function<void(int tcpPort, int wsPort)> onListening;
   /// Replaces the server options derived from the plan.
   std::optional<steering::ServerOptions> serverOptions;
   std::ostream* out = nullptr; //!< report output, default std::cout
   std::ostream* err = nullptr; //!< diagnostics, default std::cerr
};

struct LoggedResult
{
   std::int64_t step = 0;
   std::string name;
   std::variant<double, std::string> value;

   bool operator==(const LoggedResult&) const = default;
};

struct RunReport
{
   int exitStatus = 0;
   std::string failedStage;                //!< empty on success
   std::string error;
   std::int64_t stepsCompleted = 0;
   bool shutdownRequested = false;
   std::int64_t runId = 0;                 //!< 0 without results store
   unitsconfig::ConfigTree config;         //!< final lattice-unit config
   std::vector<LoggedResult> results;      //!< in logging order (root gathers in rank order per step)
   std::vector<std::string> vtkFiles;
   std::vector<std::int64_t> sessionSteps;
   std::vector<std::string> transcript;
   std::optional<BenchmarkReport> benchmark;
};

/// Exit status 0 on completion (including a console shutdown), 2 on config validation failure, 1 otherwise.
RunReport runSimulation(const RunPlan& plan, const RunHooks& hooks = {});

/// Cells whose flag is Fluid or Interface, over the worker's blocks.
std::int64_t fluidCellCount(const blockgrid::BlockStorage& storage, int worker);

} // namespace blockforge::driver
