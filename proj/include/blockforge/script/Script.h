//======================================================================================================================
//
//! \file Script.h
//! \brief Embedded Python runtime: scenario loading, callback registry, host object exposure, console execution.
//
//======================================================================================================================
#pragma once

#include "blockforge/blockgrid/BlockStorage.h"
#include "blockforge/comms/Transport.h"
#include "blockforge/freesurface/FreeSurface.h"
#include "blockforge/lbm/LatticeModel.h"
#include "blockforge/steering/Console.h"
#include "blockforge/unitsconfig/Lattice.h"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace blockforge::script {

class ScriptError : public std::runtime_error
{
 public:
   using std::runtime_error::runtime_error;
};

namespace callbacks {
inline const std::string config        = "config";
inline const std::string domainInit    = "domain_init";
inline const std::string endOfTimestep = "at_end_of_timestep";
} // namespace callbacks

/// Starts the embedded interpreter. Idempotent; the first call has to come from the main thread before any worker
/// thread creates an Interpreter.
void initializeRuntime();

enum class ExposeMode { ByReference, ByCopy };

/// The block collection of one worker, seen by scripts as an iterable mapping block id -> block.
struct BlockCollectionRef
{
   blockgrid::BlockStorage* storage = nullptr;
   int worker = 0;
};

using ExposedObject = std::variant<BlockCollectionRef, field::Field*, unitsconfig::ConfigTree*,
                                   const unitsconfig::LatticeScale*, const freesurface::BubbleTable*, double,
                                   std::int64_t, bool, std::string>;

struct Exposure
{
   std::string name;
   ExposedObject object;
   ExposeMode mode = ExposeMode::ByReference;
};

/// Checks that the object can be exported in the requested mode. Scalars and strings only by copy, block
/// collections only by reference, bubble tables only by copy.
Exposure hostExpose(std::string name, ExposedObject object, ExposeMode mode);

struct BoundarySpec
{
   lbm::CellType type = lbm::CellType::NoSlip;
   std::vector<double> params;

   bool operator==(const BoundarySpec&) const = default;
};

/// Parses ['pressure', rho], ['velocity', ux, uy, uz], ['noslip'], 'NoSlip', ... (names are case-insensitive).
BoundarySpec parseBoundary(const std::string& name, const std::vector<double>& params);

/// Result of domain_init for one cell. Absent entries keep the defaults (fluid, fill level 1, rest state).
struct CellInit
{
   std::optional<double> fillLevel;
   std::optional<BoundarySpec> boundary;
   std::optional<lbm::Vec3> initVel;
   std::optional<double> initDensity;

   bool operator==(const CellInit&) const = default;
};

using ResultValue = std::variant<double, std::string>;

/// Host functionality the script built-ins call into.
struct HostServices
{
   comms::Transport* transport      = nullptr;
   blockgrid::BlockStorage* storage = nullptr;
   std::function<void(const std::string& name, const ResultValue& value)> logResult;
   std::function<std::int64_t()> currentStep;
};

//**********************************************************************************************************************
/*!
 *  Script state of one worker: its own namespace and callback registry. Every call has to come from the worker
 *  thread that owns the instance.
 */
//**********************************************************************************************************************
class Interpreter : public steering::CommandExecutor
{
 public:
   explicit Interpreter(HostServices services = {});
   ~Interpreter() override;

   Interpreter(const Interpreter&)            = delete;
   Interpreter& operator=(const Interpreter&) = delete;

   HostServices& services();

   /// Runs the scenario file and collects the registered callbacks. Requires a "config" callback.
   void loadScenario(const std::string& path);
   void loadSource(const std::string& source, const std::string& filename = "<scenario>");

   bool hasCallback(const std::string& name) const;
   std::vector<std::string> callbackNames() const;

   unitsconfig::ConfigTree invokeConfig();

   CellInit invokeDomainInit(const blockgrid::Vec3i& cell);

   /// All cells of a box in x-fastest order. Uses a batch registration (arrays of coordinates) when present.
   std::vector<CellInit> invokeDomainInitBox(const blockgrid::CellInterval& box);

   /// Calls the callback with the exposures its parameters ask for. No-op if the name is not registered.
   void invokeCallback(const std::string& name, const std::vector<Exposure>& exposures);

   /// Evaluates an expression in the scenario namespace and returns its repr().
   std::string evaluate(const std::string& expression);

   /// Runs statements in the scenario namespace.
   void run(const std::string& code);

   steering::Completeness probe(const std::string& text) override;
   steering::ExecResult execute(const std::string& command) override;

   struct Impl;

 private:
   std::unique_ptr<Impl> impl_;
};

} // namespace blockforge::script
