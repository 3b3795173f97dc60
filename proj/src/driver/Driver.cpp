//======================================================================================================================
//
//! \file Driver.cpp
//
//======================================================================================================================
#include "blockforge/driver/Driver.h"

#include "blockforge/driver/ResultsStore.h"
#include "blockforge/driver/VtkWriter.h"
#include "blockforge/lbm/Sweeps.h"
#include "blockforge/script/Script.h"
#include "blockforge/steering/Console.h"
#include "blockforge/unitsconfig/Lattice.h"

#include <chrono>
#include <cmath>
#include <iostream>
#include <mutex>

namespace blockforge::driver {

using blockgrid::Block;
using blockgrid::BlockStorage;
using blockgrid::Vec3i;
using unitsconfig::ConfigTree;
using unitsconfig::ConfigValue;

const char* modeName(Mode mode) { return mode == Mode::Fslbm ? "fslbm" : "lbm"; }

StageError::StageError(std::string stage, const std::string& message)
   : std::runtime_error(stage + ": " + message), stage_(std::move(stage)), message_(message)
{}

void RunPlan::validate() const
{
   if (scenario.empty() && scenarioSource.empty()) throw std::invalid_argument("no scenario given");
   if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
   if (timesteps && *timesteps < 1) throw std::invalid_argument("timesteps must be >= 1");
   if (vtkInterval && *vtkInterval < 1) throw std::invalid_argument("VTK interval must be >= 1");
   if (steerPort < -1 || steerPort > 65535 || wsPort < -1 || wsPort > 65535)
      throw std::invalid_argument("port out of range");
}

std::int64_t fluidCellCount(const BlockStorage& storage, int worker)
{
   std::int64_t count = 0;
   for (const Block* b : storage.localBlocks(worker))
   {
      const auto& flags = b->getField(lbm::fields::flags);
      const auto n      = b->size();
      for (int z = 0; z < n[2]; ++z)
         for (int y = 0; y < n[1]; ++y)
            for (int x = 0; x < n[0]; ++x)
            {
               const auto t = lbm::cellType(flags(x, y, z));
               if (t == lbm::CellType::Fluid || t == lbm::CellType::Interface) ++count;
            }
   }
   return count;
}

namespace {

template <typename F>
auto inStage(const std::string& stage, F&& fn) -> decltype(fn())
{
   try
   {
      return fn();
   }
   catch (const StageError&)
   {
      throw;
   }
   catch (const std::exception& e)
   {
      throw StageError(stage, e.what());
   }
}

/// Settings read from the validated lattice-unit config.
struct Settings
{
   std::int64_t timesteps   = 1;
   std::int64_t vtkInterval = 0; //!< 0: no output
   Mode mode = Mode::Lbm;
   double omega = 1.0;
   double sigma = 0.0;
   int relabelInterval = 100;
   Vec3i size{};
   Vec3i blockSize{};
   std::array<bool, 3> periodic{ false, false, false };
};

Vec3i intTriple(const ConfigValue& v)
{
   Vec3i r{};
   for (std::size_t d = 0; d < 3; ++d)
      r[d] = int(v.list()[d].number());
   return r;
}

Settings readSettings(const ConfigTree& cfg, const RunPlan& plan)
{
   Settings s;
   s.timesteps = std::int64_t(cfg.at("Control.timesteps").number());
   if (const auto* m = cfg.find("Control.mode")) s.mode = m->string() == "fslbm" ? Mode::Fslbm : Mode::Lbm;
   if (!plan.vtkDir.empty())
   {
      const auto* v = cfg.find("Control.vtk_output_interval");
      s.vtkInterval = v ? std::int64_t(v->number()) : s.timesteps;
   }
   s.omega = *unitsconfig::relaxationRate(cfg);
   if (const auto* v = cfg.find("Physical.surface_tension")) s.sigma = v->number();
   if (const auto* v = cfg.find("Control.relabel_interval")) s.relabelInterval = int(v->number());
   s.size      = intTriple(cfg.at("Domain.size"));
   s.blockSize = cfg.find("Domain.block_size") ? intTriple(cfg.at("Domain.block_size")) : s.size;
   if (const auto* p = cfg.find("Domain.periodic"))
      for (std::size_t d = 0; d < 3; ++d)
      {
         const auto& e = p->list()[d];
         s.periodic[d] = e.isBool() ? e.boolean() : e.number() != 0.0;
      }
   return s;
}

void applyOverrides(ConfigTree& cfg, const RunPlan& plan)
{
   if (plan.timesteps) cfg.set("Control.timesteps", ConfigValue(*plan.timesteps));
   if (plan.vtkInterval) cfg.set("Control.vtk_output_interval", ConfigValue(*plan.vtkInterval));
   if (plan.mode) cfg.set("Control.mode", ConfigValue(std::string(modeName(*plan.mode))));
}

void applyCellInit(Block& b, int x, int y, int z, const script::CellInit& init, bool freeSurface)
{
   auto& flags = b.getField(lbm::fields::flags);
   if (init.boundary)
   {
      const auto& bs = *init.boundary;
      flags(x, y, z) = lbm::flagValue(bs.type);
      auto& bd       = b.getField(lbm::fields::boundary);
      if (bs.type == lbm::CellType::Pressure) bd(x, y, z, 0) = bs.params.at(0);
      else if (bs.type == lbm::CellType::Velocity)
      {
         bd(x, y, z, 0) = 1.0;
         for (int d = 0; d < 3; ++d)
            bd(x, y, z, d + 1) = bs.params.at(std::size_t(d));
      }
   }
   const double rho   = init.initDensity.value_or(1.0);
   const lbm::Vec3 u  = init.initVel.value_or(lbm::Vec3{ 0.0, 0.0, 0.0 });
   lbm::setEquilibrium(b, lbm::StencilKind::D3Q19, x, y, z, rho, u);
   if (freeSurface) b.getField(freesurface::fields::fill)(x, y, z) = init.boundary ? 0.0 : init.fillLevel.value_or(1.0);
}

comms::Bytes encodeResults(const std::vector<LoggedResult>& results)
{
   comms::BufferWriter w;
   w.put(std::int64_t(results.size()));
   for (const auto& r : results)
   {
      w.put(r.step);
      w.putString(r.name);
      if (const auto* d = std::get_if<double>(&r.value))
      {
         w.put(std::uint8_t(0));
         w.put(*d);
      }
      else
      {
         w.put(std::uint8_t(1));
         w.putString(std::get<std::string>(r.value));
      }
   }
   return w.release();
}

void decodeResults(const comms::Bytes& bytes, std::vector<LoggedResult>& out)
{
   comms::BufferReader r(bytes);
   const auto n = r.get<std::int64_t>();
   for (std::int64_t i = 0; i < n; ++i)
   {
      LoggedResult lr;
      lr.step = r.get<std::int64_t>();
      lr.name = r.getString();
      if (r.get<std::uint8_t>() == 0) lr.value = r.get<double>();
      else lr.value = r.getString();
      out.push_back(std::move(lr));
   }
}

struct Shared
{
   std::mutex mutex;
   std::vector<WorkerTiming> timings;
};

void runWorker(const RunPlan& plan, const RunHooks& hooks, comms::Transport& t, RunReport& report, Shared& shared)
{
   const bool root = t.isRoot();
   std::int64_t step = 0;
   std::vector<LoggedResult> pending;

   script::HostServices services;
   services.transport = &t;
   services.logResult = [&](const std::string& name, const script::ResultValue& value) {
      LoggedResult r;
      r.step = step;
      r.name = name;
      if (const auto* d = std::get_if<double>(&value)) r.value = *d;
      else r.value = std::get<std::string>(value);
      pending.push_back(std::move(r));
   };
   services.currentStep = [&] { return step; };
   script::Interpreter interp(services);

   inStage(stages::load, [&] {
      if (!plan.scenarioSource.empty())
         interp.loadSource(plan.scenarioSource, plan.scenario.empty() ? "<scenario>" : plan.scenario);
      else interp.loadScenario(plan.scenario);
   });
   const ConfigTree raw = inStage(stages::config, [&] { return interp.invokeConfig(); });

   std::optional<unitsconfig::LatticeScale> scale;
   ConfigTree cfg = inStage(stages::nondimensionalize, [&] {
      if (!unitsconfig::containsQuantities(raw)) return raw;
      scale = unitsconfig::latticeScaleFromTree(raw);
      return unitsconfig::nondimensionalizeTree(raw, *scale);
   });
   applyOverrides(cfg, plan);

   const Settings settings = inStage(stages::validate, [&] {
      const auto diagnostics = unitsconfig::validateConfig(cfg);
      if (!diagnostics.empty())
      {
         std::string msg = "invalid configuration";
         for (const auto& d : diagnostics)
            msg += "\n  " + (d.path.empty() ? std::string("<root>") : d.path) + ": " + d.message;
         throw StageError(stages::validate, msg);
      }
      return readSettings(cfg, plan);
   });
   const bool fs = settings.mode == Mode::Fslbm;

   std::unique_ptr<ResultsStore> store;
   std::int64_t runId = 0;
   if (root && !plan.resultsPath.empty())
      inStage(stages::results, [&] {
         store = std::make_unique<ResultsStore>(plan.resultsPath);
         runId = store->beginRun(plan.scenario.empty() ? "<inline>" : plan.scenario, cfg.toJson());
      });

   freesurface::FreeSurfaceState fsState;
   fsState.params.sigma           = settings.sigma;
   fsState.params.relabelInterval = settings.relabelInterval;

   auto storage = inStage(stages::decompose, [&] {
      auto s = std::make_unique<BlockStorage>(settings.size, settings.blockSize, settings.periodic, t.size());
      lbm::LbmFieldConfig fc;
      fc.flagGhostLayers = fs ? fsState.params.ghostLayers() : 1;
      lbm::addLbmFields(*s, t.rank(), fc);
      if (fs) freesurface::addFreeSurfaceFields(*s, t.rank(), fsState.params);
      return s;
   });
   interp.services().storage = storage.get();

   inStage(stages::domainInit, [&] {
      const bool haveInit = interp.hasCallback(script::callbacks::domainInit);
      for (Block* b : storage->localBlocks(t.rank()))
      {
         const auto n = b->size();
         std::vector<script::CellInit> inits;
         if (haveInit) inits = interp.invokeDomainInitBox(b->interval());
         else inits.resize(std::size_t(b->interval().numCells()));
         std::size_t k = 0;
         for (int z = 0; z < n[2]; ++z)
            for (int y = 0; y < n[1]; ++y)
               for (int x = 0; x < n[0]; ++x)
                  applyCellInit(*b, x, y, z, inits[k++], fs);
      }
      lbm::exchangeBoundarySetup(*storage, t);
      if (fs)
      {
         freesurface::classifyCells(*storage, t, fsState.params);
         fsState.params.validate();
         freesurface::initializeFreeSurface(*storage, fsState, t);
      }
      for (Block* b : storage->localBlocks(t.rank()))
         lbm::computeMacroscopic(*b, lbm::StencilKind::D3Q19);
   });

   RunState state{ *storage, t, cfg, settings.mode, fs ? &fsState : nullptr, step };
   if (hooks.afterInit) hooks.afterInit(state);

   std::unique_ptr<steering::SteeringServer> server;
   if (root && (hooks.serverOptions || plan.steerPort >= 0 || plan.wsPort >= 0))
   {
      inStage(stages::steering, [&] {
         steering::ServerOptions so;
         if (hooks.serverOptions) so = *hooks.serverOptions;
         else
         {
            so.tcpPort = plan.steerPort;
            so.wsPort  = plan.wsPort;
         }
         server = std::make_unique<steering::SteeringServer>(so);
      });
      if (hooks.onListening) hooks.onListening(server->tcpPort(), server->wsPort());
   }
   steering::SteeringController controller(server.get());

   const lbm::TRTParams trt = lbm::TRTParams::fromOmega(settings.omega);
   const freesurface::BubbleTable noBubbles;
   WorkerTiming timing;
   std::vector<LoggedResult> gathered;
   std::vector<std::string> vtkFiles;
   bool shutdown = false;

   for (step = 1; step <= settings.timesteps; ++step)
   {
      const auto start = std::chrono::steady_clock::now();
      inStage(stages::timestep, [&] {
         if (fs) freesurface::fslbmTimestep(*storage, trt, fsState, t);
         else lbm::lbmTimestep(*storage, trt, t);
      });
      if (plan.benchmark && step > warmupSteps)
      {
         timing.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
         ++timing.steps;
      }
      for (Block* b : storage->localBlocks(t.rank()))
         lbm::computeMacroscopic(*b, lbm::StencilKind::D3Q19);

      inStage(stages::endOfTimestep, [&] {
         std::vector<script::Exposure> ex;
         ex.push_back(script::hostExpose("blockstorage", script::BlockCollectionRef{ storage.get(), t.rank() },
                                         script::ExposeMode::ByReference));
         ex.push_back(script::hostExpose("bubbles", fs ? &fsState.bubbles : &noBubbles, script::ExposeMode::ByCopy));
         ex.push_back(script::hostExpose("config", &cfg, script::ExposeMode::ByReference));
         if (scale) ex.push_back(script::hostExpose("scale", &*scale, script::ExposeMode::ByReference));
         ex.push_back(script::hostExpose("step", step, script::ExposeMode::ByCopy));
         interp.invokeCallback(script::callbacks::endOfTimestep, ex);
      });

      state.step = step;
      if (hooks.afterStep) hooks.afterStep(state);

      const bool keepGoing = inStage(stages::steering, [&] { return controller.atTimestepEnd(step, t, interp); });

      inStage(stages::results, [&] {
         const auto parts = t.gather(encodeResults(pending));
         pending.clear();
         if (!root) return;
         const std::size_t first = gathered.size();
         for (const auto& p : parts)
            decodeResults(p, gathered);
         if (store)
         {
            for (std::size_t i = first; i < gathered.size(); ++i)
               store->record({ runId, gathered[i].step, gathered[i].name, gathered[i].value });
            store->flush();
         }
      });

      if (settings.vtkInterval > 0 && step % settings.vtkInterval == 0)
         inStage(stages::vtk, [&] {
            const std::vector<std::string> scalars =
               fs ? std::vector<std::string>{ lbm::fields::density, freesurface::fields::fill }
                  : std::vector<std::string>{ lbm::fields::density };
            const std::string path = writeVtk(*storage, scalars, step, plan.vtkDir, t);
            if (root) vtkFiles.push_back(path);
         });

      if (!keepGoing)
      {
         shutdown = true;
         break;
      }
   }
   const std::int64_t completed = shutdown ? step : settings.timesteps;
   state.step = completed;
   if (hooks.atEnd) hooks.atEnd(state);

   timing.fluidCells = fluidCellCount(*storage, t.rank());
   std::lock_guard<std::mutex> lock(shared.mutex);
   shared.timings[std::size_t(t.rank())] = timing;
   if (root)
   {
      report.stepsCompleted    = completed;
      report.shutdownRequested = shutdown;
      report.runId             = runId;
      report.config            = cfg;
      report.results           = std::move(gathered);
      report.vtkFiles          = std::move(vtkFiles);
      report.sessionSteps      = controller.sessionSteps();
      report.transcript        = controller.transcript();
   }
}

} // namespace

RunReport runSimulation(const RunPlan& plan, const RunHooks& hooks)
{
   std::ostream& out = hooks.out ? *hooks.out : std::cout;
   std::ostream& err = hooks.err ? *hooks.err : std::cerr;
   RunReport report;
   try
   {
      inStage("plan", [&] { plan.validate(); });
      script::initializeRuntime();
      Shared shared;
      shared.timings.resize(std::size_t(plan.workers));
      comms::runWorkers(plan.workers, [&](comms::Transport& t) { runWorker(plan, hooks, t, report, shared); });
      if (plan.benchmark)
      {
         report.benchmark = benchmarkReport(shared.timings);
         out << report.benchmark->format() << std::flush;
      }
   }
   catch (const StageError& e)
   {
      report.failedStage = e.stage();
      report.error       = e.message();
      report.exitStatus  = e.stage() == stages::validate ? 2 : 1;
   }
   catch (const std::exception& e)
   {
      report.failedStage = "run";
      report.error       = e.what();
      report.exitStatus  = 1;
   }
   if (report.exitStatus != 0) err << "blockforge: " << report.failedStage << " failed: " << report.error << std::endl;
   return report;
}

} // namespace blockforge::driver
