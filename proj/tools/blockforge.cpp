//======================================================================================================================
//
//! \file blockforge.cpp
//! \brief Command line entry point.
//
//======================================================================================================================
#include "blockforge/driver/Driver.h"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv)
{
   using namespace blockforge;

   CLI::App app{ "blockforge: scriptable block-structured lattice Boltzmann solver" };
   app.require_subcommand(1);

   driver::RunPlan plan;
   std::int64_t timesteps = 0;
   std::string mode;
   auto* run = app.add_subcommand("run", "Run a scenario script");
   run->add_option("scenario", plan.scenario, "Scenario script")->required()->check(CLI::ExistingFile);
   run->add_option("--workers", plan.workers, "Number of workers")->check(CLI::PositiveNumber);
   auto* tsOpt = run->add_option("--timesteps", timesteps, "Number of timesteps (overrides the config)")
                    ->check(CLI::PositiveNumber);
   run->add_option("--vtk-dir", plan.vtkDir, "Directory of the VTK output");
   run->add_option("--results", plan.resultsPath, "SQLite results file");
   run->add_option("--steer-port", plan.steerPort, "TCP console port (0: any free port)")->check(CLI::Range(0, 65535));
   run->add_option("--ws-port", plan.wsPort, "WebSocket console port (0: any free port)")->check(CLI::Range(0, 65535));
   run->add_flag("--benchmark", plan.benchmark, "Report MLUP/s");
   run->add_option("--mode", mode, "Override the solver mode")->check(CLI::IsMember({ "lbm", "fslbm" }));

   CLI11_PARSE(app, argc, argv);

   if (*tsOpt) plan.timesteps = timesteps;
   if (!mode.empty()) plan.mode = mode == "fslbm" ? driver::Mode::Fslbm : driver::Mode::Lbm;

   driver::RunHooks hooks;
   hooks.onListening = [](int tcp, int ws) {
      if (tcp >= 0) std::cout << "steering console on tcp port " << tcp << std::endl;
      if (ws >= 0) std::cout << "websocket console on port " << ws << " path /console" << std::endl;
   };
   const auto report = driver::runSimulation(plan, hooks);
   if (report.exitStatus == 0)
      std::cout << "completed " << report.stepsCompleted << " timesteps"
                << (report.shutdownRequested ? " (shutdown from console)" : "") << std::endl;
   return report.exitStatus;
}
