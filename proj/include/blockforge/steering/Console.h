//======================================================================================================================
//
//! \file Console.h
//! \brief Collective console state between timesteps.
//
//======================================================================================================================
#pragma once

#include "blockforge/comms/Transport.h"
#include "blockforge/steering/CommandAssembler.h"
#include "blockforge/steering/Server.h"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace blockforge::steering {

struct ExecResult
{
   std::string output;    //!< console bytes (text and frames)
   bool resume   = false; //!< resume() was called
   bool shutdown = false; //!< shutdown() was called
};

/// Executes console commands in the worker's interpreter.
class CommandExecutor
{
 public:
   virtual ~CommandExecutor() = default;
   virtual Completeness probe(const std::string& text) = 0;
   virtual ExecResult execute(const std::string& command) = 0;
};

enum class ConsoleOutcome { Resume, Shutdown };

std::string bannerLine(int workers, std::int64_t step);

//**********************************************************************************************************************
/*!
 *  Per-worker steering state. atTimestepEnd() is collective: the root polls the server and broadcasts whether a
 *  session starts; during a session the root reads and assembles commands and broadcasts each one, and every worker
 *  executes it. Only the root's output goes to the client.
 */
//**********************************************************************************************************************
class SteeringController
{
 public:
   /// `server` is used on the root only and may be null (then no session ever starts).
   explicit SteeringController(SteeringServer* server) : server_(server) {}

   /// Returns false if the run should stop.
   bool atTimestepEnd(std::int64_t step, comms::Transport& transport, CommandExecutor& executor);

   /// Runs a session that is already connected (root) or follows the root's broadcasts (others).
   ConsoleOutcome runSession(SessionChannel* session, std::int64_t step, comms::Transport& transport,
                             CommandExecutor& executor);

   const std::vector<std::string>& transcript() const { return transcript_; }
   const std::vector<std::int64_t>& sessionSteps() const { return sessionSteps_; }

 private:
   SteeringServer* server_;
   std::vector<std::string> transcript_;
   std::vector<std::int64_t> sessionSteps_;
};

} // namespace blockforge::steering
