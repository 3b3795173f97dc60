//======================================================================================================================
//
//! \file Console.cpp
//
//======================================================================================================================
#include "blockforge/steering/Console.h"

#include "blockforge/comms/Collectives.h"

namespace blockforge::steering {

namespace {
// broadcast message kinds
constexpr char cmdExecute  = 'C';
constexpr char cmdResume   = 'R';
constexpr char cmdShutdown = 'S';
} // namespace

std::string bannerLine(int workers, std::int64_t step)
{
   return "blockforge console | workers=" + std::to_string(workers) + " | step=" + std::to_string(step) + "\n";
}

bool SteeringController::atTimestepEnd(std::int64_t step, comms::Transport& transport, CommandExecutor& executor)
{
   std::unique_ptr<SessionChannel> session;
   if (transport.isRoot() && server_) session = server_->poll();
   const std::string flag = comms::broadcastLine(session ? "1" : "0", transport);
   if (flag != "1") return true;
   const ConsoleOutcome outcome = runSession(session.get(), step, transport, executor);
   if (session) session->close();
   return outcome == ConsoleOutcome::Resume;
}

ConsoleOutcome SteeringController::runSession(SessionChannel* session, std::int64_t step,
                                              comms::Transport& transport, CommandExecutor& executor)
{
   sessionSteps_.push_back(step);
   if (!transport.isRoot())
   {
      for (;;)
      {
         const std::string msg = comms::broadcastLine("", transport);
         if (msg.empty() || msg[0] == cmdResume) return ConsoleOutcome::Resume;
         if (msg[0] == cmdShutdown) return ConsoleOutcome::Shutdown;
         transcript_.push_back(msg.substr(1));
         executor.execute(msg.substr(1));
      }
   }

   CommandAssembler assembler([&](const std::string& text) { return executor.probe(text); });
   session->write(bannerLine(transport.size(), step));
   session->write(assembler.prompt());
   auto idle = [&] {
      if (server_) server_->rejectPending();
   };
   std::string line;
   while (session->readLine(line, idle))
   {
      auto command = assembler.feed(line);
      if (!command)
      {
         session->write(assembler.prompt());
         continue;
      }
      comms::broadcastLine(std::string(1, cmdExecute) + *command, transport);
      transcript_.push_back(*command);
      const ExecResult r = executor.execute(*command);
      session->write(r.output);
      if (r.shutdown)
      {
         comms::broadcastLine(std::string(1, cmdShutdown), transport);
         session->write("simulation stopped\n");
         return ConsoleOutcome::Shutdown;
      }
      if (r.resume)
      {
         comms::broadcastLine(std::string(1, cmdResume), transport);
         session->write("simulation resumed\n");
         return ConsoleOutcome::Resume;
      }
      session->write(assembler.prompt());
   }
   // client went away
   comms::broadcastLine(std::string(1, cmdResume), transport);
   return ConsoleOutcome::Resume;
}

} // namespace blockforge::steering
