//======================================================================================================================
//
//! \file Server.h
//! \brief Interrupt sources and console sessions: TCP, websocket and the user signal.
//
//======================================================================================================================
#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

namespace blockforge::steering {

class SteeringError : public std::runtime_error
{
 public:
   using std::runtime_error::runtime_error;
};

/// One connected console. Reads block; `idle` is invoked periodically while waiting.
class SessionChannel
{
 public:
   virtual ~SessionChannel() = default;

   /// Next input line without line terminator (CR LF and LF accepted); false once the peer is gone.
   virtual bool readLine(std::string& line, const std::function<void()>& idle) = 0;
   /// Raw console output: text lines, prompts and frames.
   virtual void write(const std::string& bytes) = 0;
   virtual void close() = 0;
   virtual const char* kind() const = 0;
};

struct ServerOptions
{
   int tcpPort = -1;              //!< -1 disabled, 0 any free port
   int wsPort  = -1;              //!< -1 disabled, 0 any free port
   std::string wsPath = "/console";
   bool signal = false;           //!< SIGUSR1 opens a console on signalIn/signalOut
   int signalIn  = 0;
   int signalOut = 1;
   std::string bindAddress = "127.0.0.1";
};

//**********************************************************************************************************************
/*!
 *  Listening side, owned by the root worker. Pending connections wait in the kernel backlog and are picked up by
 *  poll() between timesteps, so a client that connected during step N is seen at the end of step N.
 */
//**********************************************************************************************************************
class SteeringServer
{
 public:
   explicit SteeringServer(const ServerOptions& options);
   ~SteeringServer();
   SteeringServer(const SteeringServer&) = delete;
   SteeringServer& operator=(const SteeringServer&) = delete;

   int tcpPort() const { return tcpPort_; }
   int wsPort() const { return wsPort_; }

   /// Non-blocking: a new session if a client or the signal is pending. Further pending clients are told "busy".
   std::unique_ptr<SessionChannel> poll();
   /// Rejects clients that connect while a session is active.
   void rejectPending();

 private:
   std::unique_ptr<SessionChannel> acceptTcp(bool reject);
   std::unique_ptr<SessionChannel> acceptWs(bool reject);

   ServerOptions options_;
   int tcpFd_ = -1, wsFd_ = -1;
   int tcpPort_ = -1, wsPort_ = -1;
};

/// Flags a pending signal console, as the SIGUSR1 handler does.
void raiseSignalInterrupt();
bool signalInterruptPending();

std::unique_ptr<SessionChannel> makeStreamSession(int inFd, int outFd);

namespace websocket {
/// Sec-WebSocket-Accept value for a client key.
std::string acceptKey(const std::string& clientKey);
/// Server to client text frame (unmasked).
std::string encodeTextFrame(const std::string& payload);
/// Client to server text frame with the given mask.
std::string encodeMaskedTextFrame(const std::string& payload, const unsigned char mask[4]);
} // namespace websocket

} // namespace blockforge::steering
