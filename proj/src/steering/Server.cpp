//======================================================================================================================
//
//! \file Server.cpp
//
//======================================================================================================================
#include "blockforge/steering/Server.h"

#include "blockforge/steering/Frame.h"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <openssl/evp.h>
#include <openssl/sha.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cctype>
#include <csignal>
#include <cstring>

namespace blockforge::steering {

namespace {

std::atomic<bool> signalPending{ false };

extern "C" void onUserSignal(int) { signalPending.store(true); }

void writeAll(int fd, const char* data, std::size_t n)
{
   while (n > 0)
   {
      const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
      if (w < 0 && errno == ENOTSOCK)
      {
         const ssize_t v = ::write(fd, data, n);
         if (v <= 0) return;
         data += v;
         n -= std::size_t(v);
         continue;
      }
      if (w < 0 && errno == EINTR) continue;
      if (w <= 0) return;
      data += w;
      n -= std::size_t(w);
   }
}

/// Waits for readability; returns false on timeout.
bool waitReadable(int fd, int timeoutMs)
{
   pollfd p{ fd, POLLIN, 0 };
   const int r = ::poll(&p, 1, timeoutMs);
   return r > 0;
}

/// recv or read, depending on the descriptor
ssize_t readSome(int fd, char* buf, std::size_t n)
{
   ssize_t r = ::recv(fd, buf, n, 0);
   if (r < 0 && errno == ENOTSOCK) r = ::read(fd, buf, n);
   return r;
}

int listenOn(const std::string& address, int port, int& boundPort)
{
   const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
   if (fd < 0) throw SteeringError("socket() failed");
   const int one = 1;
   ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
   sockaddr_in addr{};
   addr.sin_family = AF_INET;
   addr.sin_port   = htons(static_cast<std::uint16_t>(port));
   if (::inet_pton(AF_INET, address.c_str(), &addr.sin_addr) != 1)
   {
      ::close(fd);
      throw SteeringError("invalid bind address " + address);
   }
   if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd, 16) != 0)
   {
      ::close(fd);
      throw SteeringError("cannot listen on port " + std::to_string(port) + ": " + std::strerror(errno));
   }
   socklen_t len = sizeof addr;
   ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
   boundPort = ntohs(addr.sin_port);
   ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK);
   return fd;
}

int acceptOne(int listenFd)
{
   if (listenFd < 0) return -1;
   const int fd = ::accept(listenFd, nullptr, nullptr);
   if (fd < 0) return -1;
   ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) & ~O_NONBLOCK);
   const int one = 1;
   ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
   return fd;
}

//----------------------------------------------------------------------------------------------------------------------

class StreamSession final : public SessionChannel
{
 public:
   StreamSession(int inFd, int outFd, bool owns, const char* kind) : in_(inFd), out_(outFd), owns_(owns), kind_(kind)
   {}
   ~StreamSession() override { close(); }

   bool readLine(std::string& line, const std::function<void()>& idle) override
   {
      for (;;)
      {
         const std::size_t eol = buffer_.find('\n');
         if (eol != std::string::npos)
         {
            line = buffer_.substr(0, eol);
            buffer_.erase(0, eol + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return true;
         }
         if (in_ < 0 || eof_)
         {
            if (buffer_.empty()) return false;
            line.swap(buffer_);
            buffer_.clear();
            return true;
         }
         if (!waitReadable(in_, 50))
         {
            if (idle) idle();
            continue;
         }
         char buf[4096];
         const ssize_t r = readSome(in_, buf, sizeof buf);
         if (r <= 0) eof_ = true;
         else buffer_.append(buf, std::size_t(r));
      }
   }

   void write(const std::string& bytes) override
   {
      if (out_ >= 0) writeAll(out_, bytes.data(), bytes.size());
   }

   void close() override
   {
      if (owns_ && in_ >= 0)
      {
         ::shutdown(in_, SHUT_RDWR);
         ::close(in_);
      }
      in_ = out_ = -1;
   }

   const char* kind() const override { return kind_; }

 private:
   int in_, out_;
   bool owns_;
   const char* kind_;
   bool eof_ = false;
   std::string buffer_;
};

//----------------------------------------------------------------------------------------------------------------------

class WebSocketSession final : public SessionChannel
{
 public:
   explicit WebSocketSession(int fd) : fd_(fd) {}
   ~WebSocketSession() override { close(); }

   bool readLine(std::string& line, const std::function<void()>& idle) override
   {
      for (;;)
      {
         if (!lines_.empty())
         {
            line = lines_.substr(0, lines_.find('\n'));
            lines_.erase(0, std::min(lines_.size(), line.size() + 1));
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return true;
         }
         if (fd_ < 0) return false;
         if (!waitReadable(fd_, 50))
         {
            if (idle) idle();
            continue;
         }
         std::string message;
         if (!readMessage(message))
         {
            close();
            return false;
         }
         if (message.empty() || message.back() != '\n') message += '\n';
         lines_ += message;
      }
   }

   void write(const std::string& bytes) override
   {
      if (fd_ < 0) return;
      // one message per line, prompt or frame
      FrameDecoder decoder;
      decoder.feed(bytes);
      while (auto item = decoder.flush())
      {
         const std::string frame = websocket::encodeTextFrame(item->raw);
         writeAll(fd_, frame.data(), frame.size());
      }
   }

   void close() override
   {
      if (fd_ < 0) return;
      const char closeFrame[2] = { char(0x88), 0 };
      writeAll(fd_, closeFrame, 2);
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
   }

   const char* kind() const override { return "websocket"; }

 private:
   bool readExact(char* buf, std::size_t n)
   {
      while (n > 0)
      {
         const ssize_t r = ::recv(fd_, buf, n, 0);
         if (r < 0 && errno == EINTR) continue;
         if (r <= 0) return false;
         buf += r;
         n -= std::size_t(r);
      }
      return true;
   }

   /// One complete text message; control frames are handled on the way.
   bool readMessage(std::string& out)
   {
      out.clear();
      for (;;)
      {
         unsigned char h[2];
         if (!readExact(reinterpret_cast<char*>(h), 2)) return false;
         const bool fin     = h[0] & 0x80;
         const int opcode   = h[0] & 0x0f;
         const bool masked  = h[1] & 0x80;
         std::uint64_t len  = h[1] & 0x7f;
         if (len == 126)
         {
            unsigned char e[2];
            if (!readExact(reinterpret_cast<char*>(e), 2)) return false;
            len = (std::uint64_t(e[0]) << 8) | e[1];
         }
         else if (len == 127)
         {
            unsigned char e[8];
            if (!readExact(reinterpret_cast<char*>(e), 8)) return false;
            len = 0;
            for (unsigned char b : e)
               len = (len << 8) | b;
         }
         if (len > (1u << 26)) return false;
         unsigned char mask[4] = { 0, 0, 0, 0 };
         if (masked && !readExact(reinterpret_cast<char*>(mask), 4)) return false;
         std::string payload(len, '\0');
         if (len > 0 && !readExact(payload.data(), len)) return false;
         for (std::size_t i = 0; i < payload.size(); ++i)
            payload[i] = char(payload[i] ^ mask[i % 4]);

         switch (opcode)
         {
         case 0x8: return false;
         case 0x9: {
            std::string pong;
            pong += char(0x8a);
            pong += char(payload.size());
            pong += payload.substr(0, 125);
            writeAll(fd_, pong.data(), pong.size());
            continue;
         }
         case 0xa: continue;
         default:
            out += payload;
            if (fin) return true;
         }
      }
   }

   int fd_;
   std::string lines_;
};

/// Reads the upgrade request; returns the client key or an empty string on failure.
std::string readHandshake(int fd, const std::string& path)
{
   std::string request;
   char buf[1024];
   while (request.find("\r\n\r\n") == std::string::npos)
   {
      if (!waitReadable(fd, 2000)) return {};
      const ssize_t r = ::recv(fd, buf, sizeof buf, 0);
      if (r <= 0 || request.size() > 16384) return {};
      request.append(buf, std::size_t(r));
   }
   const std::size_t sp1 = request.find(' '), sp2 = request.find(' ', sp1 + 1);
   if (request.compare(0, sp1, "GET") != 0 || request.substr(sp1 + 1, sp2 - sp1 - 1) != path)
   {
      const std::string notFound = "HTTP/1.1 404 Not Found\r\nContent-Length: 0\r\nConnection: close\r\n\r\n";
      writeAll(fd, notFound.data(), notFound.size());
      return {};
   }
   std::string key;
   std::size_t pos = request.find("\r\n") + 2;
   while (pos < request.size())
   {
      const std::size_t end = request.find("\r\n", pos);
      const std::string headerLine = request.substr(pos, end - pos);
      pos = end + 2;
      const std::size_t colon = headerLine.find(':');
      if (colon == std::string::npos) continue;
      std::string name = headerLine.substr(0, colon);
      for (auto& c : name)
         c = char(std::tolower(static_cast<unsigned char>(c)));
      if (name == "sec-websocket-key")
      {
         key = headerLine.substr(colon + 1);
         key.erase(0, key.find_first_not_of(" \t"));
         key.erase(key.find_last_not_of(" \t") + 1);
      }
   }
   if (key.empty()) return {};
   const std::string response = "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                                "Sec-WebSocket-Accept: " +
                                websocket::acceptKey(key) + "\r\n\r\n";
   writeAll(fd, response.data(), response.size());
   return key;
}

} // namespace

namespace websocket {

std::string acceptKey(const std::string& clientKey)
{
   const std::string s = clientKey + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
   unsigned char digest[SHA_DIGEST_LENGTH];
   SHA1(reinterpret_cast<const unsigned char*>(s.data()), s.size(), digest);
   unsigned char out[64];
   const int n = EVP_EncodeBlock(out, digest, SHA_DIGEST_LENGTH);
   return std::string(reinterpret_cast<char*>(out), std::size_t(n));
}

namespace {
std::string frameHeader(std::size_t n, bool masked)
{
   std::string h;
   h += char(0x81);
   const char maskBit = masked ? char(0x80) : char(0);
   if (n < 126) h += char(maskBit | char(n));
   else if (n < 65536)
   {
      h += char(maskBit | 126);
      h += char((n >> 8) & 0xff);
      h += char(n & 0xff);
   }
   else
   {
      h += char(maskBit | 127);
      for (int i = 7; i >= 0; --i)
         h += char((std::uint64_t(n) >> (8 * i)) & 0xff);
   }
   return h;
}
} // namespace

std::string encodeTextFrame(const std::string& payload) { return frameHeader(payload.size(), false) + payload; }

std::string encodeMaskedTextFrame(const std::string& payload, const unsigned char mask[4])
{
   std::string out = frameHeader(payload.size(), true);
   out.append(reinterpret_cast<const char*>(mask), 4);
   for (std::size_t i = 0; i < payload.size(); ++i)
      out += char(payload[i] ^ char(mask[i % 4]));
   return out;
}

} // namespace websocket

SteeringServer::SteeringServer(const ServerOptions& options) : options_(options)
{
   if (options.tcpPort >= 0) tcpFd_ = listenOn(options.bindAddress, options.tcpPort, tcpPort_);
   if (options.wsPort >= 0) wsFd_ = listenOn(options.bindAddress, options.wsPort, wsPort_);
   if (options.signal)
   {
      struct sigaction sa{};
      sa.sa_handler = onUserSignal;
      sigemptyset(&sa.sa_mask);
      sa.sa_flags = SA_RESTART;
      ::sigaction(SIGUSR1, &sa, nullptr);
   }
}

SteeringServer::~SteeringServer()
{
   if (tcpFd_ >= 0) ::close(tcpFd_);
   if (wsFd_ >= 0) ::close(wsFd_);
}

std::unique_ptr<SessionChannel> SteeringServer::acceptTcp(bool reject)
{
   const int fd = acceptOne(tcpFd_);
   if (fd < 0) return nullptr;
   if (reject)
   {
      writeAll(fd, "busy\n", 5);
      ::shutdown(fd, SHUT_RDWR);
      ::close(fd);
      return nullptr;
   }
   return std::make_unique<StreamSession>(fd, fd, true, "tcp");
}

std::unique_ptr<SessionChannel> SteeringServer::acceptWs(bool reject)
{
   const int fd = acceptOne(wsFd_);
   if (fd < 0) return nullptr;
   if (readHandshake(fd, options_.wsPath).empty())
   {
      ::close(fd);
      return nullptr;
   }
   auto session = std::make_unique<WebSocketSession>(fd);
   if (reject)
   {
      session->write("busy\n");
      session->close();
      return nullptr;
   }
   return session;
}

std::unique_ptr<SessionChannel> SteeringServer::poll()
{
   std::unique_ptr<SessionChannel> session = acceptTcp(false);
   if (!session) session = acceptWs(false);
   if (!session && signalPending.exchange(false)) session = makeStreamSession(options_.signalIn, options_.signalOut);
   if (session) rejectPending();
   return session;
}

void SteeringServer::rejectPending()
{
   for (int i = 0; i < 64 && tcpFd_ >= 0 && waitReadable(tcpFd_, 0); ++i)
      acceptTcp(true);
   for (int i = 0; i < 64 && wsFd_ >= 0 && waitReadable(wsFd_, 0); ++i)
      acceptWs(true);
}

void raiseSignalInterrupt() { signalPending.store(true); }

bool signalInterruptPending() { return signalPending.load(); }

std::unique_ptr<SessionChannel> makeStreamSession(int inFd, int outFd)
{
   return std::make_unique<StreamSession>(inFd, outFd, false, "stream");
}

} // namespace blockforge::steering
