//======================================================================================================================
//
//! \file Transport.h
//! \brief Message transport among workers: ordered point-to-point byte messages plus the basic collectives.
//
//======================================================================================================================
#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockforge::comms {

using Bytes = std::vector<std::uint8_t>;
using Tag   = std::uint64_t;

class CommsError : public std::runtime_error
{
 public:
   using std::runtime_error::runtime_error;
};

/// Wire framing of a single message: 8 byte tag, 8 byte payload length (both little-endian), payload.
Bytes encodeMessage(Tag tag, const Bytes& payload);
/// Decodes one framed message; throws CommsError on truncated input.
std::pair<Tag, Bytes> decodeMessage(const Bytes& framed);

//**********************************************************************************************************************
/*!
 *  Messages between a fixed ordered pair of workers arrive in send order. Collectives have to be entered by all workers
 *  in the same sequence; each collective call consumes one internal sequence number used to derive its tags.
 */
//**********************************************************************************************************************
class Transport
{
 public:
   virtual ~Transport() = default;

   virtual int rank() const = 0;
   virtual int size() const = 0;

   virtual void send(int dest, Tag tag, Bytes payload) = 0;
   /// Blocks until a message with `tag` from `src` is available; earlier messages with other tags stay queued.
   virtual Bytes recv(int src, Tag tag) = 0;

   bool isRoot() const { return rank() == 0; }

   void barrier();
   Bytes broadcast(Bytes data, int root = 0);
   /// Root receives every worker's contribution in rank order; others receive an empty vector.
   std::vector<Bytes> gather(Bytes data, int root = 0);
   /// Every worker receives every contribution in rank order.
   std::vector<Bytes> allGather(Bytes data);

 protected:
   Tag nextCollectiveTag();

 private:
   std::uint64_t collectiveSeq_ = 0;
};

class LocalHub;

/// In-process transport; each worker is a thread with its own endpoint into a shared hub of ordered channels.
class LocalTransport final : public Transport
{
 public:
   LocalTransport(std::shared_ptr<LocalHub> hub, int rank);

   int rank() const override { return rank_; }
   int size() const override;
   void send(int dest, Tag tag, Bytes payload) override;
   Bytes recv(int src, Tag tag) override;

 private:
   std::shared_ptr<LocalHub> hub_;
   int rank_;
};

/// Spawns `workerCount` worker threads connected by a LocalHub and runs `body` on each. The first exception thrown by
/// any worker aborts the hub (waking blocked receivers) and is rethrown after all threads joined.
void runWorkers(int workerCount, const std::function<void(Transport&)>& body,
                std::chrono::seconds receiveTimeout = std::chrono::seconds(300));

// ---------------------------------------------------------------------------------------------------------------------
//   Small serialization helpers
// ---------------------------------------------------------------------------------------------------------------------

class BufferWriter
{
 public:
   template <typename T>
   BufferWriter& put(const T& value)
   {
      static_assert(std::is_trivially_copyable_v<T>);
      const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
      bytes_.insert(bytes_.end(), p, p + sizeof(T));
      return *this;
   }
   BufferWriter& putString(const std::string& s);
   BufferWriter& putDoubles(const std::vector<double>& v);

   Bytes& bytes() { return bytes_; }
   Bytes release() { return std::move(bytes_); }

 private:
   Bytes bytes_;
};

class BufferReader
{
 public:
   explicit BufferReader(const Bytes& bytes) : bytes_(bytes) {}

   template <typename T>
   T get()
   {
      static_assert(std::is_trivially_copyable_v<T>);
      if (pos_ + sizeof(T) > bytes_.size()) throw CommsError("buffer underrun");
      T value;
      std::copy_n(bytes_.data() + pos_, sizeof(T), reinterpret_cast<std::uint8_t*>(&value));
      pos_ += sizeof(T);
      return value;
   }
   std::string getString();
   std::vector<double> getDoubles();
   bool atEnd() const { return pos_ == bytes_.size(); }

 private:
   const Bytes& bytes_;
   std::size_t pos_ = 0;
};

} // namespace blockforge::comms
