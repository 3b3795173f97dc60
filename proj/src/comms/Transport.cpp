//======================================================================================================================
//
//! \file Transport.cpp
//
//======================================================================================================================
#include "blockforge/comms/Transport.h"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>

namespace blockforge::comms {

namespace {
void putLE64(Bytes& out, std::uint64_t v)
{
   for (int i = 0; i < 8; ++i)
      out.push_back(std::uint8_t(v >> (8 * i)));
}
std::uint64_t getLE64(const Bytes& in, std::size_t pos)
{
   std::uint64_t v = 0;
   for (int i = 0; i < 8; ++i)
      v |= std::uint64_t(in[pos + std::size_t(i)]) << (8 * i);
   return v;
}

// collective tags live in their own range so they never collide with exchange tags
constexpr Tag kCollectiveBit = Tag(1) << 63;
} // namespace

Bytes encodeMessage(Tag tag, const Bytes& payload)
{
   Bytes out;
   out.reserve(16 + payload.size());
   putLE64(out, tag);
   putLE64(out, payload.size());
   out.insert(out.end(), payload.begin(), payload.end());
   return out;
}

std::pair<Tag, Bytes> decodeMessage(const Bytes& framed)
{
   if (framed.size() < 16) throw CommsError("truncated message header");
   const Tag tag     = getLE64(framed, 0);
   const auto length = getLE64(framed, 8);
   if (framed.size() - 16 != length) throw CommsError("message length mismatch");
   return { tag, Bytes(framed.begin() + 16, framed.end()) };
}

// ---------------------------------------------------------------------------------------------------------------------
//   Collectives (linear, rank order; deterministic results independent of arrival order)
// ---------------------------------------------------------------------------------------------------------------------

Tag Transport::nextCollectiveTag()
{
   return kCollectiveBit | collectiveSeq_++;
}

void Transport::barrier()
{
   allGather({});
}

Bytes Transport::broadcast(Bytes data, int root)
{
   const Tag tag = nextCollectiveTag();
   if (rank() == root)
   {
      for (int r = 0; r < size(); ++r)
         if (r != root) send(r, tag, data);
      return data;
   }
   return recv(root, tag);
}

std::vector<Bytes> Transport::gather(Bytes data, int root)
{
   const Tag tag = nextCollectiveTag();
   if (rank() != root)
   {
      send(root, tag, std::move(data));
      return {};
   }
   std::vector<Bytes> all(static_cast<std::size_t>(size()));
   for (int r = 0; r < size(); ++r)
      all[std::size_t(r)] = r == root ? data : recv(r, tag);
   return all;
}

std::vector<Bytes> Transport::allGather(Bytes data)
{
   auto all = gather(std::move(data), 0);
   BufferWriter w;
   if (isRoot())
   {
      w.put(std::uint64_t(all.size()));
      for (const auto& b : all)
      {
         w.put(std::uint64_t(b.size()));
         w.bytes().insert(w.bytes().end(), b.begin(), b.end());
      }
   }
   Bytes packed = broadcast(w.release(), 0);
   if (isRoot()) return all;

   BufferReader r(packed);
   const auto n = r.get<std::uint64_t>();
   std::vector<Bytes> out;
   for (std::uint64_t i = 0; i < n; ++i)
   {
      const auto len = r.get<std::uint64_t>();
      Bytes b;
      b.reserve(len);
      for (std::uint64_t k = 0; k < len; ++k)
         b.push_back(r.get<std::uint8_t>());
      out.push_back(std::move(b));
   }
   return out;
}

// ---------------------------------------------------------------------------------------------------------------------
//   In-process hub
// ---------------------------------------------------------------------------------------------------------------------

class LocalHub
{
 public:
   LocalHub(int workers, std::chrono::seconds timeout)
      : workers_(workers), timeout_(timeout), inbox_(std::size_t(workers)), channels_(std::size_t(workers * workers))
   {}

   int workers() const { return workers_; }

   void post(int src, int dest, Bytes framed)
   {
      auto& box = inbox_[std::size_t(dest)];
      {
         std::lock_guard lock(box.mutex);
         channel(src, dest).push_back(std::move(framed));
      }
      box.cv.notify_all();
   }

   Bytes take(int src, int dest, Tag tag)
   {
      auto& box = inbox_[std::size_t(dest)];
      std::unique_lock lock(box.mutex);
      auto& queue   = channel(src, dest);
      Bytes result;
      const bool ok = box.cv.wait_for(lock, timeout_, [&] {
         if (aborted_) return true;
         for (auto it = queue.begin(); it != queue.end(); ++it)
         {
            if (getLE64(*it, 0) == tag)
            {
               result = decodeMessage(*it).second;
               queue.erase(it);
               return true;
            }
         }
         return false;
      });
      if (aborted_) throw CommsError("transport aborted");
      if (!ok)
         throw CommsError("receive timeout: worker " + std::to_string(dest) + " waiting for tag " +
                          std::to_string(tag) + " from worker " + std::to_string(src));
      return result;
   }

   void abort()
   {
      aborted_ = true;
      for (auto& box : inbox_)
      {
         std::lock_guard lock(box.mutex);
         box.cv.notify_all();
      }
   }

 private:
   struct Inbox
   {
      std::mutex mutex;
      std::condition_variable cv;
   };

   std::deque<Bytes>& channel(int src, int dest) { return channels_[std::size_t(src * workers_ + dest)]; }

   int workers_;
   std::chrono::seconds timeout_;
   std::vector<Inbox> inbox_;
   std::vector<std::deque<Bytes>> channels_;
   std::atomic<bool> aborted_{ false };
};

LocalTransport::LocalTransport(std::shared_ptr<LocalHub> hub, int rank) : hub_(std::move(hub)), rank_(rank) {}

int LocalTransport::size() const
{
   return hub_->workers();
}

void LocalTransport::send(int dest, Tag tag, Bytes payload)
{
   if (dest < 0 || dest >= size()) throw CommsError("send to invalid worker " + std::to_string(dest));
   hub_->post(rank_, dest, encodeMessage(tag, payload));
}

Bytes LocalTransport::recv(int src, Tag tag)
{
   if (src < 0 || src >= size()) throw CommsError("receive from invalid worker " + std::to_string(src));
   return hub_->take(src, rank_, tag);
}

void runWorkers(int workerCount, const std::function<void(Transport&)>& body, std::chrono::seconds receiveTimeout)
{
   if (workerCount < 1) throw CommsError("worker count must be >= 1");
   auto hub = std::make_shared<LocalHub>(workerCount, receiveTimeout);
   std::mutex errorMutex;
   std::exception_ptr firstError;

   auto run = [&](int rank) {
      try
      {
         LocalTransport transport(hub, rank);
         body(transport);
      }
      catch (...)
      {
         {
            std::lock_guard lock(errorMutex);
            if (!firstError) firstError = std::current_exception();
         }
         hub->abort();
      }
   };

   std::vector<std::thread> threads;
   for (int r = 1; r < workerCount; ++r)
      threads.emplace_back(run, r);
   run(0);
   for (auto& t : threads)
      t.join();
   if (firstError) std::rethrow_exception(firstError);
}

// ---------------------------------------------------------------------------------------------------------------------
//   Serialization helpers
// ---------------------------------------------------------------------------------------------------------------------

BufferWriter& BufferWriter::putString(const std::string& s)
{
   put(std::uint64_t(s.size()));
   bytes_.insert(bytes_.end(), s.begin(), s.end());
   return *this;
}

BufferWriter& BufferWriter::putDoubles(const std::vector<double>& v)
{
   put(std::uint64_t(v.size()));
   const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
   bytes_.insert(bytes_.end(), p, p + v.size() * sizeof(double));
   return *this;
}

std::string BufferReader::getString()
{
   const auto n = get<std::uint64_t>();
   if (pos_ + n > bytes_.size()) throw CommsError("buffer underrun");
   std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
   pos_ += n;
   return s;
}

std::vector<double> BufferReader::getDoubles()
{
   const auto n = get<std::uint64_t>();
   if (pos_ + n * sizeof(double) > bytes_.size()) throw CommsError("buffer underrun");
   std::vector<double> v(n);
   std::copy_n(bytes_.data() + pos_, n * sizeof(double), reinterpret_cast<std::uint8_t*>(v.data()));
   pos_ += n * sizeof(double);
   return v;
}

} // namespace blockforge::comms
