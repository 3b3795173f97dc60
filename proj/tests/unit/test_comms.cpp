#include "doctest.h"

#include "blockforge/comms/Collectives.h"
#include "blockforge/comms/GhostExchange.h"
#include "blockforge/comms/Transport.h"

#include <cmath>
#include <mutex>
#include <numeric>
#include <random>

using namespace blockforge;
using namespace blockforge::comms;
using blockgrid::BlockStorage;
using blockgrid::Vec3i;

TEST_CASE("message framing")
{
   Bytes payload{ 1, 2, 3 };
   Bytes framed = encodeMessage(0x0102030405060708ULL, payload);
   REQUIRE(framed.size() == 19);
   CHECK(framed[0] == 0x08);
   CHECK(framed[7] == 0x01);
   CHECK(framed[8] == 3);
   auto [tag, back] = decodeMessage(framed);
   CHECK(tag == 0x0102030405060708ULL);
   CHECK(back == payload);
   framed.pop_back();
   CHECK_THROWS_AS(decodeMessage(framed), CommsError);
}

TEST_CASE("ordered delivery and tag matching")
{
   runWorkers(2, [](Transport& t) {
      if (t.rank() == 0)
      {
         for (std::uint8_t i = 0; i < 20; ++i)
            t.send(1, i % 2, Bytes{ i });
      }
      else
      {
         for (std::uint8_t i = 1; i < 20; i += 2)
            CHECK(t.recv(0, 1) == Bytes{ i });
         for (std::uint8_t i = 0; i < 20; i += 2)
            CHECK(t.recv(0, 0) == Bytes{ i });
      }
   });
}

TEST_CASE("worker exceptions propagate")
{
   CHECK_THROWS(runWorkers(3, [](Transport& t) {
      if (t.rank() == 2) throw std::runtime_error("boom");
      t.barrier();
   }));
}

namespace {
void fillGlobal(BlockStorage& s, int worker)
{
   for (auto* b : s.localBlocks(worker))
   {
      auto& f = b->getField("v");
      for (int z = 0; z < f.zSize(); ++z)
         for (int y = 0; y < f.ySize(); ++y)
            for (int x = 0; x < f.xSize(); ++x)
            {
               const auto g = b->toGlobal(x, y, z);
               for (int q = 0; q < f.fSize(); ++q)
                  f(x, y, z, q) = 10000.0 * g[2] + 100.0 * g[1] + g[0] + 0.1 * q;
            }
   }
}

int wrap(int v, int n) { return ((v % n) + n) % n; }
} // namespace

TEST_CASE("ghost exchange between two blocks")
{
   runWorkers(2, [](Transport& t) {
      BlockStorage s({ 4, 2, 2 }, { 2, 2, 2 }, { false, false, false }, 2);
      s.addFieldToLocalBlocks(t.rank(), "id", 1, 1);
      for (auto* b : s.localBlocks(t.rank()))
         b->getField("id").fill(double(b->id()) + 5.0);
      ExchangePlan plan(s, t.rank(), 1);
      exchangeGhostLayers(plan, s, { "id" }, t);
      for (auto* b : s.localBlocks(t.rank()))
      {
         auto& f  = b->getField("id");
         const int gx = b->id() == 0 ? 2 : -1;
         const double peer = double(1 - b->id()) + 5.0;
         for (int z = 0; z < 2; ++z)
            for (int y = 0; y < 2; ++y)
               CHECK(f(gx, y, z) == peer);
      }
   });
}

TEST_CASE("periodic single block wrap")
{
   runWorkers(1, [](Transport& t) {
      BlockStorage s({ 3, 3, 3 }, { 3, 3, 3 }, { true, false, false }, 1);
      s.addFieldToLocalBlocks(0, "v", 1, 1);
      fillGlobal(s, 0);
      exchangeGhostLayers(ExchangePlan(s, 0, 1), s, { "v" }, t);
      auto& f = s.blocks()[0].getField("v");
      for (int z = 0; z < 3; ++z)
         for (int y = 0; y < 3; ++y)
         {
            CHECK(f(-1, y, z) == f(2, y, z));
            CHECK(f(3, y, z) == f(0, y, z));
         }
   });
}

TEST_CASE("8-block exchange matches global-coordinate oracle")
{
   for (int g : { 1, 2 })
      for (int workers : { 1, 3, 4 })
         runWorkers(workers, [g](Transport& t) {
            const Vec3i n{ 8, 8, 8 };
            BlockStorage s(n, { 4, 4, 4 }, { true, true, true }, t.size());
            s.addFieldToLocalBlocks(t.rank(), "v", 2, g);
            fillGlobal(s, t.rank());
            const ExchangePlan plan(s, t.rank(), g);
            exchangeGhostLayers(plan, s, { "v" }, t);
            exchangeGhostLayers(plan, s, { "v" }, t); // idempotent
            for (auto* b : s.localBlocks(t.rank()))
            {
               auto& f = b->getField("v");
               for (int z = -g; z < 4 + g; ++z)
                  for (int y = -g; y < 4 + g; ++y)
                     for (int x = -g; x < 4 + g; ++x)
                     {
                        auto gc = b->toGlobal(x, y, z);
                        for (int q = 0; q < 2; ++q)
                           REQUIRE(f(x, y, z, q) ==
                                   10000.0 * wrap(gc[2], 8) + 100.0 * wrap(gc[1], 8) + wrap(gc[0], 8) + 0.1 * q);
                     }
            }
         });
}

TEST_CASE("exchange errors")
{
   runWorkers(1, [](Transport& t) {
      BlockStorage s({ 4, 4, 4 }, { 2, 2, 2 }, { false, false, false }, 1);
      s.addFieldToLocalBlocks(0, "a", 1, 1);
      s.addFieldToLocalBlocks(0, "b", 1, 2);
      ExchangePlan plan(s, 0, 1);
      CHECK_THROWS_AS(exchangeGhostLayers(plan, s, { "a", "b" }, t), CommsError);
      CHECK_THROWS_AS(exchangeGhostLayers(plan, s, { "missing" }, t), CommsError);
      CHECK_THROWS_AS(ExchangePlan(s, 0, 0), CommsError);
      CHECK_THROWS_AS(ExchangePlan(s, 0, 3), CommsError);
   });
}

TEST_CASE("reduce_scalar")
{
   runWorkers(3, [](Transport& t) {
      const double vals[] = { 1.0, 3.0, 2.0 };
      auto r = reduceScalar(vals[t.rank()], ReduceOp::Max, t);
      CHECK(r.has_value() == t.isRoot());
      if (r) CHECK(*r == 3.0);
      CHECK(allReduceScalar(vals[t.rank()], ReduceOp::Min, t) == 1.0);
   });
   runWorkers(1, [](Transport& t) { CHECK(*reduceScalar(4.5, ReduceOp::Sum, t) == 4.5); });

   std::mt19937 rng(7);
   std::uniform_real_distribution<double> dist(-1, 1);
   std::vector<double> values(100);
   for (auto& v : values)
      v = dist(rng);
   double serial = 0.0;
   // fold in rank order: worker w holds values[25w .. 25w+24], partial sums then combined
   std::vector<double> partial(4, 0.0);
   for (std::size_t i = 0; i < 100; ++i)
      partial[i / 25] += values[i];
   for (double p : partial)
      serial += p;
   runWorkers(4, [&](Transport& t) {
      double local = 0.0;
      for (std::size_t i = 25 * std::size_t(t.rank()); i < 25 * std::size_t(t.rank() + 1); ++i)
         local += values[i];
      auto r = reduceScalar(local, ReduceOp::Sum, t);
      if (t.isRoot()) CHECK(*r == serial);
      double mx = -1e300;
      for (std::size_t i = 25 * std::size_t(t.rank()); i < 25 * std::size_t(t.rank() + 1); ++i)
         mx = std::max(mx, values[i]);
      auto m = reduceScalar(mx, ReduceOp::Max, t);
      if (t.isRoot()) CHECK(*m == *std::max_element(values.begin(), values.end()));
   });

   CHECK_THROWS(runWorkers(2, [](Transport& t) {
      reduceScalar(1.0, t.rank() == 0 ? ReduceOp::Max : ReduceOp::Min, t);
   }));
}

TEST_CASE("gather_slice")
{
   auto gather = [](int workers, int coarsen, LineSpec line) {
      std::vector<double> result;
      runWorkers(workers, [&](Transport& t) {
         BlockStorage s({ 8, 6, 100 }, { 4, 3, 25 }, { false, false, false }, t.size());
         s.addFieldToLocalBlocks(t.rank(), "v", 2, 1);
         fillGlobal(s, t.rank());
         auto r = gatherSlice(s, line, "v", 1, coarsen, t);
         CHECK(r.has_value() == t.isRoot());
         if (r) result = *r;
      });
      return result;
   };
   LineSpec zline{ 5, 4, std::nullopt };
   auto a = gather(1, 4, zline);
   CHECK(a.size() == 25);
   for (std::size_t k = 0; k < a.size(); ++k)
      CHECK(a[k] == 10000.0 * double(4 * k) + 400.0 + 5.0 + 0.1);
   CHECK(gather(4, 4, zline) == a);
   auto full = gather(1, 1, zline);
   CHECK(full.size() == 100);
   CHECK(gather(3, 1, zline) == full);
   CHECK(gather(2, 3, LineSpec{ std::nullopt, 2, 50 }).size() == 3);

   CHECK_THROWS(gather(1, 1, LineSpec{ 8, 0, std::nullopt }));
   CHECK_THROWS(gather(1, 0, zline));
   CHECK_THROWS(gather(1, 1, LineSpec{ 1, std::nullopt, std::nullopt }));
}

TEST_CASE("broadcast_line")
{
   std::string big;
   std::mt19937 rng(3);
   for (int i = 0; i < 10240; ++i)
      big.push_back(i % 80 == 79 ? '\n' : char('a' + rng() % 26));
   for (const std::string& text : { std::string("x=1"), std::string(), big })
      runWorkers(4, [&](Transport& t) {
         const std::string got = broadcastLine(t.isRoot() ? text : std::string("ignored"), t);
         CHECK(got == text);
      });
}
