#include "doctest.h"

#include "blockforge/blockgrid/BlockStorage.h"

#include <algorithm>
#include <random>
#include <set>

using namespace blockforge::blockgrid;

namespace {
double bruteForceOptimum(const std::vector<double>& w, int workers)
{
   const std::size_t n = w.size();
   std::size_t combos = 1;
   for (std::size_t i = 0; i < n; ++i)
      combos *= std::size_t(workers);
   double best = 1e300;
   for (std::size_t c = 0; c < combos; ++c)
   {
      std::vector<double> load(std::size_t(workers), 0.0);
      std::size_t code = c;
      for (std::size_t i = 0; i < n; ++i)
      {
         load[code % std::size_t(workers)] += w[i];
         code /= std::size_t(workers);
      }
      best = std::min(best, *std::max_element(load.begin(), load.end()));
   }
   return best;
}

std::vector<double> loads(const std::vector<Block>& blocks, const std::map<int, int>& a, int workers)
{
   std::vector<double> load(std::size_t(workers), 0.0);
   for (const auto& b : blocks)
      load[std::size_t(a.at(b.id()))] += b.weight();
   return load;
}
} // namespace

TEST_CASE("decompose_domain")
{
   CHECK(decomposeDomain({ 300, 100, 100 }, { 100, 100, 100 }).size() == 3);
   CHECK(decomposeDomain({ 4, 4, 4 }, { 2, 2, 2 }, [](const CellInterval&) { return false; }).empty());
   CHECK_THROWS_AS(decomposeDomain({ 5, 4, 4 }, { 2, 2, 2 }), BlockGridError);

   auto blocks = decomposeDomain({ 4, 4, 4 }, { 2, 2, 2 });
   REQUIRE(blocks.size() == 8);
   for (int z = 0; z < 4; ++z)
      for (int y = 0; y < 4; ++y)
         for (int x = 0; x < 4; ++x)
         {
            int owners = 0;
            for (const auto& b : blocks)
               owners += b.interval().contains({ x, y, z }) ? 1 : 0;
            REQUIRE(owners == 1);
         }
}

TEST_CASE("assign_blocks LPT")
{
   auto three = decomposeDomain({ 3, 1, 1 }, { 1, 1, 1 });
   auto a3 = assignBlocks(three, 3);
   std::set<int> used;
   for (auto& [id, w] : a3)
      used.insert(w);
   CHECK(used.size() == 3);

   auto four = decomposeDomain({ 4, 1, 1 }, { 1, 1, 1 });
   const std::vector<double> ws{ 4, 3, 3, 2 };
   for (std::size_t i = 0; i < 4; ++i)
      four[i].setWeight(ws[i]);
   auto a = assignBlocks(four, 2, [](const Block& b) { return b.weight(); });
   auto l = loads(four, a, 2);
   CHECK(l[0] == 6.0);
   CHECK(l[1] == 6.0);
   CHECK(bruteForceOptimum(ws, 2) == 6.0);

   // determinism
   CHECK(assignBlocks(four, 2, [](const Block& b) { return b.weight(); }) == a);
}

TEST_CASE("assign_blocks LPT bound against brute force")
{
   std::mt19937 rng(42);
   std::uniform_real_distribution<double> dist(0.1, 10.0);
   for (int trial = 0; trial < 60; ++trial)
   {
      const int n = 1 + int(rng() % 8), workers = 1 + int(rng() % 3);
      auto blocks = decomposeDomain({ n, 1, 1 }, { 1, 1, 1 });
      std::vector<double> ws;
      for (auto& b : blocks)
      {
         b.setWeight(std::round(dist(rng) * 4) / 4);
         ws.push_back(b.weight());
      }
      auto a = assignBlocks(blocks, workers, [](const Block& b) { return b.weight(); });
      REQUIRE(a.size() == blocks.size());
      auto l = loads(blocks, a, workers);
      const double opt = bruteForceOptimum(ws, workers);
      REQUIRE(*std::max_element(l.begin(), l.end()) <= 2.0 * opt + 1e-12);
   }
}

TEST_CASE("local_blocks and cell_count")
{
   BlockStorage one({ 4, 4, 4 }, { 2, 2, 2 }, { false, false, false }, 1);
   CHECK(one.localBlocks(0).size() == 8);
   CHECK_THROWS_AS(one.localBlocks(1), BlockGridError);
   CHECK(cellCount(one) == Vec3i{ 4, 4, 4 });

   BlockStorage three({ 8, 4, 4 }, { 2, 2, 2 }, { true, false, false }, 3);
   std::set<int> seen;
   std::size_t total = 0;
   for (int w = 0; w < 3; ++w)
      for (Block* b : three.localBlocks(w))
      {
         seen.insert(b->id());
         ++total;
         CHECK(three.ownerOf(b->id()) == w);
      }
   CHECK(total == three.blocks().size());
   CHECK(seen.size() == total);

   BlockStorage filtered({ 4, 4, 4 }, { 2, 2, 2 }, { false, false, false }, 2,
                         [](const CellInterval& c) { return c.min[0] == 0; });
   CHECK(filtered.blocks().size() == 4);
   CHECK(filtered.cellCount() == Vec3i{ 4, 4, 4 });
   CHECK(filtered.blockContaining({ 3, 0, 0 }) == nullptr);
   CHECK(filtered.blockContaining({ 1, 3, 3 }) != nullptr);

   BlockStorage periodic({ 4, 4, 4 }, { 2, 2, 2 }, { true, false, false }, 1);
   CHECK(periodic.blockAtGridPosition({ -1, 0, 0 }) == periodic.blockAtGridPosition({ 1, 0, 0 }));
   CHECK(periodic.blockAtGridPosition({ 0, -1, 0 }) == nullptr);
}

TEST_CASE("block fields")
{
   BlockStorage s({ 4, 2, 2 }, { 2, 2, 2 }, { false, false, false }, 1);
   s.addFieldToLocalBlocks(0, "velocity", 3, 1);
   Block& b = s.blocks().front();
   CHECK(b["velocity"].requestedSize() == blockforge::field::Coord4{ 2, 2, 2, 3 });
   CHECK_THROWS_AS(b.addField("velocity", 1, 0), BlockGridError);
   CHECK_THROWS_AS(b.getField("nope"), BlockGridError);
   CHECK(s.blocks()[1].toGlobal(0, 1, 0) == Vec3i{ 2, 1, 0 });
}
