// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "../common/FsSetup.h"
#include "../common/NetClient.h"
#include "blockforge/comms/Collectives.h"
#include "blockforge/driver/Driver.h"
#include "blockforge/driver/VtkWriter.h"
#include "blockforge/steering/Frame.h"
#include "blockforge/unitsconfig/Lattice.h"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include <unistd.h>

using namespace blockforge;
using blockgrid::Block;
using blockgrid::BlockStorage;
using blockgrid::Vec3i;
using lbm::CellType;

namespace {

struct Outcome
{
   bool pass = false;
   std::string detail;
};

std::string fmt(const char* f, double v)
{
   char buf[64];
   std::snprintf(buf, sizeof buf, f, v);
   return buf;
}

std::string scenarioPath(const std::string& name) { return std::string(BLOCKFORGE_SOURCE_DIR) + "/scenarios/" + name; }

std::string readFile(const std::string& path)
{
   std::ifstream f(path, std::ios::binary);
   std::ostringstream s;
   s << f.rdbuf();
   return s.str();
}

/// Global copy of a field (interior, x-fastest, all components), available on every worker.
std::vector<double> globalField(BlockStorage& s, comms::Transport& t, const std::string& name, int fSize)
{
   const auto& n = s.cellCount();
   std::vector<double> local(std::size_t(n[0]) * std::size_t(n[1]) * std::size_t(n[2]) * std::size_t(fSize), 0.0);
   testutil::forCells(s, t.rank(), [&](Block& b, int x, int y, int z, const Vec3i& g) {
      const std::size_t base = (std::size_t(g[2]) * std::size_t(n[1]) + std::size_t(g[1])) * std::size_t(n[0]) +
                               std::size_t(g[0]);
      for (int f = 0; f < fSize; ++f)
         local[base * std::size_t(fSize) + std::size_t(f)] = b.getField(name)(x, y, z, f);
   });
   comms::BufferWriter w;
   w.putDoubles(local);
   std::vector<double> out(local.size(), 0.0);
   for (const auto& part : t.allGather(w.release()))
   {
      comms::BufferReader r(part);
      const auto v = r.getDoubles();
      for (std::size_t i = 0; i < v.size(); ++i)
         if (v[i] != 0.0 || std::signbit(v[i])) out[i] = v[i];
   }
   return out;
}

std::uint64_t checksum(const std::vector<double>& v)
{
   std::uint64_t h = 1469598103934665603ULL;
   const auto* p = reinterpret_cast<const unsigned char*>(v.data());
   for (std::size_t i = 0; i < v.size() * sizeof(double); ++i)
      h = (h ^ p[i]) * 1099511628211ULL;
   return h;
}

/// Near-equilibrium state drawn per global cell, so it does not depend on the decomposition.
void randomNearEquilibrium(BlockStorage& s, int worker, std::uint64_t seed)
{
   testutil::forCells(s, worker, [&](Block& b, int x, int y, int z, const Vec3i& g) {
      std::mt19937_64 rng(seed ^ (std::uint64_t(g[0]) * 73856093ULL) ^ (std::uint64_t(g[1]) * 19349663ULL) ^
                          (std::uint64_t(g[2]) * 83492791ULL));
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      const double rho = 1.0 + 0.01 * u(rng);
      const lbm::Vec3 vel{ 0.02 * u(rng), 0.02 * u(rng), 0.02 * u(rng) };
      lbm::setEquilibrium(b, lbm::StencilKind::D3Q19, x, y, z, rho, vel);
   });
}

BlockStorage periodicLbm(const Vec3i& size, const Vec3i& block, comms::Transport& t)
{
   BlockStorage s(size, block, { true, true, true }, t.size());
   lbm::addLbmFields(s, t.rank(), {});
   return s;
}

//----------------------------------------------------------------------------------------------------------------------

Outcome poiseuille()
{
   // channel: walls at z = 0 and z = 33 (height 32), pressure cells at x = 0 and x = NX - 1
   const double rhoIn = 1.0006, rhoOut = 1.0, nu = 0.1;
   const int NX = 256, H = 32;
   std::vector<double> ux, rho;
   driver::RunPlan plan;
   plan.scenario = scenarioPath("poiseuille.py");
   driver::RunHooks hooks;
   hooks.atEnd = [&](driver::RunState& s) {
      auto u = globalField(s.storage, s.transport, lbm::fields::velocity, 3);
      auto r = globalField(s.storage, s.transport, lbm::fields::density, 1);
      if (s.transport.isRoot())
      {
         ux  = std::move(u);
         rho = std::move(r);
      }
   };
   const auto start = std::chrono::steady_clock::now();
   const auto rep   = driver::runSimulation(plan, hooks);
   const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
   if (rep.exitStatus != 0) return { false, "run failed: " + rep.error };
   if (rep.stepsCompleted != 5000) return { false, "unexpected step count" };

   // analytic parabola: walls and pressure planes sit half-way between boundary and fluid cells
   const double L     = (NX - 2) + 0.0;
   const double rhoM  = 0.5 * (rhoIn + rhoOut);
   const double G     = (rhoIn - rhoOut) / 3.0 / L;
   const int xm = NX / 2, y = 0;
   double maxErr = 0.0, uMax = 0.0;
   for (int z = 1; z <= H; ++z)
   {
      const double zz = double(z);
      const double ua = G / (2.0 * rhoM * nu) * (zz - 0.5) * (H + 0.5 - zz);
      uMax            = std::max(uMax, ua);
      const std::size_t idx = (std::size_t(z) * 2 + std::size_t(y)) * std::size_t(NX) + std::size_t(xm);
      maxErr = std::max(maxErr, std::abs(ux[3 * idx] - ua));
   }
   const double rel = maxErr / uMax;
   return { rel <= 0.02 && secs < 60.0,
            "L_inf relative error " + fmt("%.4f", rel) + " (tol 0.02), runtime " + fmt("%.1f", secs) + " s (limit 60 s)" };
}

Outcome partitionInvariance()
{
   auto run = [](int workers, const Vec3i& block) {
      std::vector<double> pdf;
      comms::runWorkers(workers, [&](comms::Transport& t) {
         auto s = periodicLbm({ 32, 32, 32 }, block, t);
         randomNearEquilibrium(s, t.rank(), 42);
         lbm::exchangeBoundarySetup(s, t);
         const auto trt = lbm::TRTParams::fromOmega(1.7);
         for (int i = 0; i < 100; ++i)
            lbm::lbmTimestep(s, trt, t);
         auto g = globalField(s, t, lbm::fields::pdf, 19);
         if (t.isRoot()) pdf = std::move(g);
      });
      return pdf;
   };
   const auto a = run(1, { 32, 32, 32 });
   const auto b = run(4, { 16, 16, 16 });
   const bool same = a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
   return { same, std::string("1 worker/1 block vs 4 workers/8 blocks, 100 steps: PDF bytes ") +
                     (same ? "identical" : "differ") };
}

Outcome conservation()
{
   double massDrift = 0.0, momDrift = 0.0;
   comms::runWorkers(2, [&](comms::Transport& t) {
      auto s = periodicLbm({ 16, 16, 16 }, { 16, 8, 16 }, t);
      randomNearEquilibrium(s, t.rank(), 7);
      lbm::exchangeBoundarySetup(s, t);
      auto totals = [&] {
         auto pdf = globalField(s, t, lbm::fields::pdf, 19);
         const auto& st = lbm::makeStencil(lbm::StencilKind::D3Q19);
         long double m = 0, j[3] = { 0, 0, 0 };
         for (std::size_t c = 0; c < pdf.size() / 19; ++c)
            for (int a = 0; a < 19; ++a)
            {
               const long double f = pdf[c * 19 + std::size_t(a)];
               m += f;
               for (int d = 0; d < 3; ++d)
                  j[d] += f * st.e[std::size_t(a)][std::size_t(d)];
            }
         return std::array<double, 4>{ double(m), double(j[0]), double(j[1]), double(j[2]) };
      };
      const auto t0  = totals();
      const auto trt = lbm::TRTParams::fromOmega(1.3);
      for (int i = 0; i < 1000; ++i)
         lbm::lbmTimestep(s, trt, t);
      const auto t1 = totals();
      if (t.isRoot())
      {
         massDrift = std::abs(t1[0] - t0[0]) / t0[0];
         for (int d = 1; d < 4; ++d)
            momDrift = std::max(momDrift, std::abs(t1[std::size_t(d)] - t0[std::size_t(d)]) / t0[0]);
      }
   });
   return { massDrift <= 1e-12 && momDrift <= 1e-12,
            "1000 steps: mass drift " + fmt("%.2e", massDrift) + ", momentum drift " + fmt("%.2e", momDrift) +
               " (tol 1e-12, relative to total mass)" };
}

Outcome viscosity()
{
   const double omega = 1.2;
   const double nuTheory = (1.0 / omega - 0.5) / 3.0;
   const int N = 32;
   const double k = 2.0 * M_PI / N;
   double nuMeasured = 0.0;
   comms::runWorkers(2, [&](comms::Transport& t) {
      auto s = periodicLbm({ N, N, N }, { N, N / 2, N }, t);
      testutil::forCells(s, t.rank(), [&](Block& b, int x, int y, int z, const Vec3i& g) {
         lbm::setEquilibrium(b, lbm::StencilKind::D3Q19, x, y, z, 1.0, { 0.01 * std::sin(k * g[1]), 0.0, 0.0 });
      });
      lbm::exchangeBoundarySetup(s, t);
      auto amplitude = [&] {
         double num = 0.0, den = 0.0;
         for (auto* b : s.localBlocks(t.rank()))
         {
            lbm::computeMacroscopic(*b, lbm::StencilKind::D3Q19);
            const auto& v = b->getField(lbm::fields::velocity);
            const auto n  = b->size();
            for (int z = 0; z < n[2]; ++z)
               for (int y = 0; y < n[1]; ++y)
                  for (int x = 0; x < n[0]; ++x)
                  {
                     const double sn = std::sin(k * b->toGlobal(x, y, z)[1]);
                     num += v(x, y, z, 0) * sn;
                     den += sn * sn;
                  }
         }
         return comms::allReduceScalar(num, comms::ReduceOp::Sum, t) /
                comms::allReduceScalar(den, comms::ReduceOp::Sum, t);
      };
      const auto trt = lbm::TRTParams::fromOmega(omega);
      const int t0 = 20, t1 = 320;
      double a0 = 0.0;
      for (int i = 1; i <= t1; ++i)
      {
         lbm::lbmTimestep(s, trt, t);
         if (i == t0) a0 = amplitude();
      }
      const double a1 = amplitude();
      nuMeasured = -std::log(a1 / a0) / (k * k * (t1 - t0));
   });
   const double rel = std::abs(nuMeasured - nuTheory) / nuTheory;
   return { rel <= 0.02, "shear wave nu " + fmt("%.6f", nuMeasured) + " vs (1/omega - 1/2)/3 = " +
                            fmt("%.6f", nuTheory) + ", relative error " + fmt("%.2e", rel) + " (tol 0.02)" };
}

double maxSpeed(const BlockStorage& s, int worker)
{
   double m = 0.0;
   for (const Block* b : s.localBlocks(worker))
   {
      const auto& pdf   = b->getField(lbm::fields::pdf);
      const auto& flags = b->getField(lbm::fields::flags);
      const auto n      = b->size();
      for (int z = 0; z < n[2]; ++z)
         for (int y = 0; y < n[1]; ++y)
            for (int x = 0; x < n[0]; ++x)
            {
               if (!lbm::isLbmCell(lbm::cellType(flags(x, y, z)))) continue;
               const auto mm = lbm::cellMoments<lbm::D3Q19>([&](int a) { return pdf(x, y, z, a); });
               m = std::max(m, std::sqrt(mm.u[0] * mm.u[0] + mm.u[1] * mm.u[1] + mm.u[2] * mm.u[2]));
            }
   }
   return m;
}

Outcome freeSurface()
{
   using namespace freesurface;
   // (a) resting pool
   double restSpeed = 0.0;
   comms::runWorkers(2, [&](comms::Transport& t) {
      testutil::FsDomain d;
      d.size      = { 16, 16, 16 };
      d.blockSize = { 16, 8, 16 };
      d.fill      = [](int, int, int z) { return z < 7 ? 1.0 : (z == 7 ? 0.5 : 0.0); };
      FreeSurfaceState st;
      auto s   = testutil::makeFsStorage(d, st, t);
      auto trt = lbm::TRTParams::fromOmega(1.2);
      for (int i = 0; i < 100; ++i)
         fslbmTimestep(s, trt, st, t);
      const double m = comms::allReduceScalar(maxSpeed(s, t.rank()), comms::ReduceOp::Max, t);
      if (t.isRoot()) restSpeed = m;
   });

   // (b) sloshing and (c) closed interface layer after every step
   double massDrift = 0.0;
   std::int64_t violations = 0, badSteps = 0;
   comms::runWorkers(2, [&](comms::Transport& t) {
      testutil::FsDomain d;
      d.size      = { 16, 8, 16 };
      d.blockSize = { 8, 8, 16 };
      d.fill      = [](int, int, int z) { return z < 7 ? 1.0 : (z == 7 ? 0.5 : 0.0); };
      d.velocity  = [](int x, int, int z) {
         return lbm::Vec3{ 0.0, 0.0, z <= 7 ? 0.05 * std::cos(M_PI * (x + 0.5) / 16.0) : 0.0 };
      };
      FreeSurfaceState st;
      auto s   = testutil::makeFsStorage(d, st, t);
      auto trt = lbm::TRTParams::fromOmega(1.6);
      const double m0 = comms::allReduceScalar(liquidMass(s, t.rank()), comms::ReduceOp::Sum, t);
      for (int i = 0; i < 1000; ++i)
      {
         fslbmTimestep(s, trt, st, t);
         comms::exchangeGhostLayers(comms::ExchangePlan(s, t.rank(), 1), s, { lbm::fields::flags }, t);
         const double v =
            comms::allReduceScalar(double(closedLayerViolations(s, t.rank(), false)), comms::ReduceOp::Sum, t);
         if (t.isRoot())
         {
            violations += std::int64_t(v);
            if (v > 0) ++badSteps;
         }
      }
      const double m1 = comms::allReduceScalar(liquidMass(s, t.rank()), comms::ReduceOp::Sum, t);
      if (t.isRoot()) massDrift = std::abs(m1 - m0) / m0;
   });

   // (d) all liquid FSLBM equals plain LBM
   auto run = [](bool fs) {
      std::vector<double> out;
      comms::runWorkers(2, [&](comms::Transport& t) {
         testutil::FsDomain d;
         d.size      = { 12, 12, 12 };
         d.blockSize = { 6, 12, 12 };
         d.periodic  = { true, true, true };
         d.velocity  = [](int x, int y, int z) {
            return lbm::Vec3{ 0.02 * std::sin(0.5 * y), 0.01 * std::cos(0.5 * z + x), 0.005 * std::sin(0.3 * x) };
         };
         FreeSurfaceState st;
         auto s   = fs ? testutil::makeFsStorage(d, st, t) : testutil::makeLbmStorage(d, t);
         auto trt = lbm::TRTParams::fromOmega(1.5);
         for (int i = 0; i < 50; ++i)
         {
            if (fs) fslbmTimestep(s, trt, st, t);
            else lbm::lbmTimestep(s, trt, t);
         }
         auto g = globalField(s, t, lbm::fields::pdf, 19);
         if (t.isRoot()) out = std::move(g);
      });
      return out;
   };
   const auto plain = run(false), fsl = run(true);
   const bool identical =
      plain.size() == fsl.size() && std::memcmp(plain.data(), fsl.data(), plain.size() * sizeof(double)) == 0;

   const bool pass = restSpeed <= 1e-10 && massDrift <= 1e-9 && violations == 0 && identical;
   return { pass, "(a) max|u| " + fmt("%.2e", restSpeed) + " (tol 1e-10); (b) mass drift " + fmt("%.2e", massDrift) +
                     " (tol 1e-9); (c) layer violations " + std::to_string(violations) + " in " +
                     std::to_string(badSteps) + " steps; (d) all-liquid FSLBM vs LBM " +
                     (identical ? "bit-identical" : "differs") };
}

/// Volumes of the 6-connected components of gas/interface cells.
std::vector<double> floodFillVolumes(const std::map<std::array<int, 3>, double>& cells)
{
   std::set<std::array<int, 3>> seen;
   std::vector<double> out;
   for (const auto& [start, v0] : cells)
   {
      if (seen.count(start)) continue;
      double vol = 0.0;
      std::vector<std::array<int, 3>> stack{ start };
      seen.insert(start);
      while (!stack.empty())
      {
         const auto c = stack.back();
         stack.pop_back();
         vol += cells.at(c);
         for (int d = 0; d < 3; ++d)
            for (int s : { -1, 1 })
            {
               auto n = c;
               n[std::size_t(d)] += s;
               if (cells.count(n) && !seen.count(n))
               {
                  seen.insert(n);
                  stack.push_back(n);
               }
            }
      }
      out.push_back(vol);
   }
   std::sort(out.begin(), out.end());
   return out;
}

Outcome bubbleModel()
{
   using namespace freesurface;
   // single sphere of radius 8: V equals the cell sum at every relabel step
   int relabels = 0, mismatches = 0;
   comms::runWorkers(1, [&](comms::Transport& t) {
      testutil::FsDomain d;
      d.size      = { 24, 24, 24 };
      d.blockSize = { 24, 24, 24 };
      d.params.relabelInterval = 5;
      d.fill = [](int x, int y, int z) {
         int inside = 0;
         for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
               for (int k = 0; k < 4; ++k)
               {
                  const double px = x + (i + 0.5) / 4 - 12, py = y + (j + 0.5) / 4 - 12, pz = z + (k + 0.5) / 4 - 12;
                  inside += px * px + py * py + pz * pz < 64.0;
               }
         return 1.0 - inside / 64.0;
      };
      FreeSurfaceState st;
      auto s   = testutil::makeFsStorage(d, st, t);
      auto trt = lbm::TRTParams::fromOmega(1.4);
      for (int i = 0; i < 30; ++i)
      {
         fslbmTimestep(s, trt, st, t);
         if (st.step % st.params.relabelInterval != 0) continue;
         ++relabels;
         double oracle = 0.0;
         testutil::forCells(s, 0, [&](Block& b, int x, int y, int z, const Vec3i&) {
            const auto f = lbm::cellType(b.getField(lbm::fields::flags)(x, y, z));
            if (f == CellType::Gas) oracle += 1.0;
            else if (f == CellType::Interface) oracle += 1.0 - b.getField(fields::fill)(x, y, z);
         });
         double V = 0.0;
         for (const auto& [id, bub] : st.bubbles.bubbles())
            V += bub.V;
         if (V != oracle || st.bubbles.bubbles().size() != 1) ++mismatches;
      }
   });

   // forced 10% volume reduction of a 10x10x10 gas box
   double pressure = 0.0;
   comms::runWorkers(2, [&](comms::Transport& t) {
      testutil::FsDomain d;
      d.size      = { 20, 20, 20 };
      d.blockSize = { 20, 10, 20 };
      d.fill = [](int x, int y, int z) { return (x >= 5 && x < 15 && y >= 5 && y < 15 && z >= 5 && z < 15) ? 0.0 : 1.0; };
      FreeSurfaceState st;
      auto s = testutil::makeFsStorage(d, st, t);
      testutil::forCells(s, t.rank(), [](Block& b, int x, int y, int z, const Vec3i& g) {
         if (g[0] >= 5 && g[0] < 15 && g[1] >= 5 && g[1] < 15 && g[2] == 5)
         {
            b.getField(lbm::fields::flags)(x, y, z) = lbm::flagValue(CellType::Interface);
            b.getField(fields::fill)(x, y, z)       = 1.0;
         }
      });
      st.step = 1;
      updateBubbles(s, st, t);
      if (t.isRoot() && st.bubbles.bubbles().size() == 1) pressure = st.bubbles.bubbles().begin()->second.pressure();
   });

   // dumbbell split
   std::vector<double> got, expected;
   comms::runWorkers(3, [&](comms::Transport& t) {
      testutil::FsDomain d;
      d.size      = { 24, 10, 10 };
      d.blockSize = { 8, 10, 10 };
      auto inGas  = [](int x, int y, int z) {
         const bool left  = x >= 2 && x <= 8 && y >= 2 && y <= 7 && z >= 2 && z <= 7;
         const bool right = x >= 14 && x <= 21 && y >= 3 && y <= 6 && z >= 3 && z <= 6;
         const bool neck  = x > 8 && x < 14 && y == 5 && z == 5;
         return left || right || neck;
      };
      d.fill = [=](int x, int y, int z) { return inGas(x, y, z) ? 0.0 : 1.0; };
      FreeSurfaceState st;
      auto s = testutil::makeFsStorage(d, st, t);
      testutil::forCells(s, t.rank(), [](Block& b, int x, int y, int z, const Vec3i& g) {
         if (g[0] >= 10 && g[0] <= 12 && g[1] >= 4 && g[1] <= 6 && g[2] >= 4 && g[2] <= 6)
         {
            b.getField(lbm::fields::flags)(x, y, z) = lbm::flagValue(CellType::Fluid);
            b.getField(fields::fill)(x, y, z)       = 1.0;
            b.getField(fields::bubbleId)(x, y, z)   = -1.0;
         }
      });
      relabelBubbles(s, st, t);
      std::vector<double> local;
      testutil::forCells(s, t.rank(), [&](Block& b, int x, int y, int z, const Vec3i& g) {
         const auto f = lbm::cellType(b.getField(lbm::fields::flags)(x, y, z));
         if (f == CellType::Gas || f == CellType::Interface)
            local.insert(local.end(), { double(g[0]), double(g[1]), double(g[2]),
                                        f == CellType::Gas ? 1.0 : 1.0 - b.getField(fields::fill)(x, y, z) });
      });
      comms::BufferWriter w;
      w.putDoubles(local);
      const auto all = t.allGather(w.release());
      if (!t.isRoot()) return;
      std::map<std::array<int, 3>, double> cells;
      for (const auto& bytes : all)
      {
         comms::BufferReader r(bytes);
         const auto v = r.getDoubles();
         for (std::size_t i = 0; i < v.size(); i += 4)
            cells[{ int(v[i]), int(v[i + 1]), int(v[i + 2]) }] = v[i + 3];
      }
      expected = floodFillVolumes(cells);
      for (const auto& [id, b] : st.bubbles.bubbles())
         got.push_back(b.V);
      std::sort(got.begin(), got.end());
   });
   bool splitOk = got.size() == 2 && expected.size() == 2;
   for (std::size_t i = 0; splitOk && i < 2; ++i)
      splitOk = std::abs(got[i] - expected[i]) <= 1e-12 * expected[i];

   const bool pass = relabels > 0 && mismatches == 0 && pressure == 1.0 / 0.9 && splitOk;
   return { pass, "volume identity at " + std::to_string(relabels - mismatches) + "/" + std::to_string(relabels) +
                     " relabel steps; p_b after 10% reduction " + fmt("%.17g", pressure) +
                     (pressure == 1.0 / 0.9 ? " == 1/0.9" : " != 1/0.9") + "; dumbbell split into " +
                     std::to_string(got.size()) + " bubbles " + (splitOk ? "matching" : "not matching") +
                     " flood fill" };
}

Outcome units()
{
   using namespace unitsconfig;
   std::vector<std::string> failures;
   auto expectQ = [&](const std::string& text, double mag, Dims dims) {
      const Quantity q = parseQuantity(text);
      if (std::abs(q.magnitude() - mag) > 1e-15 * mag || !(q.dims() == dims)) failures.push_back(text);
   };
   expectQ("1e-6*m*m/s", 1e-6, { 2, 0, -1 });
   expectQ("0.072*N/m", 0.072, { 0, 1, -2 });
   expectQ("0.01*m", 0.01, { 1, 0, 0 });

   LatticeScale scale{ parseQuantity("0.01*m"), parseQuantity("1e-3*s"), std::nullopt };
   const double nuL     = toLattice(parseQuantity("1e-6*m*m/s"), scale);
   const double nuOracle = 1e-6 * 1e-3 / (0.01 * 0.01);
   if (std::abs(nuL - nuOracle) > 1e-12 * nuOracle || std::abs(nuL - 1e-5) > 1e-12 * 1e-5) failures.push_back("nu_L");

   LatticeScale sScale{ parseQuantity("0.01*m"), parseQuantity("5e-4*s"), parseQuantity("1000*kg/m^3") };
   const double sigmaL = toLattice(parseQuantity("0.072*N/m"), sScale);
   if (std::abs(sigmaL - 1.8e-5) > 1e-12 * 1.8e-5) failures.push_back("sigma_L");

   // grid-scan oracle for the stability window
   auto feasible = [](double dt, double uMax) {
      const double nuLat = 1e-6 * dt / (0.01 * 0.01);
      const double omega = 1.0 / (3.0 * nuLat + 0.5);
      return omega <= 1.95 * (1 + 1e-12) && uMax * dt / 0.01 <= 0.05 * (1 + 1e-12);
   };
   auto scan = [&](double uMax) {
      double best = -1.0;
      for (int i = 1; i <= 200000; ++i)
         if (const double dt = i * 1e-5; feasible(dt, uMax)) best = dt;
      return best;
   };
   const Quantity dt = findOptimalDt(parseQuantity("1e-6*m*m/s"), parseQuantity("0.01*m"), parseQuantity("1e-3*m/s"));
   const double scanned = scan(1e-3);
   if (std::abs(dt.magnitude() - 0.5) > 1e-12 || !(dt.dims() == Dims{ 0, 0, 1 }) ||
       std::abs(scanned - dt.magnitude()) > 2e-5 || !feasible(dt.magnitude(), 1e-3) ||
       feasible(dt.magnitude() * (1 + 1e-9), 1e-3))
      failures.push_back("find_optimal_dt feasible");
   bool threw = false;
   try
   {
      findOptimalDt(parseQuantity("1e-6*m*m/s"), parseQuantity("0.01*m"), parseQuantity("1*m/s"));
   }
   catch (const std::exception&)
   {
      threw = true;
   }
   if (!threw || scan(1.0) > 0.0) failures.push_back("find_optimal_dt infeasible");

   std::string detail = "quantities parsed; nu_L " + fmt("%.3g", nuL) + "; sigma_L " + fmt("%.3g", sigmaL) +
                        "; dt " + fmt("%.6g", dt.magnitude()) + " s (scan " + fmt("%.5f", scanned) +
                        "); infeasible case " + (threw ? "errors" : "does not error");
   for (const auto& f : failures)
      detail += "; failed: " + f;
   return { failures.empty(), detail };
}

Outcome scripting()
{
   // channel scenario end to end, with a host check of the callback maximum
   driver::RunPlan plan;
   plan.scenario  = scenarioPath("channel.py");
   plan.timesteps = 20;
   plan.workers   = 2;
   std::vector<double> host;
   driver::RunHooks hooks;
   hooks.afterStep = [&](driver::RunState& s) {
      double m = 0.0;
      testutil::forCells(s.storage, s.transport.rank(), [&](Block& b, int x, int y, int z, const Vec3i&) {
         m = std::max(m, b.getField(lbm::fields::velocity)(x, y, z, 0));
      });
      const double g = comms::allReduceScalar(m, comms::ReduceOp::Max, s.transport);
      if (s.transport.isRoot()) host.push_back(g);
   };
   const auto rep = driver::runSimulation(plan, hooks);
   if (rep.exitStatus != 0) return { false, "channel scenario failed: " + rep.error };
   std::vector<double> logged;
   for (const auto& r : rep.results)
      if (r.name == "Max X Vel") logged.push_back(std::get<double>(r.value));
   double maxDiff = logged.size() == host.size() && !host.empty() ? 0.0 : 1.0;
   for (std::size_t i = 0; i < std::min(logged.size(), host.size()); ++i)
      maxDiff = std::max(maxDiff, std::abs(logged[i] - host[i]));

   // zero-copy mutation through a script view versus the same mutation by the host
   const std::string base = R"PY(
import math
import numpy as np

@callback("config")
def config():
    return {'Physical': {'omega': 1.5}, 'Control': {'timesteps': 10},
            'Domain': {'size': [8, 8, 8], 'block_size': [4, 8, 8], 'periodic': [True, True, True]}}

@callback("domain_init")
def init(cell):
    return {'initVel': (0.01 * math.sin(cell[1]), 0.0, 0.0)}
)PY";
   const std::string mutate = R"PY(
@callback("at_end_of_timestep")
def poke(blockstorage, step):
    if step == 5:
        for block in blockstorage:
            view = np.asarray(block['pdf'])
            view[1:3, 1:3, 1:3, 0] *= 1.01
)PY";
   auto runVariant = [&](const std::string& src, bool hostMutation) {
      driver::RunPlan p;
      p.scenarioSource = src;
      p.workers        = 2;
      std::uint64_t sum = 0;
      driver::RunHooks h;
      h.afterStep = [&](driver::RunState& s) {
         if (!hostMutation || s.step != 5) return;
         for (auto* b : s.storage.localBlocks(s.transport.rank()))
            for (int z = 1; z < 3; ++z)
               for (int y = 1; y < 3; ++y)
                  for (int x = 1; x < 3; ++x)
                     b->getField(lbm::fields::pdf)(x, y, z, 0) *= 1.01;
      };
      h.atEnd = [&](driver::RunState& s) {
         const auto g = globalField(s.storage, s.transport, lbm::fields::pdf, 19);
         if (s.transport.isRoot()) sum = checksum(g);
      };
      const auto r = driver::runSimulation(p, h);
      return r.exitStatus == 0 ? sum : 0;
   };
   const auto control = runVariant(base, false);
   const auto script  = runVariant(base + mutate, false);
   const auto hostMut = runVariant(base, true);
   const bool mutationOk = control != 0 && script != control && script == hostMut;

   const bool pass = maxDiff <= 1e-14 && mutationOk;
   return { pass, "channel scenario ran " + std::to_string(rep.stepsCompleted) + " steps; callback vs host max diff " +
                     fmt("%.1e", maxDiff) + " (tol 1e-14); script-view mutation " +
                     (script != control ? "changes" : "does not change") + " the result and " +
                     (script == hostMut ? "matches" : "does not match") + " the host mutation" };
}

Outcome steeringE2e()
{
   const std::string scenario = R"PY(
@callback("config")
def config():
    return {'Physical': {'omega': 1.4}, 'Control': {'timesteps': 30},
            'Domain': {'size': [16, 4, 10], 'block_size': [8, 4, 10], 'periodic': [False, True, False]}}

@callback("domain_init")
def init(cell):
    if is_at_border(cell, 'TB'):
        return {'boundary': 'noslip'}
    if is_at_border(cell, 'W'):
        return {'boundary': ['pressure', 1.001]}
    if is_at_border(cell, 'E'):
        return {'boundary': ['pressure', 1.0]}
    return {}
)PY";
   const std::string controlCallback = R"PY(
@callback("at_end_of_timestep")
def change(step):
    if step == 10:
        set_pressure('W', 1.003)
)PY";
   const int N = 10;

   struct Result
   {
      driver::RunReport report;
      std::map<std::int64_t, std::uint64_t> sums; //!< pdf checksum after each step
      std::string reply;
   };
   auto run = [&](const std::string& src, const std::string& commands) {
      Result res;
      driver::RunPlan p;
      p.scenarioSource = src;
      p.workers        = 2;
      if (!commands.empty()) p.steerPort = 0;
      int port = -1;
      std::unique_ptr<testutil::TcpClient> client;
      driver::RunHooks h;
      h.onListening = [&](int tcp, int) { port = tcp; };
      h.afterStep   = [&](driver::RunState& s) {
         const auto g = globalField(s.storage, s.transport, lbm::fields::pdf, 19);
         if (!s.transport.isRoot()) return;
         res.sums[s.step] = checksum(g);
         // connect while step N is running; the session has to open before step N+1
         if (s.step == N && !commands.empty())
         {
            client = std::make_unique<testutil::TcpClient>(port);
            client->send(commands);
         }
      };
      res.report = driver::runSimulation(p, h);
      if (client) res.reply = client->readAll(5000);
      return res;
   };

   const auto plain = run(scenario, "");
   const std::string readOnly = "blocks().numberOfCells()\n"
                                "mpi.allreduce(1.0, mpi.SUM)\n"
                                "def twice(a):\n"
                                "    return a * 2\n"
                                "\n"
                                "twice(21)\n"
                                "send_slice([1.0, 2.5], name='probe')\n"
                                "resume()\n";
   const auto ro      = run(scenario, readOnly);
   const auto steered = run(scenario, "set_pressure('W', 1.003)\nresume()\n");
   const auto control = run(scenario + controlCallback, "");

   std::vector<std::string> problems;
   if (plain.report.exitStatus || ro.report.exitStatus || steered.report.exitStatus || control.report.exitStatus)
      problems.push_back("a run failed");
   if (ro.report.sessionSteps != std::vector<std::int64_t>{ N }) problems.push_back("session not opened at step N");
   if (ro.reply.find("step=" + std::to_string(N)) == std::string::npos) problems.push_back("banner step");
   if (ro.sums != plain.sums) problems.push_back("read-only session changed the state");
   if (ro.reply.find("(16, 4, 10)") == std::string::npos) problems.push_back("cell count reply");
   if (ro.reply.find(">>> 2.0\n") == std::string::npos) problems.push_back("collective reply");
   if (ro.reply.find(">>> 42\n") == std::string::npos) problems.push_back("multi-line command");

   // the slice frame from the console decodes byte-exactly; it follows a prompt on the same line
   steering::FrameDecoder dec;
   const auto framePos = ro.reply.find("##FRAME");
   if (framePos != std::string::npos) dec.feed(std::string_view(ro.reply).substr(framePos));
   bool frameOk = false;
   while (auto item = dec.next())
      if (item->kind == steering::ReplyItem::Kind::Frame && item->contentType == "slice/json")
      {
         const auto j = nlohmann::json::parse(item->data);
         frameOk = j["name"] == "probe" && j["values"] == nlohmann::json::array({ 1.0, 2.5 }) &&
                   steering::encodeFrame(item->contentType, item->data) == item->raw;
      }
   if (!frameOk) problems.push_back("slice frame");

   // random payload round trip
   std::mt19937 rng(3);
   int roundTrips = 0;
   for (int i = 0; i < 200; ++i)
   {
      std::string payload(std::size_t(rng() % 300), '\0');
      for (auto& c : payload)
         c = char(rng() % 256);
      const std::string wire = steering::encodeFrame("application/octet-stream", payload);
      steering::FrameDecoder d;
      for (std::size_t k = 0; k < wire.size(); k += 7)
         d.feed(std::string_view(wire).substr(k, 7));
      const auto item = d.next();
      if (item && item->kind == steering::ReplyItem::Kind::Frame && item->data == payload && item->raw == wire)
         ++roundTrips;
   }
   if (roundTrips != 200) problems.push_back("frame round trip");

   // parameter change: identical to the control from the change step onward, different from the plain run
   int compared = 0;
   bool matches = steered.sums.size() == control.sums.size();
   for (const auto& [step, sum] : control.sums)
      if (step > N)
      {
         ++compared;
         if (!steered.sums.count(step) || steered.sums.at(step) != sum) matches = false;
      }
   if (!matches || compared == 0) problems.push_back("parameter change differs from control");
   if (steered.sums.at(30) == plain.sums.at(30)) problems.push_back("parameter change had no effect");

   std::string detail = "session opened at step " +
                        (ro.report.sessionSteps.empty() ? std::string("-") : std::to_string(ro.report.sessionSteps[0])) +
                        " for a client connected during step " + std::to_string(N) +
                        "; read-only session " + (ro.sums == plain.sums ? "bit-identical" : "differs") +
                        "; parameter change matches control over " + std::to_string(compared) + " steps; " +
                        std::to_string(roundTrips) + "/200 frame round trips";
   for (const auto& p : problems)
      detail += "; failed: " + p;
   return { problems.empty(), detail };
}

Outcome vtkGolden()
{
   const std::string golden = readFile(std::string(BLOCKFORGE_SOURCE_DIR) + "/tests/data/vtk_constant_2x2x2.vtk");
   const auto dir = std::filesystem::temp_directory_path() / ("blockforge_acceptance_vtk_" + std::to_string(::getpid()));
   std::filesystem::remove_all(dir);
   auto write = [&](int workers, const Vec3i& size, const Vec3i& block, const std::string& sub, bool constant) {
      comms::runWorkers(workers, [&](comms::Transport& t) {
         BlockStorage s(size, block, { false, false, false }, t.size());
         lbm::addLbmFields(s, t.rank(), {});
         testutil::forCells(s, t.rank(), [&](Block& b, int x, int y, int z, const Vec3i& g) {
            auto& v = b.getField(lbm::fields::velocity);
            if (constant)
            {
               b.getField(lbm::fields::density)(x, y, z) = 1.000000012;
               v(x, y, z, 0) = 0.0123456789;
               v(x, y, z, 1) = 0.0;
               v(x, y, z, 2) = -0.25;
            }
            else
            {
               b.getField(lbm::fields::density)(x, y, z) = 1.0 + 1e-3 * g[0] - 1e-5 * g[1] + 1e-7 * g[2];
               for (int d = 0; d < 3; ++d)
                  v(x, y, z, d) = std::cos(0.3 * g[0] + 0.7 * g[1] - 0.2 * g[2] + d);
            }
         });
         driver::writeVtk(s, { lbm::fields::density }, 7, (dir / sub).string(), t);
      });
      return readFile(driver::vtkFileName((dir / sub).string(), 7));
   };
   const std::string g1 = write(1, { 2, 2, 2 }, { 2, 2, 2 }, "g1", true);
   const std::string g2 = write(1, { 2, 2, 2 }, { 2, 2, 2 }, "g2", true);
   const std::string g8 = write(8, { 2, 2, 2 }, { 1, 1, 1 }, "g8", true);
   const std::string m1 = write(1, { 12, 8, 6 }, { 12, 8, 6 }, "m1", false);
   const std::string m3 = write(3, { 12, 8, 6 }, { 4, 4, 3 }, "m3", false);
   std::filesystem::remove_all(dir);
   const bool stable = !golden.empty() && g1 == golden && g2 == golden && g8 == golden;
   const bool multi  = !m1.empty() && m1 == m3;
   return { stable && multi, std::string("2x2x2 constant field ") + (stable ? "matches" : "differs from") +
                                " the golden file; 3-worker output " + (multi ? "equals" : "differs from") +
                                " 1-worker output byte-for-byte" };
}

} // namespace

int main()
{
   const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      { "Poiseuille channel", poiseuille },
      { "Partition invariance", partitionInvariance },
      { "Conservation", conservation },
      { "Viscosity check", viscosity },
      { "Free surface", freeSurface },
      { "Bubble model", bubbleModel },
      { "Units", units },
      { "Scripting", scripting },
      { "Steering e2e", steeringE2e },
      { "VTK golden files", vtkGolden },
   };
   int failed = 0;
   for (const auto& [name, check] : criteria)
   {
      Outcome o;
      try
      {
         o = check();
      }
      catch (const std::exception& e)
      {
         o = { false, std::string("exception: ") + e.what() };
      }
      if (!o.pass) ++failed;
      std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
   }
   std::cout << (criteria.size() - std::size_t(failed)) << "/" << criteria.size() << " criteria passed" << std::endl;
   return failed == 0 ? 0 : 1;
}
