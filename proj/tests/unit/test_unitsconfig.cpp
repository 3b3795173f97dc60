#include "doctest.h"

#include "blockforge/unitsconfig/Lattice.h"

#include <cmath>
#include <random>

using namespace blockforge::unitsconfig;

namespace {
bool dimsAre(const Quantity& q, int l, int m, int t) { return q.dims() == Dims{ l, m, t }; }

ConfigTree channelConfig()
{
   ConfigTree c;
   c.set("Physical.viscosity", parseQuantity("1e-6*m*m/s"));
   c.set("Physical.surface_tension", parseQuantity("0.072*N/m"));
   c.set("Physical.dx", parseQuantity("0.01*m"));
   c.set("Physical.density", parseQuantity("1000*kg/m^3"));
   c.set("Physical.max_velocity", parseQuantity("1e-3*m/s"));
   c.set("Control.timesteps", 10000);
   c.set("Control.vtk_output_interval", 100);
   c.set("Domain.size", ConfigList{ 60, 20, 20 });
   c.set("Domain.block_size", ConfigList{ 20, 20, 20 });
   return c;
}
} // namespace

TEST_CASE("parse_quantity")
{
   const Quantity nu = parseQuantity("1e-6*m*m/s");
   CHECK(nu.magnitude() == 1e-6);
   CHECK(dimsAre(nu, 2, 0, -1));
   const Quantity sigma = parseQuantity("0.072*N/m");
   CHECK(sigma.magnitude() == 0.072);
   CHECK(dimsAre(sigma, 0, 1, -2));
   const Quantity dx = parseQuantity("0.01*m");
   CHECK(dx.magnitude() == 0.01);
   CHECK(dimsAre(dx, 1, 0, 0));
   const Quantity five = parseQuantity("5");
   CHECK(five.magnitude() == 5.0);
   CHECK(five.dimensionless());

   CHECK(dimsAre(parseQuantity("2*m^2/s"), 2, 0, -1));
   CHECK(dimsAre(parseQuantity("1000*kg/m^3"), -3, 1, 0));
   CHECK(dimsAre(parseQuantity("101325*Pa"), -1, 1, -2));
   CHECK(dimsAre(parseQuantity(" 3 * m / s / s "), 1, 0, -2));
   CHECK(parseQuantity("-2.5E+3*s").magnitude() == -2500.0);

   auto syntaxAt = [](const std::string& text) -> long {
      try
      {
         parseQuantity(text);
      }
      catch (const UnitsSyntaxError& e)
      {
         return long(e.position());
      }
      return -1;
   };
   CHECK(syntaxAt("1e-6*") == 5);
   CHECK(syntaxAt("*m") == 0);
   CHECK(syntaxAt("1/m*s") == 3);
   CHECK(syntaxAt("1 m") == 2);
   CHECK(syntaxAt("1*m^x") == 4);
   CHECK_THROWS_WITH_AS(parseQuantity("1*ft"), doctest::Contains("unknown unit 'ft'"), UnitsError);
   CHECK_THROWS_AS(parseQuantity("1*m^9"), UnitsError);
}

TEST_CASE("format and parse round trip")
{
   std::mt19937_64 rng(17);
   std::uniform_real_distribution<double> mag(-30, 30);
   std::uniform_int_distribution<int> e(-4, 4);
   for (int i = 0; i < 2000; ++i)
   {
      const double m = std::pow(10.0, mag(rng)) * (rng() % 2 ? 1 : -1) * (1.0 + double(rng() % 1000) / 999.0);
      const Quantity q(m, { e(rng), e(rng), e(rng) });
      const Quantity back = parseQuantity(formatQuantity(q));
      REQUIRE(back.magnitude() == q.magnitude());
      REQUIRE(back.dims() == q.dims());
   }
}

TEST_CASE("to_lattice")
{
   LatticeScale s{ parseQuantity("0.01*m"), parseQuantity("1e-3*s"), std::nullopt };
   const Quantity nu = parseQuantity("1e-6*m*m/s");
   // nu * dt / dx^2
   CHECK(toLattice(nu, s) == doctest::Approx(1e-6 * 1e-3 / (0.01 * 0.01)).epsilon(1e-14));
   CHECK(std::abs(toLattice(nu, s) - 1e-5) < 1e-18);
   CHECK(toLattice(Quantity(3.5), s) == 3.5);
   CHECK_THROWS_AS(toLattice(parseQuantity("0.072*N/m"), s), UnitsError);

   LatticeScale w{ parseQuantity("0.01*m"), parseQuantity("5e-4*s"), parseQuantity("1000*kg/m^3") };
   // N/m = kg/s^2 -> times dt^2 / (rho0 dx^3)
   const double oracle = 0.072 * (5e-4 * 5e-4) / (1000 * 0.01 * 0.01 * 0.01);
   CHECK(toLattice(parseQuantity("0.072*N/m"), w) == doctest::Approx(oracle).epsilon(1e-14));
   CHECK(std::abs(toLattice(parseQuantity("0.072*N/m"), w) - 1.8e-5) < 1e-17);
}

TEST_CASE("to_lattice is multiplicative")
{
   std::mt19937_64 rng(5);
   std::uniform_real_distribution<double> u(0.1, 10.0);
   std::uniform_int_distribution<int> e(-3, 3);
   for (int i = 0; i < 500; ++i)
   {
      LatticeScale s{ Quantity(u(rng) * 1e-3, { 1, 0, 0 }), Quantity(u(rng) * 1e-4, { 0, 0, 1 }),
                      Quantity(u(rng) * 100, { -3, 1, 0 }) };
      const Quantity a(u(rng), { e(rng), e(rng), e(rng) });
      const Quantity b(u(rng), { e(rng), e(rng), e(rng) });
      const double lhs = toLattice(a * b, s), rhs = toLattice(a, s) * toLattice(b, s);
      REQUIRE(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
   }
}

TEST_CASE("find_optimal_dt")
{
   const Quantity nu = parseQuantity("1e-6*m*m/s"), dx = parseQuantity("0.01*m");
   const StabilityConstraints c;

   // grid-scan oracle: feasibility tested directly from omega and lattice velocity
   auto feasible = [&](double dt, double uMax) {
      const double nuL   = 1e-6 * dt / (0.01 * 0.01);
      const double omega = 1.0 / (3.0 * nuL + 0.5);
      return omega <= c.omegaCap && uMax * dt / 0.01 <= c.uCap;
   };
   double best = -1.0;
   for (int i = 0; i <= 100000; ++i)
   {
      const double dt = 1.0 * i / 100000.0;
      if (feasible(dt, 1e-3)) best = dt;
   }
   REQUIRE(best > 0.0);

   const Quantity dt = findOptimalDt(nu, dx, parseQuantity("1e-3*m/s"), c);
   CHECK(dimsAre(dt, 0, 0, 1));
   CHECK(dt.magnitude() == doctest::Approx(0.5).epsilon(1e-14));
   CHECK(std::abs(dt.magnitude() - best) <= 1e-5);
   CHECK(feasible(dt.magnitude() * (1 - 1e-12), 1e-3));
   CHECK(!feasible(dt.magnitude() * (1 + 1e-6), 1e-3));

   const DtBounds b = dtBounds(nu, dx, parseQuantity("1e-3*m/s"), c);
   CHECK(b.dtMin.magnitude() == doctest::Approx(0.4273504273504).epsilon(1e-10));

   bool anyFeasible = false;
   for (int i = 0; i <= 100000; ++i)
      anyFeasible |= feasible(1.0 * i / 100000.0, 1.0);
   CHECK(!anyFeasible);
   CHECK_THROWS_WITH_AS(findOptimalDt(nu, dx, parseQuantity("1*m/s"), c), doctest::Contains("no feasible dt"),
                        UnitsError);
   CHECK_THROWS_WITH_AS(findOptimalDt(nu, dx, std::nullopt, c), doctest::Contains("missing constraint"), UnitsError);

   ConfigTree tree = channelConfig();
   CHECK(findOptimalDt(tree).magnitude() == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("maximality property")
{
   std::mt19937_64 rng(8);
   std::uniform_real_distribution<double> u(0.0, 1.0);
   int checked = 0;
   for (int i = 0; i < 300; ++i)
   {
      const Quantity nu(std::pow(10, -7 + 2 * u(rng)), { 2, 0, -1 });
      const Quantity dx(std::pow(10, -3 + 2 * u(rng)), { 1, 0, 0 });
      const Quantity um(std::pow(10, -4 + 2 * u(rng)), { 1, 0, -1 });
      Quantity dt;
      try
      {
         dt = findOptimalDt(nu, dx, um);
      }
      catch (const UnitsError&)
      {
         continue;
      }
      ++checked;
      auto ok = [&](double t) {
         const double nuL = nu.magnitude() * t / (dx.magnitude() * dx.magnitude());
         return 1.0 / (3.0 * nuL + 0.5) <= 1.95 && um.magnitude() * t / dx.magnitude() <= 0.05 * (1 + 1e-13);
      };
      REQUIRE(ok(dt.magnitude()));
      REQUIRE(!ok(dt.magnitude() * (1 + 1e-6)));
   }
   CHECK(checked > 10);
}

TEST_CASE("nondimensionalize_tree")
{
   ConfigTree c = channelConfig();
   c.set("Physical.dt", findOptimalDt(c));
   const ConfigTree n = nondimensionalizeTree(c);
   CHECK(!containsQuantities(n));
   CHECK(n.at("Physical.viscosity").number() == doctest::Approx(1e-6 * 0.5 / 1e-4).epsilon(1e-14));
   CHECK(n.at("Physical.dx").number() == doctest::Approx(1.0).epsilon(1e-15));
   CHECK(n.at("Control.timesteps").integer() == 10000);
   CHECK(n.at("Domain.size").list().size() == 3);
   CHECK(nondimensionalizeTree(n) == n);
   CHECK(nondimensionalizeTree(n, latticeScaleFromTree(c)) == n);

   ConfigTree plain;
   plain.set("Control.timesteps", 5);
   plain.set("Physical.omega", 1.2);
   CHECK(nondimensionalizeTree(plain) == plain);

   ConfigTree noDensity = c;
   noDensity.map()["Physical"].map().erase("density");
   CHECK_THROWS_WITH_AS(nondimensionalizeTree(noDensity), doctest::Contains("Physical.surface_tension"), UnitsError);

   ConfigTree noDt = channelConfig();
   CHECK_THROWS_AS(nondimensionalizeTree(noDt), ConfigError);

   const ConfigTree back = ConfigTree::fromJson(n.toJson());
   CHECK(back == n);
}

TEST_CASE("validate_config")
{
   ConfigTree c = channelConfig();
   c.set("Physical.dt", findOptimalDt(c));
   ConfigTree n = nondimensionalizeTree(c);
   CHECK(validateConfig(n).empty());

   ConfigTree bad = n;
   bad.set("Physical.omega", 2.1);
   auto d = validateConfig(bad);
   REQUIRE(d.size() == 1);
   CHECK(d[0].path == "Physical.omega");

   ConfigTree bad2 = n;
   bad2.set("Control.timesteps", -5);
   bad2.set("Physical.surface_tension", -0.1);
   d = validateConfig(bad2);
   REQUIRE(d.size() == 2);
   CHECK(d[0].path == "Physical.surface_tension");
   CHECK(d[1].path == "Control.timesteps");

   ConfigTree bad3 = n;
   bad3.set("Domain.block_size", ConfigList{ 7, 20, 20 });
   bad3.set("Control.vtk_output_interval", 0);
   CHECK(validateConfig(bad3).size() == 2);

   CHECK(!validateConfig(c).empty()); // quantities left over
   CHECK(relaxationRate(n).value() == doctest::Approx(1.0 / (3 * 0.005 + 0.5)));
}
