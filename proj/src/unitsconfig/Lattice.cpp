//======================================================================================================================
//
//! \file Lattice.cpp
//
//======================================================================================================================
#include "blockforge/unitsconfig/Lattice.h"

#include <cmath>

namespace blockforge::unitsconfig {

namespace {

void expectDims(const Quantity& q, const Dims& d, const std::string& what)
{
   if (!(q.dims() == d))
      throw UnitsError(what + " must have dimensions " + formatDims(d) + ", got " + formatDims(q.dims()));
}

const Quantity& quantityAt(const ConfigTree& config, const std::string& path)
{
   const ConfigValue* v = config.find(path);
   if (!v) throw ConfigError("missing config entry " + path);
   if (!v->isQuantity()) throw ConfigError(path + " must be a physical quantity");
   return v->quantity();
}

ConfigValue convert(const ConfigValue& v, const LatticeScale& scale, const std::string& path)
{
   if (v.isQuantity())
   {
      try
      {
         return toLattice(v.quantity(), scale);
      }
      catch (const UnitsError& e)
      {
         throw UnitsError(path + ": " + e.what());
      }
   }
   if (v.isMap())
   {
      ConfigMap out;
      for (const auto& [k, e] : v.map())
         out[k] = convert(e, scale, path.empty() ? k : path + "." + k);
      return out;
   }
   if (v.isList())
   {
      ConfigList out;
      for (std::size_t i = 0; i < v.list().size(); ++i)
         out.push_back(convert(v.list()[i], scale, path + "[" + std::to_string(i) + "]"));
      return out;
   }
   return v;
}

void findQuantityPaths(const ConfigValue& v, const std::string& path, std::vector<std::string>& out)
{
   if (v.isQuantity() && !v.quantity().dimensionless()) out.push_back(path);
   else if (v.isMap())
      for (const auto& [k, e] : v.map())
         findQuantityPaths(e, path.empty() ? k : path + "." + k, out);
   else if (v.isList())
      for (std::size_t i = 0; i < v.list().size(); ++i)
         findQuantityPaths(v.list()[i], path + "[" + std::to_string(i) + "]", out);
}

} // namespace

void LatticeScale::validate() const
{
   expectDims(dx, { 1, 0, 0 }, "dx");
   expectDims(dt, { 0, 0, 1 }, "dt");
   if (!(dx.magnitude() > 0.0) || !(dt.magnitude() > 0.0)) throw UnitsError("dx and dt must be positive");
   if (rho0)
   {
      expectDims(*rho0, { -3, 1, 0 }, "density");
      if (!(rho0->magnitude() > 0.0)) throw UnitsError("density must be positive");
   }
}

double toLattice(const Quantity& q, const LatticeScale& scale)
{
   const Dims& d = q.dims();
   double value  = q.magnitude();
   if (d.mass != 0)
   {
      if (!scale.rho0) throw UnitsError("a density is required to convert " + formatDims(d));
      value /= std::pow(scale.rho0->magnitude() * std::pow(scale.dx.magnitude(), 3), d.mass);
   }
   value /= std::pow(scale.dx.magnitude(), d.length);
   value /= std::pow(scale.dt.magnitude(), d.time);
   return value;
}

DtBounds dtBounds(const Quantity& viscosity, const Quantity& dx, const Quantity& maxVelocity,
                  const StabilityConstraints& c)
{
   expectDims(viscosity, { 2, 0, -1 }, "viscosity");
   expectDims(dx, { 1, 0, 0 }, "dx");
   expectDims(maxVelocity, { 1, 0, -1 }, "max_velocity");
   const double nuLatticeMin = (1.0 / c.omegaCap - 0.5) / 3.0;
   const Quantity dtMin      = nuLatticeMin * dx * dx / viscosity;
   const Quantity dtMax      = c.uCap * dx / maxVelocity;
   return { dtMin, dtMax };
}

Quantity findOptimalDt(const Quantity& viscosity, const Quantity& dx, const std::optional<Quantity>& maxVelocity,
                       const StabilityConstraints& c)
{
   if (!maxVelocity) throw UnitsError("missing constraint: max_velocity is needed to bound dt from above");
   const DtBounds b = dtBounds(viscosity, dx, *maxVelocity, c);
   if (b.dtMin.magnitude() > b.dtMax.magnitude())
      throw UnitsError("no feasible dt: relaxation bound requires dt >= " + formatQuantity(b.dtMin) +
                       " but velocity bound requires dt <= " + formatQuantity(b.dtMax));
   return b.dtMax;
}

Quantity findOptimalDt(const ConfigTree& config, const StabilityConstraints& c)
{
   std::optional<Quantity> uMax;
   if (config.find("Physical.max_velocity")) uMax = quantityAt(config, "Physical.max_velocity");
   return findOptimalDt(quantityAt(config, "Physical.viscosity"), quantityAt(config, "Physical.dx"), uMax, c);
}

LatticeScale latticeScaleFromTree(const ConfigTree& config)
{
   LatticeScale s;
   s.dx = quantityAt(config, "Physical.dx");
   s.dt = quantityAt(config, "Physical.dt");
   if (config.find("Physical.density")) s.rho0 = quantityAt(config, "Physical.density");
   s.validate();
   return s;
}

ConfigTree nondimensionalizeTree(const ConfigTree& tree, const LatticeScale& scale)
{
   scale.validate();
   return convert(tree, scale, "");
}

bool containsQuantities(const ConfigTree& tree)
{
   if (tree.isQuantity()) return true;
   if (tree.isMap())
      for (const auto& [k, e] : tree.map())
         if (containsQuantities(e)) return true;
   if (tree.isList())
      for (const auto& e : tree.list())
         if (containsQuantities(e)) return true;
   return false;
}

ConfigTree nondimensionalizeTree(const ConfigTree& tree)
{
   if (!containsQuantities(tree)) return tree;
   return nondimensionalizeTree(tree, latticeScaleFromTree(tree));
}

std::optional<double> relaxationRate(const ConfigTree& config)
{
   if (const ConfigValue* w = config.find("Physical.omega"); w && w->isNumber()) return w->number();
   if (const ConfigValue* nu = config.find("Physical.viscosity"); nu && nu->isNumber())
      return 1.0 / (3.0 * nu->number() + 0.5);
   return std::nullopt;
}

std::vector<Diagnostic> validateConfig(const ConfigTree& config)
{
   std::vector<Diagnostic> out;
   auto add = [&](const std::string& path, const std::string& msg) { out.push_back({ path, msg }); };

   std::vector<std::string> quantities;
   findQuantityPaths(config, "", quantities);
   for (const auto& p : quantities)
      add(p, "not converted to lattice units");
   if (!config.isMap())
   {
      add("", "configuration must be a mapping");
      return out;
   }

   auto number = [&](const std::string& path) -> std::optional<double> {
      const ConfigValue* v = config.find(path);
      if (!v) return std::nullopt;
      if (!v->isNumber())
      {
         add(path, "must be a number");
         return std::nullopt;
      }
      return v->number();
   };

   if (config.find("Physical.omega"))
   {
      if (auto w = number("Physical.omega"); w && !(*w > 0.0 && *w < 2.0))
         add("Physical.omega", "relaxation rate " + std::to_string(*w) + " outside (0, 2)");
   }
   else if (config.find("Physical.viscosity"))
   {
      if (auto nu = number("Physical.viscosity"); nu && !(*nu > 0.0))
         add("Physical.viscosity", "lattice viscosity must be positive");
      else if (nu && !(1.0 / (3.0 * *nu + 0.5) < 2.0))
         add("Physical.viscosity", "relaxation rate outside (0, 2)");
   }
   else add("Physical", "either omega or viscosity is required");

   if (auto sigma = number("Physical.surface_tension"); sigma && !(*sigma >= 0.0))
      add("Physical.surface_tension", "surface tension must be non-negative");

   if (!config.find("Control.timesteps")) add("Control.timesteps", "missing");
   else if (auto t = number("Control.timesteps"); t && !(*t >= 1.0 && *t == std::floor(*t)))
      add("Control.timesteps", "must be an integer >= 1");
   if (auto v = number("Control.vtk_output_interval"); v && !(*v >= 1.0 && *v == std::floor(*v)))
      add("Control.vtk_output_interval", "must be an integer >= 1");
   if (auto r = number("Control.relabel_interval"); r && !(*r >= 1.0 && *r == std::floor(*r)))
      add("Control.relabel_interval", "must be an integer >= 1");
   if (const ConfigValue* mode = config.find("Control.mode"))
      if (!mode->isString() || (mode->string() != "lbm" && mode->string() != "fslbm"))
         add("Control.mode", "must be 'lbm' or 'fslbm'");

   auto triple = [&](const std::string& path, bool required) -> std::optional<std::array<double, 3>> {
      const ConfigValue* v = config.find(path);
      if (!v)
      {
         if (required) add(path, "missing");
         return std::nullopt;
      }
      if (!v->isList() || v->list().size() != 3)
      {
         add(path, "must be a list of three entries");
         return std::nullopt;
      }
      std::array<double, 3> r{};
      for (std::size_t i = 0; i < 3; ++i)
      {
         const auto& e = v->list()[i];
         if (e.isBool()) r[i] = e.boolean() ? 1.0 : 0.0;
         else if (e.isNumber()) r[i] = e.number();
         else
         {
            add(path, "entries must be numbers");
            return std::nullopt;
         }
      }
      return r;
   };
   const auto size  = triple("Domain.size", true);
   const auto block = triple("Domain.block_size", false);
   triple("Domain.periodic", false);
   if (size)
      for (std::size_t d = 0; d < 3; ++d)
         if (!((*size)[d] >= 1.0 && (*size)[d] == std::floor((*size)[d])))
         {
            add("Domain.size", "extents must be positive integers");
            break;
         }
   if (size && block)
      for (std::size_t d = 0; d < 3; ++d)
         if (!((*block)[d] >= 1.0 && (*block)[d] == std::floor((*block)[d])) ||
             std::fmod((*size)[d], (*block)[d]) != 0.0)
         {
            add("Domain.block_size", "block extents must be positive integers dividing the domain size");
            break;
         }
   return out;
}

} // namespace blockforge::unitsconfig
