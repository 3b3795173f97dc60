//======================================================================================================================
//
//! \file Interpreter.cpp
//
//======================================================================================================================
#include "Internal.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>
#include <sstream>

namespace blockforge::script {

using namespace detail;

namespace {

std::once_flag runtimeOnce;

std::string lower(std::string s)
{
   std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
   return s;
}

std::string cellText(const blockgrid::Vec3i& c)
{
   return "(" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," + std::to_string(c[2]) + ")";
}

double number(py::handle h, const std::string& what)
{
   try
   {
      return py::cast<double>(h);
   }
   catch (const py::cast_error&)
   {
      throw ScriptError(what + " has to be a number");
   }
}

BoundarySpec boundaryFrom(py::handle h)
{
   if (py::isinstance<py::str>(h)) return parseBoundary(h.cast<std::string>(), {});
   const auto seq = py::reinterpret_borrow<py::sequence>(h);
   if (py::len(seq) == 0 || !py::isinstance<py::str>(seq[0]))
      throw ScriptError("boundary has to be a name or a list starting with a name");
   std::vector<double> params;
   for (std::size_t i = 1; i < py::len(seq); ++i)
      params.push_back(number(seq[i], "boundary parameter"));
   return parseBoundary(seq[0].cast<std::string>(), params);
}

bool emptyBoundary(py::handle h)
{
   if (h.is_none()) return true;
   if (py::isinstance<py::str>(h)) return false;
   return py::isinstance<py::sequence>(h) && py::len(h) == 0;
}

lbm::Vec3 vec3From(py::handle h)
{
   const auto seq = py::reinterpret_borrow<py::sequence>(h);
   if (py::len(seq) != 3) throw ScriptError("initVel needs three components");
   return { number(seq[0], "initVel"), number(seq[1], "initVel"), number(seq[2], "initVel") };
}

double fillLevelFrom(py::handle h, const blockgrid::Vec3i& cell)
{
   const double phi = number(h, "fill_level");
   if (!(phi >= 0.0 && phi <= 1.0))
      throw ScriptError("fill_level " + std::to_string(phi) + " out of range [0,1] at cell " + cellText(cell));
   return phi;
}

CellInit cellInitFrom(py::handle result, const blockgrid::Vec3i& cell)
{
   CellInit init;
   if (result.is_none()) return init;
   if (!py::isinstance<py::dict>(result))
      throw ScriptError("domain_init has to return a mapping at cell " + cellText(cell));
   for (auto item : result.cast<py::dict>())
   {
      const auto key = py::str(item.first).cast<std::string>();
      if (key == "fill_level") init.fillLevel = fillLevelFrom(item.second, cell);
      else if (key == "boundary")
      {
         if (!emptyBoundary(item.second)) init.boundary = boundaryFrom(item.second);
      }
      else if (key == "initVel") init.initVel = vec3From(item.second);
      else if (key == "initDensity") init.initDensity = number(item.second, "initDensity");
      else throw ScriptError("unrecognized domain_init key '" + key + "' at cell " + cellText(cell));
   }
   return init;
}

} // namespace

void initializeRuntime()
{
   std::call_once(runtimeOnce, [] {
      if (!Py_IsInitialized()) py::initialize_interpreter();
      {
         py::module_::import("numpy");
         blockforgeModule().attr("_install_output")();
      }
      // the interpreter lives until process exit; worker threads take the lock on demand
      PyEval_SaveThread();
   });
}

BoundarySpec parseBoundary(const std::string& name, const std::vector<double>& params)
{
   const auto n = lower(name);
   BoundarySpec spec;
   std::size_t expected = 0;
   if (n == "noslip") spec.type = lbm::CellType::NoSlip;
   else if (n == "obstacle") spec.type = lbm::CellType::Obstacle;
   else if (n == "pressure")
   {
      spec.type = lbm::CellType::Pressure;
      expected  = 1;
   }
   else if (n == "velocity")
   {
      spec.type = lbm::CellType::Velocity;
      expected  = 3;
   }
   else throw ScriptError("unknown boundary '" + name + "'");
   if (params.size() != expected)
      throw ScriptError("boundary '" + name + "' takes " + std::to_string(expected) + " parameter(s), got " +
                        std::to_string(params.size()));
   spec.params = params;
   return spec;
}

Exposure hostExpose(std::string name, ExposedObject object, ExposeMode mode)
{
   const bool byRef = mode == ExposeMode::ByReference;
   const std::string what = std::visit(
      [&](const auto& v) -> std::string {
         using T = std::decay_t<decltype(v)>;
         if constexpr (std::is_same_v<T, BlockCollectionRef>)
         {
            if (!v.storage) return "null block collection";
            if (!byRef) return "a block collection can only be exposed by reference";
         }
         else if constexpr (std::is_pointer_v<T>)
         {
            if (!v) return "null object";
            if constexpr (std::is_same_v<T, const freesurface::BubbleTable*>)
               if (byRef) return "a bubble table can only be exposed by copy";
         }
         else if (byRef) return "immutable values can only be exposed by copy";
         return {};
      },
      object);
   if (!what.empty()) throw ScriptError("cannot expose '" + name + "': " + what);
   return Exposure{ std::move(name), std::move(object), mode };
}

struct Interpreter::Impl
{
   HostServices services;
   WorkerContext ctx;
   std::optional<py::dict> ns;

   template <typename F>
   auto call(F&& f)
   {
      py::gil_scoped_acquire gil;
      ContextScope scope(&ctx);
      return f();
   }
};

Interpreter::Interpreter(HostServices services) : impl_(std::make_unique<Impl>())
{
   initializeRuntime();
   impl_->services     = std::move(services);
   impl_->ctx.services = &impl_->services;
   impl_->call([&] {
      py::dict ns;
      ns["__builtins__"] = py::module_::import("builtins");
      ns["__name__"]     = "__scenario__";
      py::exec("from blockforge import *\nimport blockforge\n", ns);
      impl_->ns = std::move(ns);
   });
}

Interpreter::~Interpreter()
{
   py::gil_scoped_acquire gil;
   impl_->ctx.callbacks.clear();
   if (impl_->ns) impl_->ns->clear();
   impl_->ns.reset();
}

HostServices& Interpreter::services() { return impl_->services; }

void Interpreter::loadScenario(const std::string& path)
{
   std::ifstream in(path);
   if (!in) throw ScriptError("cannot read scenario '" + path + "'");
   std::stringstream ss;
   ss << in.rdbuf();
   loadSource(ss.str(), path);
}

void Interpreter::loadSource(const std::string& source, const std::string& filename)
{
   impl_->call([&] {
      impl_->ctx.callbacks.clear();
      impl_->ctx.batchCallbacks.clear();
      (*impl_->ns)["__file__"] = filename;
      try
      {
         blockforgeModule().attr("_load")(source, filename, *impl_->ns);
      }
      catch (py::error_already_set& e)
      {
         throw ScriptError("script load error in " + filename + ":\n" + formatError(e));
      }
      if (!impl_->ctx.callbacks.count(callbacks::config)) throw ScriptError("missing config callback");
   });
}

bool Interpreter::hasCallback(const std::string& name) const { return impl_->ctx.callbacks.count(name) != 0; }

std::vector<std::string> Interpreter::callbackNames() const
{
   std::vector<std::string> names;
   for (const auto& [k, v] : impl_->ctx.callbacks)
      names.push_back(k);
   return names;
}

unitsconfig::ConfigTree Interpreter::invokeConfig()
{
   return impl_->call([&] {
      if (!hasCallback(callbacks::config)) throw ScriptError("missing config callback");
      py::object result;
      try
      {
         result = impl_->ctx.callbacks.at(callbacks::config)();
      }
      catch (py::error_already_set& e)
      {
         throw ScriptError("config callback failed:\n" + formatError(e));
      }
      if (!py::isinstance<py::dict>(result) && !py::isinstance(result, py::module_::import("blockforge").attr("ConfigNode")))
         throw ScriptError("config callback has to return a mapping, got " +
                           py::str(py::type::handle_of(result).attr("__name__")).cast<std::string>());
      return toConfig(result, "");
   });
}

CellInit Interpreter::invokeDomainInit(const blockgrid::Vec3i& cell)
{
   const blockgrid::CellInterval box{ cell, cell };
   return invokeDomainInitBox(box).front();
}

std::vector<CellInit> Interpreter::invokeDomainInitBox(const blockgrid::CellInterval& box)
{
   std::vector<CellInit> out(static_cast<std::size_t>(std::max<std::int64_t>(box.numCells(), 0)));
   if (out.empty() || !hasCallback(callbacks::domainInit)) return out;
   impl_->call([&] {
      const py::object fn = impl_->ctx.callbacks.at(callbacks::domainInit);
      try
      {
         if (!impl_->ctx.batchCallbacks.count(callbacks::domainInit))
         {
            std::size_t i = 0;
            for (int z = box.min[2]; z <= box.max[2]; ++z)
               for (int y = box.min[1]; y <= box.max[1]; ++y)
                  for (int x = box.min[0]; x <= box.max[0]; ++x)
                     out[i++] = cellInitFrom(fn(py::make_tuple(x, y, z)), { x, y, z });
            return;
         }

         const auto n = py::ssize_t(out.size());
         std::vector<std::int64_t> cx, cy, cz;
         for (int z = box.min[2]; z <= box.max[2]; ++z)
            for (int y = box.min[1]; y <= box.max[1]; ++y)
               for (int x = box.min[0]; x <= box.max[0]; ++x)
               {
                  cx.push_back(x);
                  cy.push_back(y);
                  cz.push_back(z);
               }
         const py::array_t<std::int64_t> xs(n, cx.data()), ys(n, cy.data()), zs(n, cz.data());
         const py::object result = fn(xs, ys, zs);
         if (result.is_none()) return;
         if (!py::isinstance<py::dict>(result)) throw ScriptError("batch domain_init has to return a mapping");
         const auto np = py::module_::import("numpy");
         const auto cellAt = [&](py::ssize_t k) -> blockgrid::Vec3i {
            return { int(cx[std::size_t(k)]), int(cy[std::size_t(k)]), int(cz[std::size_t(k)]) };
         };
         for (auto item : result.cast<py::dict>())
         {
            const auto key = py::str(item.first).cast<std::string>();
            if (key == "fill_level" || key == "initDensity")
            {
               const auto a = np.attr("broadcast_to")(np.attr("asarray")(item.second, "float64"), py::make_tuple(n))
                                 .cast<py::array_t<double>>();
               const auto r = a.unchecked<1>();
               for (py::ssize_t k = 0; k < n; ++k)
               {
                  if (key == "fill_level") out[std::size_t(k)].fillLevel = fillLevelFrom(py::float_(r(k)), cellAt(k));
                  else out[std::size_t(k)].initDensity = r(k);
               }
            }
            else if (key == "initVel")
            {
               const auto a = np.attr("broadcast_to")(np.attr("asarray")(item.second, "float64"), py::make_tuple(n, 3))
                                 .cast<py::array_t<double>>();
               const auto r = a.unchecked<2>();
               for (py::ssize_t k = 0; k < n; ++k)
                  out[std::size_t(k)].initVel = lbm::Vec3{ r(k, 0), r(k, 1), r(k, 2) };
            }
            else if (key == "boundary")
            {
               const auto seq = py::reinterpret_borrow<py::sequence>(item.second);
               if (py::len(seq) != std::size_t(n)) throw ScriptError("batch boundary needs one entry per cell");
               for (py::ssize_t k = 0; k < n; ++k)
               {
                  const py::object e = seq[std::size_t(k)];
                  if (!emptyBoundary(e)) out[std::size_t(k)].boundary = boundaryFrom(e);
               }
            }
            else throw ScriptError("unrecognized domain_init key '" + key + "'");
         }
      }
      catch (py::error_already_set& e)
      {
         throw ScriptError("domain_init callback failed:\n" + formatError(e));
      }
   });
   return out;
}

void Interpreter::invokeCallback(const std::string& name, const std::vector<Exposure>& exposures)
{
   if (!hasCallback(name)) return;
   impl_->call([&] {
      py::dict kwargs;
      for (const auto& e : exposures)
         kwargs[py::str(e.name)] = exposeToPython(e);
      try
      {
         blockforgeModule().attr("_call_with_exposures")(impl_->ctx.callbacks.at(name), kwargs);
      }
      catch (py::error_already_set& e)
      {
         throw ScriptError("callback '" + name + "' failed:\n" + formatError(e));
      }
   });
}

std::string Interpreter::evaluate(const std::string& expression)
{
   return impl_->call([&] {
      try
      {
         return py::repr(py::eval(expression, *impl_->ns)).cast<std::string>();
      }
      catch (py::error_already_set& e)
      {
         throw ScriptError(formatError(e));
      }
   });
}

void Interpreter::run(const std::string& code)
{
   impl_->call([&] {
      try
      {
         py::exec(code, *impl_->ns);
      }
      catch (py::error_already_set& e)
      {
         throw ScriptError(formatError(e));
      }
   });
}

steering::Completeness Interpreter::probe(const std::string& text)
{
   return impl_->call([&] {
      const int r = blockforgeModule().attr("_probe")(text).cast<int>();
      return r == 0 ? steering::Completeness::Complete
                    : (r == 1 ? steering::Completeness::Incomplete : steering::Completeness::Invalid);
   });
}

steering::ExecResult Interpreter::execute(const std::string& command)
{
   return impl_->call([&] {
      auto& ctx             = impl_->ctx;
      ctx.capturing         = true;
      ctx.resumeRequested   = false;
      ctx.shutdownRequested = false;
      ctx.captured.clear();
      try
      {
         blockforgeModule().attr("_console_exec")(command, *impl_->ns);
      }
      catch (py::error_already_set& e)
      {
         ctx.captured += formatError(e);
      }
      ctx.capturing = false;
      steering::ExecResult r;
      r.output   = std::move(ctx.captured);
      r.resume   = ctx.resumeRequested;
      r.shutdown = ctx.shutdownRequested;
      ctx.captured.clear();
      return r;
   });
}

} // namespace blockforge::script
