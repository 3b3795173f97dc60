//======================================================================================================================
//
//! \file Module.cpp
//! \brief The embedded `blockforge` Python module: units, geometry, block access, collectives, logging, console.
//
//======================================================================================================================
#include "Internal.h"

#include "blockforge/comms/Collectives.h"
#include "blockforge/field/FieldView.h"
#include "blockforge/geometry/Geometry.h"
#include "blockforge/lbm/Sweeps.h"
#include "blockforge/steering/Frame.h"

#include "json.hpp"

#include <cmath>
#include <iostream>

namespace blockforge::script::detail {

namespace {

thread_local WorkerContext* tlsContext = nullptr;

} // namespace

WorkerContext* currentContext() { return tlsContext; }

WorkerContext& requireContext()
{
   if (!tlsContext) throw ScriptError("no blockforge interpreter is active on this thread");
   return *tlsContext;
}

ContextScope::ContextScope(WorkerContext* ctx) : previous_(tlsContext) { tlsContext = ctx; }
ContextScope::~ContextScope() { tlsContext = previous_; }

namespace {

using unitsconfig::ConfigList;
using unitsconfig::ConfigMap;
using unitsconfig::ConfigValue;
using unitsconfig::Dims;
using unitsconfig::Quantity;

struct BlockHandle
{
   blockgrid::Block* block = nullptr;
};

struct BlockCollection
{
   blockgrid::BlockStorage* storage = nullptr;
   int worker = 0;
};

struct ConfigNode
{
   ConfigValue* node = nullptr;
};

HostServices* services()
{
   auto* ctx = currentContext();
   return ctx ? ctx->services : nullptr;
}

comms::Transport* transportOrNull()
{
   auto* s = services();
   return s ? s->transport : nullptr;
}

comms::Transport& requireTransport()
{
   auto* t = transportOrNull();
   if (!t) throw ScriptError("no transport attached to this interpreter");
   return *t;
}

blockgrid::BlockStorage& requireStorage()
{
   auto* s = services();
   if (!s || !s->storage) throw ScriptError("no block storage attached to this interpreter");
   return *s->storage;
}

int toCoordinate(py::handle h) { return int(std::floor(py::cast<double>(h))); }

blockgrid::Vec3i toCell(py::handle h)
{
   const auto seq = py::reinterpret_borrow<py::sequence>(h);
   if (py::len(seq) != 3) throw ScriptError("a cell needs three coordinates");
   return { toCoordinate(seq[0]), toCoordinate(seq[1]), toCoordinate(seq[2]) };
}

int toAxis(py::handle h)
{
   if (py::isinstance<py::str>(h))
   {
      const auto s = h.cast<std::string>();
      if (s == "x") return 0;
      if (s == "y") return 1;
      if (s == "z") return 2;
      throw ScriptError("unknown axis '" + s + "'");
   }
   return h.cast<int>();
}

py::array fieldArray(field::Field& f, py::handle base, bool withGhostLayers = false)
{
   const auto d = field::exportArrayView(f, true, withGhostLayers);
   std::vector<py::ssize_t> shape(d.shape.begin(), d.shape.end());
   std::vector<py::ssize_t> strides(d.stridesBytes.begin(), d.stridesBytes.end());
   return py::array(py::dtype::of<double>(), shape, strides, d.base(), base);
}

py::array ownerlessFieldArray(field::Field& f)
{
   return fieldArray(f, py::capsule(static_cast<void*>(&f), [](void*) {}));
}

comms::ReduceOp toReduceOp(int op)
{
   if (op < 0 || op > 2) throw ScriptError("unknown reduce operation " + std::to_string(op));
   return comms::ReduceOp(op);
}

void emit(const std::string& text)
{
   auto* ctx = currentContext();
   if (ctx && ctx->capturing)
   {
      ctx->captured += text;
      return;
   }
   std::cout << text << std::flush;
}

void updateDict(py::dict d, const ConfigMap& map)
{
   for (const auto& [key, value] : map)
   {
      py::str k(key);
      if (d.contains(k) && py::isinstance<py::dict>(d[k]) && value.isMap())
         updateDict(d[k].cast<py::dict>(), value.map());
      else
         d[k] = toPython(value);
   }
}

py::object scaleToDict(const unitsconfig::LatticeScale& s)
{
   py::dict d;
   d["dx"]      = py::cast(s.dx);
   d["dt"]      = py::cast(s.dt);
   d["density"] = s.rho0 ? py::cast(*s.rho0) : py::none();
   return d;
}

py::object bubblesToDict(const freesurface::BubbleTable& table)
{
   py::dict d;
   for (const auto& [id, b] : table.bubbles())
   {
      py::dict entry;
      entry["V0"]       = b.V0;
      entry["V"]        = b.V;
      entry["pressure"] = b.V > 0.0 ? b.pressure() : 1.0;
      d[py::int_(id)]   = entry;
   }
   return d;
}

std::string sliceJson(const std::vector<double>& values, const std::string& name, const std::string& axis, int coarsen)
{
   nlohmann::json j;
   j["name"]    = name;
   j["axis"]    = axis;
   j["coarsen"] = coarsen;
   auto arr     = nlohmann::json::array();
   for (double v : values)
      arr.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
   j["values"] = arr;
   return j.dump();
}

// Helpers written in Python, executed in the module namespace.
const char* const supportCode = R"PY(
import sys as _sys
import codeop as _codeop
import inspect as _inspect
import traceback as _traceback

__all__ = ['callback', 'Quantity', 'UnitsError', 'quantity', 'm', 'kg', 's', 'N', 'Pa', 'find_optimal_dt',
           'nondimensionalize', 'to_lattice', 'validate_config', 'is_at_border', 'sphere_pack', 'SpherePack', 'Pipe',
           'mpi', 'log', 'gather_slice', 'send_frame', 'send_slice', 'send_metric', 'resume', 'shutdown', 'step',
           'blocks', 'set_pressure']


class _Output:
    encoding = 'utf-8'
    errors = 'strict'

    def __init__(self, err):
        self._err = err

    def write(self, text):
        _write(str(text), self._err)
        return len(text)

    def flush(self):
        pass

    def isatty(self):
        return False


def _install_output():
    _sys.stdout = _Output(False)
    _sys.stderr = _Output(True)


def _format_exception(etype, value, tb):
    return ''.join(_traceback.format_exception(etype, value, tb))


def _call_with_exposures(fn, exposures):
    try:
        sig = _inspect.signature(fn)
    except (TypeError, ValueError):
        return fn(**exposures)
    kwargs = {}
    for name, p in sig.parameters.items():
        if p.kind == p.VAR_KEYWORD:
            return fn(**exposures)
        if p.kind in (p.VAR_POSITIONAL, p.POSITIONAL_ONLY):
            continue
        if name in exposures:
            kwargs[name] = exposures[name]
        elif p.default is p.empty:
            raise TypeError("callback parameter '%s' has no exposed object" % name)
    return fn(**kwargs)


def _probe(text):
    try:
        code = _codeop.compile_command(text, '<console>', 'single')
    except (SyntaxError, OverflowError, ValueError):
        return 2
    return 1 if code is None else 0


def _load(source, filename, ns):
    exec(compile(source, filename, 'exec'), ns)


def _console_exec(source, ns):
    try:
        try:
            code = compile(source + '\n', '<console>', 'single')
        except SyntaxError:
            code = compile(source + '\n', '<console>', 'exec')
        exec(code, ns)
    except SystemExit:
        print('use resume() to continue or shutdown() to stop the run')
    except BaseException as e:
        _traceback.print_exception(type(e), e, e.__traceback__.tb_next)
)PY";

} // namespace

py::object toPython(const ConfigValue& value)
{
   return std::visit(
      [](const auto& v) -> py::object {
         using T = std::decay_t<decltype(v)>;
         if constexpr (std::is_same_v<T, std::monostate>) return py::none();
         else if constexpr (std::is_same_v<T, bool>) return py::bool_(v);
         else if constexpr (std::is_same_v<T, std::int64_t>) return py::int_(v);
         else if constexpr (std::is_same_v<T, double>) return py::float_(v);
         else if constexpr (std::is_same_v<T, std::string>) return py::str(v);
         else if constexpr (std::is_same_v<T, Quantity>) return py::cast(v);
         else if constexpr (std::is_same_v<T, ConfigList>)
         {
            py::list l;
            for (const auto& e : v)
               l.append(toPython(e));
            return l;
         }
         else
         {
            py::dict d;
            for (const auto& [k, e] : v)
               d[py::str(k)] = toPython(e);
            return d;
         }
      },
      value.variant());
}

ConfigValue toConfig(py::handle o, const std::string& path)
{
   const auto where = [&] { return path.empty() ? std::string("<root>") : path; };
   if (o.is_none()) return {};
   if (PyBool_Check(o.ptr())) return ConfigValue(o.cast<bool>());
   if (py::isinstance<Quantity>(o)) return ConfigValue(o.cast<Quantity>());
   if (PyLong_Check(o.ptr()))
   {
      try
      {
         return ConfigValue(o.cast<std::int64_t>());
      }
      catch (const py::cast_error&)
      {
         throw ScriptError("integer out of range at '" + where() + "'");
      }
   }
   if (PyFloat_Check(o.ptr())) return ConfigValue(o.cast<double>());
   if (py::isinstance<py::str>(o)) return ConfigValue(o.cast<std::string>());
   if (py::isinstance<ConfigNode>(o)) return *o.cast<ConfigNode>().node;
   if (py::isinstance<py::dict>(o) || (py::hasattr(o, "items") && py::hasattr(o, "keys")))
   {
      ConfigMap map;
      for (auto item : o.attr("items")())
      {
         const auto pair = item.cast<py::tuple>();
         if (!py::isinstance<py::str>(pair[0]))
            throw ScriptError("non-string key " + py::repr(pair[0]).cast<std::string>() + " at '" + where() + "'");
         const auto key = pair[0].cast<std::string>();
         map[key]       = toConfig(pair[1], path.empty() ? key : path + "." + key);
      }
      return ConfigValue(std::move(map));
   }
   if (py::isinstance<py::list>(o) || py::isinstance<py::tuple>(o) || py::isinstance<py::array>(o))
   {
      const py::object seq = py::isinstance<py::array>(o) ? o.attr("tolist")() : py::reinterpret_borrow<py::object>(o);
      if (!py::isinstance<py::list>(seq) && !py::isinstance<py::tuple>(seq)) return toConfig(seq, path);
      ConfigList list;
      std::size_t i = 0;
      for (auto e : seq)
         list.push_back(toConfig(e, where() + "[" + std::to_string(i++) + "]"));
      return ConfigValue(std::move(list));
   }
   if (py::hasattr(o, "__index__")) return ConfigValue(py::int_(py::reinterpret_borrow<py::object>(o)).cast<std::int64_t>());
   if (py::hasattr(o, "__float__")) return ConfigValue(py::float_(py::reinterpret_borrow<py::object>(o)).cast<double>());
   throw ScriptError("cannot convert value of type " + py::str(py::type::handle_of(o).attr("__name__")).cast<std::string>() +
                     " at '" + where() + "'");
}

py::object exposeToPython(const Exposure& e)
{
   const bool byRef = e.mode == ExposeMode::ByReference;
   return std::visit(
      [&](const auto& v) -> py::object {
         using T = std::decay_t<decltype(v)>;
         if constexpr (std::is_same_v<T, BlockCollectionRef>) return py::cast(BlockCollection{ v.storage, v.worker });
         else if constexpr (std::is_same_v<T, field::Field*>)
         {
            auto a = ownerlessFieldArray(*v);
            return byRef ? py::object(a) : a.attr("copy")();
         }
         else if constexpr (std::is_same_v<T, unitsconfig::ConfigTree*>)
            return byRef ? py::cast(ConfigNode{ v }) : toPython(*v);
         else if constexpr (std::is_same_v<T, const unitsconfig::LatticeScale*>)
            return byRef ? py::cast(v, py::return_value_policy::reference) : scaleToDict(*v);
         else if constexpr (std::is_same_v<T, const freesurface::BubbleTable*>) return bubblesToDict(*v);
         else return py::cast(v);
      },
      e.object);
}

std::string formatError(py::error_already_set& e)
{
   try
   {
      return blockforgeModule()
         .attr("_format_exception")(e.type(), e.value(), e.trace())
         .cast<std::string>();
   }
   catch (const std::exception&)
   {
      return e.what();
   }
}

py::module_ blockforgeModule() { return py::module_::import("blockforge"); }

} // namespace blockforge::script::detail

namespace {

using namespace blockforge;
using namespace blockforge::script;
using namespace blockforge::script::detail;
using unitsconfig::Quantity;

void bindUnits(py::module_& m)
{
   py::register_exception<unitsconfig::UnitsError>(m, "UnitsError", PyExc_ValueError);
   py::register_exception<unitsconfig::ConfigError>(m, "ConfigError", PyExc_ValueError);

   py::class_<Quantity>(m, "Quantity")
      .def(py::init([](double magnitude, std::array<int, 3> dims) {
              return Quantity(magnitude, unitsconfig::Dims{ dims[0], dims[1], dims[2] });
           }),
           py::arg("magnitude"), py::arg("dims") = std::array<int, 3>{ 0, 0, 0 })
      .def_property_readonly("magnitude", &Quantity::magnitude)
      .def_property_readonly("dims",
                             [](const Quantity& q) {
                                return py::make_tuple(q.dims().length, q.dims().mass, q.dims().time);
                             })
      .def("__mul__", [](const Quantity& a, const Quantity& b) { return a * b; }, py::is_operator())
      .def("__mul__", [](const Quantity& a, double k) { return a * k; }, py::is_operator())
      .def("__rmul__", [](const Quantity& a, double k) { return a * k; }, py::is_operator())
      .def("__truediv__", [](const Quantity& a, const Quantity& b) { return a / b; }, py::is_operator())
      .def("__truediv__", [](const Quantity& a, double k) { return a / k; }, py::is_operator())
      .def("__rtruediv__", [](const Quantity& a, double k) { return k / a; }, py::is_operator())
      .def("__pow__", [](const Quantity& a, int k) { return a.pow(k); }, py::is_operator())
      .def("__add__", [](const Quantity& a, const Quantity& b) { return a + b; }, py::is_operator())
      .def("__sub__", [](const Quantity& a, const Quantity& b) { return a - b; }, py::is_operator())
      .def("__neg__", [](const Quantity& a) { return a * -1.0; })
      .def("__eq__", [](const Quantity& a, const Quantity& b) { return a == b; }, py::is_operator())
      .def("__float__",
           [](const Quantity& q) {
              if (!q.dimensionless())
                 throw unitsconfig::UnitsError("cannot convert " + unitsconfig::formatQuantity(q) + " to a number");
              return q.magnitude();
           })
      .def("__repr__", [](const Quantity& q) { return "Quantity('" + unitsconfig::formatQuantity(q) + "')"; })
      .def("__str__", &unitsconfig::formatQuantity);

   m.attr("m")  = unitsconfig::units::m;
   m.attr("kg") = unitsconfig::units::kg;
   m.attr("s")  = unitsconfig::units::s;
   m.attr("N")  = unitsconfig::units::N;
   m.attr("Pa") = unitsconfig::units::Pa;

   m.def("quantity", &unitsconfig::parseQuantity, py::arg("text"));
   m.def(
      "find_optimal_dt",
      [](py::handle c, double omegaCap, double uCap) {
         return unitsconfig::findOptimalDt(toConfig(c, ""), unitsconfig::StabilityConstraints{ omegaCap, uCap });
      },
      py::arg("config"), py::arg("omega_cap") = 1.95, py::arg("u_cap") = 0.05);
   m.def(
      "nondimensionalize",
      [](py::object c) -> py::object {
         const auto tree = unitsconfig::nondimensionalizeTree(toConfig(c, ""));
         if (py::isinstance<py::dict>(c) && tree.isMap())
         {
            updateDict(c.cast<py::dict>(), tree.map());
            return c;
         }
         return toPython(tree);
      },
      py::arg("config"));
   m.def(
      "to_lattice",
      [](const Quantity& q, const Quantity& dx, const Quantity& dt, std::optional<Quantity> density) {
         return unitsconfig::toLattice(q, unitsconfig::LatticeScale{ dx, dt, density });
      },
      py::arg("value"), py::arg("dx"), py::arg("dt"), py::arg("density") = py::none());
   m.def(
      "validate_config",
      [](py::handle c) {
         py::list out;
         for (const auto& d : unitsconfig::validateConfig(toConfig(c, "")))
            out.append(py::make_tuple(d.path, d.message));
         return out;
      },
      py::arg("config"));
}

void bindGeometry(py::module_& m)
{
   m.def(
      "is_at_border",
      [](py::handle cell, const std::string& sides, py::object size) {
         blockgrid::Vec3i extent;
         if (size.is_none()) extent = requireStorage().cellCount();
         else extent = toCell(size);
         return geometry::isAtBorder(toCell(cell), extent, sides);
      },
      py::arg("cell"), py::arg("sides"), py::arg("size") = py::none());

   py::class_<geometry::SpherePack>(m, "SpherePack")
      .def_property_readonly("radius", &geometry::SpherePack::radius)
      .def_property_readonly("centers",
                             [](const geometry::SpherePack& p) {
                                py::list l;
                                for (const auto& c : p.centers())
                                   l.append(py::make_tuple(c[0], c[1], c[2]));
                                return l;
                             })
      .def("__len__", [](const geometry::SpherePack& p) { return p.centers().size(); })
      .def(
         "overlap", [](const geometry::SpherePack& p, py::handle cell, int n) { return p.overlap(toCell(cell), n); },
         py::arg("cell"), py::arg("samples") = 4);

   m.def(
      "sphere_pack", [](int nx, int ny, int nz, double radius) { return geometry::spherePack(nx, ny, nz, radius); },
      py::arg("nx"), py::arg("ny"), py::arg("nz"), py::arg("radius") = 8.0);

   py::class_<geometry::Pipe>(m, "Pipe")
      .def(py::init<double, double, const geometry::Vec3&, double>(), py::arg("diameter"), py::arg("length"),
           py::arg("position"), py::arg("shell_thickness") = 1.0)
      .def(
         "rotate",
         [](geometry::Pipe& p, double degrees, py::handle axis) -> geometry::Pipe& {
            return p.rotate(degrees, toAxis(axis));
         },
         py::arg("degrees"), py::arg("axis") = 2, py::return_value_policy::reference_internal)
      .def_property_readonly("diameter", &geometry::Pipe::diameter)
      .def_property_readonly("length", &geometry::Pipe::length)
      .def_property_readonly("shell_thickness", &geometry::Pipe::shellThickness)
      .def("world_to_object",
           [](const geometry::Pipe& p) {
              const auto w = p.worldToObject();
              py::array_t<double> a({ 4, 4 });
              auto r = a.mutable_unchecked<2>();
              for (int i = 0; i < 4; ++i)
                 for (int j = 0; j < 4; ++j)
                    r(i, j) = w[std::size_t(4 * i + j)];
              return a;
           })
      .def("axis_direction", &geometry::Pipe::axisDirection)
      .def("contains", [](const geometry::Pipe& p, py::handle cell) { return p.contains(toCell(cell)); })
      .def("shellContains", [](const geometry::Pipe& p, py::handle cell) { return p.shellContains(toCell(cell)); })
      .def("parabolicVel", [](const geometry::Pipe& p, py::handle cell, double maxVel) {
         const auto v = p.parabolicVel(toCell(cell), maxVel);
         return py::make_tuple(v[0], v[1], v[2]);
      });
}

void bindBlocks(py::module_& m)
{
   py::class_<BlockHandle>(m, "Block")
      .def_property_readonly("id", [](const BlockHandle& h) { return h.block->id(); })
      .def_property_readonly("offset",
                             [](const BlockHandle& h) {
                                const auto& mn = h.block->interval().min;
                                return py::make_tuple(mn[0], mn[1], mn[2]);
                             })
      .def_property_readonly("size",
                             [](const BlockHandle& h) {
                                const auto s = h.block->size();
                                return py::make_tuple(s[0], s[1], s[2]);
                             })
      .def("fields", [](const BlockHandle& h) { return h.block->fieldNames(); })
      .def("__contains__", [](const BlockHandle& h, const std::string& name) { return h.block->hasField(name); })
      .def("__getitem__",
           [](py::object self, const std::string& name) {
              auto& h = self.cast<BlockHandle&>();
              if (!h.block->hasField(name)) throw py::key_error(name);
              return fieldArray(h.block->getField(name), self);
           })
      .def(
         "view",
         [](py::object self, const std::string& name, bool ghostLayers) {
            auto& h = self.cast<BlockHandle&>();
            if (!h.block->hasField(name)) throw py::key_error(name);
            return fieldArray(h.block->getField(name), self, ghostLayers);
         },
         py::arg("name"), py::arg("ghost_layers") = false)
      .def("__repr__", [](const BlockHandle& h) { return "<Block " + std::to_string(h.block->id()) + ">"; });

   const auto handles = [](const BlockCollection& c) {
      py::list l;
      for (auto* b : c.storage->localBlocks(c.worker))
         l.append(BlockHandle{ b });
      return l;
   };
   const auto cells = [](const BlockCollection& c) {
      const auto& n = c.storage->cellCount();
      return py::make_tuple(n[0], n[1], n[2]);
   };
   py::class_<BlockCollection>(m, "BlockCollection")
      .def("__iter__", [handles](const BlockCollection& c) { return py::iter(handles(c)); })
      .def("__len__", [](const BlockCollection& c) { return c.storage->localBlocks(c.worker).size(); })
      .def("__getitem__",
           [](const BlockCollection& c, int id) {
              auto* b = c.storage->findBlock(id);
              if (!b || c.storage->ownerOf(id) != c.worker) throw py::key_error(std::to_string(id));
              return BlockHandle{ b };
           })
      .def("__contains__",
           [](const BlockCollection& c, int id) {
              return c.storage->findBlock(id) != nullptr && c.storage->ownerOf(id) == c.worker;
           })
      .def("keys",
           [](const BlockCollection& c) {
              py::list l;
              for (auto* b : c.storage->localBlocks(c.worker))
                 l.append(b->id());
              return l;
           })
      .def("values", handles)
      .def("numberOfCells", cells)
      .def("number_of_cells", cells)
      .def_property_readonly("worker", [](const BlockCollection& c) { return c.worker; });

   m.def("blocks", [] { return BlockCollection{ &requireStorage(), requireTransport().rank() }; });

   py::class_<ConfigNode>(m, "ConfigNode")
      .def("__getitem__",
           [](const ConfigNode& n, const std::string& key) -> py::object {
              if (!n.node->isMap() || !n.node->map().count(key)) throw py::key_error(key);
              auto& child = n.node->map().at(key);
              if (child.isMap()) return py::cast(ConfigNode{ &child });
              return toPython(child);
           })
      .def("__setitem__",
           [](const ConfigNode& n, const std::string& key, py::handle value) {
              n.node->map()[key] = toConfig(value, key);
           })
      .def("__contains__",
           [](const ConfigNode& n, const std::string& key) { return n.node->isMap() && n.node->map().count(key) > 0; })
      .def("__len__", [](const ConfigNode& n) { return n.node->isMap() ? n.node->map().size() : 0; })
      .def("keys",
           [](const ConfigNode& n) {
              std::vector<std::string> keys;
              if (n.node->isMap())
                 for (const auto& [k, v] : n.node->map())
                    keys.push_back(k);
              return keys;
           })
      .def("__iter__", [](py::object self) { return py::iter(self.attr("keys")()); })
      .def("items", [](py::object self) {
         py::list l;
         for (auto k : self.attr("keys")())
            l.append(py::make_tuple(k, self.attr("__getitem__")(k)));
         return l;
      })
      .def("to_dict", [](const ConfigNode& n) { return toPython(*n.node); })
      .def("__repr__", [](const ConfigNode& n) { return n.node->toJson(); });

   py::class_<unitsconfig::LatticeScale>(m, "LatticeScale")
      .def_readonly("dx", &unitsconfig::LatticeScale::dx)
      .def_readonly("dt", &unitsconfig::LatticeScale::dt)
      .def_property_readonly("density", [](const unitsconfig::LatticeScale& s) -> py::object {
         return s.rho0 ? py::cast(*s.rho0) : py::none();
      });
}

void bindCollectives(py::module_& m)
{
   auto mpi = m.def_submodule("mpi", "Collective operations across the workers");
   mpi.attr("MIN") = int(comms::ReduceOp::Min);
   mpi.attr("MAX") = int(comms::ReduceOp::Max);
   mpi.attr("SUM") = int(comms::ReduceOp::Sum);
   mpi.def("rank", [] {
      auto* t = transportOrNull();
      return t ? t->rank() : 0;
   });
   mpi.def("size", [] {
      auto* t = transportOrNull();
      return t ? t->size() : 1;
   });
   mpi.def(
      "reduce",
      [](double value, int op) -> py::object {
         auto* t = transportOrNull();
         if (!t) return py::float_(value);
         std::optional<double> r;
         {
            py::gil_scoped_release release;
            r = comms::reduceScalar(value, toReduceOp(op), *t);
         }
         return r ? py::object(py::float_(*r)) : py::object(py::none());
      },
      py::arg("value"), py::arg("op"));
   mpi.def(
      "allreduce",
      [](double value, int op) {
         auto* t = transportOrNull();
         if (!t) return value;
         py::gil_scoped_release release;
         return comms::allReduceScalar(value, toReduceOp(op), *t);
      },
      py::arg("value"), py::arg("op"));
   mpi.def("barrier", [] {
      auto* t = transportOrNull();
      if (!t) return;
      py::gil_scoped_release release;
      t->barrier();
   });
   mpi.def(
      "broadcast",
      [](const std::string& text) {
         auto* t = transportOrNull();
         if (!t) return text;
         py::gil_scoped_release release;
         return comms::broadcastLine(text, *t);
      },
      py::arg("text"));

   m.def(
      "gather_slice",
      [](py::object x, py::object y, py::object z, int coarsen, const std::string& fieldName, int f) -> py::object {
         comms::LineSpec line;
         if (!x.is_none()) line.x = toCoordinate(x);
         if (!y.is_none()) line.y = toCoordinate(y);
         if (!z.is_none()) line.z = toCoordinate(z);
         auto& storage = requireStorage();
         auto& t       = requireTransport();
         std::optional<std::vector<double>> values;
         {
            py::gil_scoped_release release;
            values = comms::gatherSlice(storage, line, fieldName, f, coarsen, t);
         }
         if (!values) return py::none();
         return py::cast(*values);
      },
      py::arg("x") = py::none(), py::arg("y") = py::none(), py::arg("z") = py::none(), py::arg("coarsen") = 1,
      py::arg("field") = lbm::fields::velocity, py::arg("f") = 0);

   m.def(
      "set_pressure",
      [](const std::string& sides, double density) {
         auto& storage = requireStorage();
         auto& t       = requireTransport();
         std::int64_t changed = 0;
         for (auto* b : storage.localBlocks(t.rank()))
         {
            const auto& flags = b->getField(lbm::fields::flags);
            auto& boundary    = b->getField(lbm::fields::boundary);
            const auto n      = b->size();
            for (int z = 0; z < n[2]; ++z)
               for (int y = 0; y < n[1]; ++y)
                  for (int x = 0; x < n[0]; ++x)
                     if (lbm::cellType(flags(x, y, z)) == lbm::CellType::Pressure &&
                         geometry::isAtBorder(b->toGlobal(x, y, z), storage.cellCount(), sides))
                     {
                        boundary(x, y, z, 0) = density;
                        ++changed;
                     }
         }
         py::gil_scoped_release release;
         lbm::exchangeBoundarySetup(storage, t);
         return comms::allReduceScalar(double(changed), comms::ReduceOp::Sum, t);
      },
      py::arg("sides"), py::arg("density"));
}

void bindOutput(py::module_& m)
{
   m.def("_write", [](const std::string& text, bool err) {
      auto* ctx = currentContext();
      if (ctx && ctx->capturing)
      {
         ctx->captured += text;
         return;
      }
      if (err) std::cerr << text << std::flush;
      else std::cout << text;
   });

   auto log = m.def_submodule("log", "Result logging");
   log.def(
      "result",
      [](const std::string& name, py::handle value) {
         auto* s = services();
         if (!s || !s->logResult) return;
         if (py::isinstance<py::str>(value)) s->logResult(name, ResultValue(value.cast<std::string>()));
         else s->logResult(name, ResultValue(py::cast<double>(value)));
      },
      py::arg("name"), py::arg("value"));

   m.def(
      "send_frame",
      [](const std::string& contentType, py::handle payload) {
         const std::string data = py::isinstance<py::bytes>(payload) ? std::string(payload.cast<py::bytes>())
                                                                      : py::str(payload).cast<std::string>();
         emit(steering::encodeFrame(contentType, data));
      },
      py::arg("content_type"), py::arg("payload"));
   m.def(
      "send_slice",
      [](const std::vector<double>& values, const std::string& name, const std::string& axis, int coarsen) {
         emit(steering::encodeFrame("slice/json", sliceJson(values, name, axis, coarsen)));
      },
      py::arg("values"), py::arg("name") = "slice", py::arg("axis") = "z", py::arg("coarsen") = 1);
   m.def(
      "send_metric",
      [](const std::string& name, double value) {
         auto* s = services();
         nlohmann::json j;
         j["name"]  = name;
         j["step"]  = (s && s->currentStep) ? s->currentStep() : 0;
         j["value"] = std::isfinite(value) ? nlohmann::json(value) : nlohmann::json(nullptr);
         emit(steering::encodeFrame("metric/json", j.dump()));
      },
      py::arg("name"), py::arg("value"));

   m.def("resume", [] { requireContext().resumeRequested = true; });
   m.def("shutdown", [] { requireContext().shutdownRequested = true; });
   m.def("step", []() -> std::int64_t {
      auto* s = services();
      return (s && s->currentStep) ? s->currentStep() : 0;
   });
}

void registerCallback(const std::string& name, bool batch, py::object fn)
{
   auto& ctx = requireContext();
   if (ctx.callbacks.count(name)) throw ScriptError("duplicate registration of callback '" + name + "'");
   if (batch && name != callbacks::domainInit) throw ScriptError("only domain_init supports batch registration");
   ctx.callbacks[name] = std::move(fn);
   if (batch) ctx.batchCallbacks.insert(name);
}

} // namespace

PYBIND11_EMBEDDED_MODULE(blockforge, m)
{
   m.doc() = "blockforge scripting interface";
   m.def(
      "callback",
      [](const std::string& name, bool batch) {
         return py::cpp_function([name, batch](py::object fn) {
            registerCallback(name, batch, fn);
            return fn;
         });
      },
      py::arg("name"), py::arg("batch") = false);

   bindUnits(m);
   bindGeometry(m);
   bindBlocks(m);
   bindCollectives(m);
   bindOutput(m);

   py::exec(supportCode, m.attr("__dict__"));
}
