//======================================================================================================================
//
//! \file ConfigTree.cpp
//
//======================================================================================================================
#include "blockforge/unitsconfig/ConfigTree.h"

#include "json.hpp"

#include <cmath>

namespace blockforge::unitsconfig {

namespace {

std::vector<std::string> splitPath(const std::string& path)
{
   std::vector<std::string> parts;
   std::size_t start = 0;
   for (;;)
   {
      const std::size_t dot = path.find('.', start);
      parts.push_back(path.substr(start, dot - start));
      if (dot == std::string::npos) break;
      start = dot + 1;
   }
   return parts;
}

nlohmann::json toJsonValue(const ConfigValue& v)
{
   return std::visit(
      [](const auto& x) -> nlohmann::json {
         using T = std::decay_t<decltype(x)>;
         if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
         else if constexpr (std::is_same_v<T, Quantity>) return formatQuantity(x);
         else if constexpr (std::is_same_v<T, ConfigList>)
         {
            auto a = nlohmann::json::array();
            for (const auto& e : x)
               a.push_back(toJsonValue(e));
            return a;
         }
         else if constexpr (std::is_same_v<T, ConfigMap>)
         {
            auto o = nlohmann::json::object();
            for (const auto& [k, e] : x)
               o[k] = toJsonValue(e);
            return o;
         }
         else return x;
      },
      v.variant());
}

ConfigValue fromJsonValue(const nlohmann::json& j)
{
   switch (j.type())
   {
   case nlohmann::json::value_t::null: return {};
   case nlohmann::json::value_t::boolean: return j.get<bool>();
   case nlohmann::json::value_t::number_integer:
   case nlohmann::json::value_t::number_unsigned: return j.get<std::int64_t>();
   case nlohmann::json::value_t::number_float: return j.get<double>();
   case nlohmann::json::value_t::string: return j.get<std::string>();
   case nlohmann::json::value_t::array: {
      ConfigList l;
      for (const auto& e : j)
         l.push_back(fromJsonValue(e));
      return l;
   }
   case nlohmann::json::value_t::object: {
      ConfigMap m;
      for (const auto& [k, e] : j.items())
         m[k] = fromJsonValue(e);
      return m;
   }
   default: throw ConfigError("unsupported JSON value");
   }
}

} // namespace

bool ConfigValue::isNumber() const
{
   if (std::holds_alternative<std::int64_t>(v_) || std::holds_alternative<double>(v_)) return true;
   return isQuantity() && quantity().dimensionless();
}

ConfigMap& ConfigValue::map()
{
   if (!isMap()) throw ConfigError("expected a mapping");
   return std::get<ConfigMap>(v_);
}

const ConfigMap& ConfigValue::map() const
{
   if (!isMap()) throw ConfigError("expected a mapping");
   return std::get<ConfigMap>(v_);
}

const ConfigList& ConfigValue::list() const
{
   if (!isList()) throw ConfigError("expected a list");
   return std::get<ConfigList>(v_);
}

const Quantity& ConfigValue::quantity() const
{
   if (!isQuantity()) throw ConfigError("expected a quantity");
   return std::get<Quantity>(v_);
}

const std::string& ConfigValue::string() const
{
   if (!isString()) throw ConfigError("expected a string");
   return std::get<std::string>(v_);
}

bool ConfigValue::boolean() const
{
   if (isBool()) return std::get<bool>(v_);
   if (std::holds_alternative<std::int64_t>(v_)) return std::get<std::int64_t>(v_) != 0;
   throw ConfigError("expected a boolean");
}

double ConfigValue::number() const
{
   if (auto* i = std::get_if<std::int64_t>(&v_)) return double(*i);
   if (auto* d = std::get_if<double>(&v_)) return *d;
   if (auto* q = std::get_if<Quantity>(&v_))
   {
      if (q->dimensionless()) return q->magnitude();
      throw ConfigError("expected a number, got a quantity with dimensions " + formatDims(q->dims()));
   }
   throw ConfigError("expected a number");
}

std::int64_t ConfigValue::integer() const
{
   if (auto* i = std::get_if<std::int64_t>(&v_)) return *i;
   const double d = number();
   if (d != std::floor(d)) throw ConfigError("expected an integer");
   return std::int64_t(d);
}

const ConfigValue* ConfigValue::find(const std::string& path) const
{
   const ConfigValue* cur = this;
   for (const auto& key : splitPath(path))
   {
      if (!cur->isMap()) return nullptr;
      const auto& m = std::get<ConfigMap>(cur->v_);
      auto it       = m.find(key);
      if (it == m.end()) return nullptr;
      cur = &it->second;
   }
   return cur;
}

ConfigValue* ConfigValue::find(const std::string& path)
{
   return const_cast<ConfigValue*>(static_cast<const ConfigValue*>(this)->find(path));
}

const ConfigValue& ConfigValue::at(const std::string& path) const
{
   const ConfigValue* v = find(path);
   if (!v) throw ConfigError("missing config entry " + path);
   return *v;
}

void ConfigValue::set(const std::string& path, ConfigValue value)
{
   ConfigValue* cur = this;
   for (const auto& key : splitPath(path))
   {
      if (cur->isNull()) cur->v_ = ConfigMap{};
      cur = &cur->map()[key];
   }
   *cur = std::move(value);
}

bool ConfigValue::operator==(const ConfigValue& o) const
{
   if (v_.index() != o.v_.index()) return false;
   return std::visit(
      [&](const auto& a) {
         using T = std::decay_t<decltype(a)>;
         const auto& b = std::get<T>(o.v_);
         if constexpr (std::is_same_v<T, std::monostate>) return true;
         else if constexpr (std::is_same_v<T, ConfigList>)
         {
            if (a.size() != b.size()) return false;
            for (std::size_t i = 0; i < a.size(); ++i)
               if (!(a[i] == b[i])) return false;
            return true;
         }
         else if constexpr (std::is_same_v<T, ConfigMap>)
         {
            if (a.size() != b.size()) return false;
            for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib)
               if (ia->first != ib->first || !(ia->second == ib->second)) return false;
            return true;
         }
         else return a == b;
      },
      v_);
}

std::string ConfigValue::toJson() const { return toJsonValue(*this).dump(); }

ConfigValue ConfigValue::fromJson(const std::string& text)
{
   try
   {
      return fromJsonValue(nlohmann::json::parse(text));
   }
   catch (const nlohmann::json::exception& e)
   {
      throw ConfigError(std::string("invalid JSON: ") + e.what());
   }
}

} // namespace blockforge::unitsconfig
