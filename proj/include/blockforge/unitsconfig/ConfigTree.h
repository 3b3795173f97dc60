//======================================================================================================================
//
//! \file ConfigTree.h
//! \brief Nested key-value configuration with unit-tagged leaves.
//
//======================================================================================================================
#pragma once

#include "blockforge/unitsconfig/Quantity.h"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace blockforge::unitsconfig {

class ConfigValue;
using ConfigList = std::vector<ConfigValue>;
using ConfigMap  = std::map<std::string, ConfigValue>;

class ConfigError : public std::runtime_error
{
 public:
   using std::runtime_error::runtime_error;
};

class ConfigValue
{
 public:
   using Variant = std::variant<std::monostate, bool, std::int64_t, double, std::string, Quantity, ConfigList, ConfigMap>;

   ConfigValue() = default;
   ConfigValue(bool v) : v_(v) {}
   ConfigValue(int v) : v_(std::int64_t(v)) {}
   ConfigValue(std::int64_t v) : v_(v) {}
   ConfigValue(double v) : v_(v) {}
   ConfigValue(const char* v) : v_(std::string(v)) {}
   ConfigValue(std::string v) : v_(std::move(v)) {}
   ConfigValue(Quantity v) : v_(v) {}
   ConfigValue(ConfigList v) : v_(std::move(v)) {}
   ConfigValue(ConfigMap v) : v_(std::move(v)) {}

   const Variant& variant() const { return v_; }
   Variant& variant() { return v_; }

   bool isNull() const { return std::holds_alternative<std::monostate>(v_); }
   bool isMap() const { return std::holds_alternative<ConfigMap>(v_); }
   bool isList() const { return std::holds_alternative<ConfigList>(v_); }
   bool isQuantity() const { return std::holds_alternative<Quantity>(v_); }
   bool isString() const { return std::holds_alternative<std::string>(v_); }
   bool isBool() const { return std::holds_alternative<bool>(v_); }
   /// int, double, or dimensionless quantity
   bool isNumber() const;

   ConfigMap& map();
   const ConfigMap& map() const;
   const ConfigList& list() const;
   const Quantity& quantity() const;
   const std::string& string() const;
   bool boolean() const;
   double number() const;
   std::int64_t integer() const;

   /// Lookup of a dotted path ("Physical.viscosity"); nullptr if any component is missing.
   const ConfigValue* find(const std::string& path) const;
   ConfigValue* find(const std::string& path);
   const ConfigValue& at(const std::string& path) const;
   /// Creates intermediate maps as needed.
   void set(const std::string& path, ConfigValue value);

   bool operator==(const ConfigValue& o) const;

   /// Canonical JSON text; quantities become strings in formatQuantity() form.
   std::string toJson() const;
   static ConfigValue fromJson(const std::string& text);

 private:
   Variant v_;
};

using ConfigTree = ConfigValue;

} // namespace blockforge::unitsconfig
