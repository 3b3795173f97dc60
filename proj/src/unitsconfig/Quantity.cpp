//======================================================================================================================
//
//! \file Quantity.cpp
//
//======================================================================================================================
#include "blockforge/unitsconfig/Quantity.h"

#include <cctype>
#include <charconv>
#include <cstdlib>

namespace blockforge::unitsconfig {

UnitsSyntaxError::UnitsSyntaxError(const std::string& message, std::size_t position)
   : UnitsError(message + " at position " + std::to_string(position)), position_(position)
{}

namespace {

void checkDims(const Dims& d)
{
   if (std::abs(d.length) > maxExponent || std::abs(d.mass) > maxExponent || std::abs(d.time) > maxExponent)
      throw UnitsError("dimension exponent out of range: " + formatDims(d));
}

class Parser
{
 public:
   explicit Parser(const std::string& text) : t_(text) {}

   Quantity parse()
   {
      skipSpace();
      Quantity q(number());
      bool dividing = false;
      for (;;)
      {
         skipSpace();
         if (pos_ == t_.size()) break;
         const char op = t_[pos_];
         if (op != '*' && op != '/') throw UnitsSyntaxError("expected '*' or '/'", pos_);
         if (op == '*' && dividing) throw UnitsSyntaxError("'*' after '/'", pos_);
         dividing = op == '/';
         ++pos_;
         skipSpace();
         const Quantity u = unit();
         q                = dividing ? q / u : q * u;
      }
      return q;
   }

 private:
   void skipSpace()
   {
      while (pos_ < t_.size() && std::isspace(static_cast<unsigned char>(t_[pos_])))
         ++pos_;
   }

   double number()
   {
      const std::size_t start = pos_;
      std::size_t p           = pos_;
      auto digits = [&] {
         const std::size_t s = p;
         while (p < t_.size() && std::isdigit(static_cast<unsigned char>(t_[p])))
            ++p;
         return p - s;
      };
      if (p < t_.size() && (t_[p] == '+' || t_[p] == '-')) ++p;
      std::size_t n = digits();
      if (p < t_.size() && t_[p] == '.')
      {
         ++p;
         n += digits();
      }
      if (n == 0) throw UnitsSyntaxError("expected a number", start);
      if (p < t_.size() && (t_[p] == 'e' || t_[p] == 'E'))
      {
         ++p;
         if (p < t_.size() && (t_[p] == '+' || t_[p] == '-')) ++p;
         if (digits() == 0) throw UnitsSyntaxError("malformed exponent", p);
      }
      double value = 0.0;
      const char* first = t_.data() + start + (t_[start] == '+' ? 1 : 0);
      auto [ptr, ec]     = std::from_chars(first, t_.data() + p, value);
      if (ec != std::errc() || ptr != t_.data() + p) throw UnitsSyntaxError("number out of range", start);
      pos_ = p;
      return value;
   }

   Quantity unit()
   {
      const std::size_t start = pos_;
      while (pos_ < t_.size() && std::isalpha(static_cast<unsigned char>(t_[pos_])))
         ++pos_;
      const std::string name = t_.substr(start, pos_ - start);
      if (name.empty()) throw UnitsSyntaxError("expected a unit", start);
      Quantity u;
      if (name == "m") u = units::m;
      else if (name == "kg") u = units::kg;
      else if (name == "s") u = units::s;
      else if (name == "N") u = units::N;
      else if (name == "Pa") u = units::Pa;
      else throw UnitsError("unknown unit '" + name + "' at position " + std::to_string(start));

      skipSpace();
      if (pos_ < t_.size() && t_[pos_] == '^')
      {
         ++pos_;
         skipSpace();
         const std::size_t es = pos_;
         std::size_t p        = pos_;
         if (p < t_.size() && (t_[p] == '-' || t_[p] == '+')) ++p;
         while (p < t_.size() && std::isdigit(static_cast<unsigned char>(t_[p])))
            ++p;
         int e = 0;
         const char* first = t_.data() + es + (t_[es] == '+' ? 1 : 0);
         auto [ptr, ec]     = std::from_chars(first, t_.data() + p, e);
         if (p == es || ec != std::errc() || ptr != t_.data() + p) throw UnitsSyntaxError("expected an integer power", es);
         pos_ = p;
         u    = u.pow(e);
      }
      return u;
   }

   const std::string& t_;
   std::size_t pos_ = 0;
};

void appendPower(std::string& out, const char* unit, int e)
{
   out += unit;
   if (e != 1) out += "^" + std::to_string(e);
}

} // namespace

Quantity::Quantity(double magnitude, Dims dims) : magnitude_(magnitude), dims_(dims) { checkDims(dims_); }

Quantity Quantity::pow(int k) const
{
   double m = 1.0;
   for (int i = 0; i < std::abs(k); ++i)
      m *= magnitude_;
   return { k < 0 ? 1.0 / m : m, dims_ * k };
}

Quantity Quantity::operator+(const Quantity& o) const
{
   if (!(dims_ == o.dims_)) throw UnitsError("adding " + formatDims(dims_) + " and " + formatDims(o.dims_));
   return { magnitude_ + o.magnitude_, dims_ };
}

Quantity Quantity::operator-(const Quantity& o) const
{
   if (!(dims_ == o.dims_)) throw UnitsError("subtracting " + formatDims(o.dims_) + " from " + formatDims(dims_));
   return { magnitude_ - o.magnitude_, dims_ };
}

Quantity parseQuantity(const std::string& text) { return Parser(text).parse(); }

std::string formatQuantity(const Quantity& q)
{
   char buf[32];
   const auto res  = std::to_chars(buf, buf + sizeof buf, q.magnitude());
   std::string out(buf, res.ptr);
   const Dims& d   = q.dims();
   const std::pair<const char*, int> parts[] = { { "m", d.length }, { "kg", d.mass }, { "s", d.time } };
   for (const auto& [u, e] : parts)
      if (e > 0)
      {
         out += "*";
         appendPower(out, u, e);
      }
   for (const auto& [u, e] : parts)
      if (e < 0)
      {
         out += "/";
         appendPower(out, u, -e);
      }
   return out;
}

std::string formatDims(const Dims& d)
{
   std::string out;
   const std::pair<const char*, int> parts[] = { { "L", d.length }, { "M", d.mass }, { "T", d.time } };
   for (const auto& [u, e] : parts)
   {
      if (e == 0) continue;
      if (!out.empty()) out += " ";
      out += u;
      if (e != 1) out += "^" + std::to_string(e);
   }
   return out.empty() ? "1" : out;
}

} // namespace blockforge::unitsconfig
