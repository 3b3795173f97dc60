//======================================================================================================================
//
//! \file Quantity.h
//! \brief Unit-tagged scalars over the base dimensions length, mass and time.
//
//======================================================================================================================
#pragma once

#include <stdexcept>
#include <string>

namespace blockforge::unitsconfig {

class UnitsError : public std::runtime_error
{
 public:
   using std::runtime_error::runtime_error;
};

/// Parse failure; position() is the zero-based character offset of the offending token.
class UnitsSyntaxError : public UnitsError
{
 public:
   UnitsSyntaxError(const std::string& message, std::size_t position);
   std::size_t position() const { return position_; }

 private:
   std::size_t position_;
};

struct Dims
{
   int length = 0;
   int mass   = 0;
   int time   = 0;

   bool dimensionless() const { return length == 0 && mass == 0 && time == 0; }
   bool operator==(const Dims&) const = default;
   Dims operator+(const Dims& o) const { return { length + o.length, mass + o.mass, time + o.time }; }
   Dims operator-(const Dims& o) const { return { length - o.length, mass - o.mass, time - o.time }; }
   Dims operator*(int k) const { return { length * k, mass * k, time * k }; }
};

inline constexpr int maxExponent = 8;

class Quantity
{
 public:
   Quantity() = default;
   Quantity(double magnitude, Dims dims = {});

   double magnitude() const { return magnitude_; }
   const Dims& dims() const { return dims_; }
   bool dimensionless() const { return dims_.dimensionless(); }

   Quantity operator*(const Quantity& o) const { return { magnitude_ * o.magnitude_, dims_ + o.dims_ }; }
   Quantity operator/(const Quantity& o) const { return { magnitude_ / o.magnitude_, dims_ - o.dims_ }; }
   Quantity operator*(double k) const { return { magnitude_ * k, dims_ }; }
   Quantity operator/(double k) const { return { magnitude_ / k, dims_ }; }
   Quantity pow(int k) const;

   /// Addition and comparison need equal dimensions.
   Quantity operator+(const Quantity& o) const;
   Quantity operator-(const Quantity& o) const;
   bool operator==(const Quantity& o) const { return magnitude_ == o.magnitude_ && dims_ == o.dims_; }

 private:
   double magnitude_ = 0.0;
   Dims dims_;
};

inline Quantity operator*(double k, const Quantity& q) { return q * k; }
inline Quantity operator/(double k, const Quantity& q) { return Quantity(k) / q; }

namespace units {
inline const Quantity m{ 1.0, { 1, 0, 0 } };
inline const Quantity kg{ 1.0, { 0, 1, 0 } };
inline const Quantity s{ 1.0, { 0, 0, 1 } };
inline const Quantity N{ 1.0, { 1, 1, -2 } };
inline const Quantity Pa{ 1.0, { -1, 1, -2 } };
} // namespace units

/// NUMBER ('*' UNIT)* ('/' UNIT)* with UNIT one of m, kg, s, N, Pa, optionally raised to an integer power (m^2).
Quantity parseQuantity(const std::string& text);

/// Base-unit form accepted by parseQuantity, e.g. "1e-06*m^2/s". Magnitudes round-trip exactly.
std::string formatQuantity(const Quantity& q);

/// Human readable dimension string such as "L^2 T^-1".
std::string formatDims(const Dims& d);

} // namespace blockforge::unitsconfig
