//======================================================================================================================
//
//! \file Geometry.h
//! \brief Scenario helpers: border tests, sphere packing, pipes.
//
//======================================================================================================================
#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace blockforge::geometry {

using Vec3  = std::array<double, 3>;
using Vec3i = std::array<int, 3>;
using Mat4  = std::array<double, 16>; //!< row major

class GeometryError : public std::invalid_argument
{
 public:
   using std::invalid_argument::invalid_argument;
};

/// Sides: W/E = x min/max, S/N = y min/max, B/T = z min/max. Any letter matching is enough ("NSTB").
bool isAtBorder(const Vec3i& cell, const Vec3i& domainSize, const std::string& sides);

//**********************************************************************************************************************
/*!
 *  Hexagonal close packing of equal spheres filling a box. Neighboring centers are 2r+2 apart, so every sphere stays
 *  a separate bubble, and every sphere lies completely inside the box.
 */
//**********************************************************************************************************************
class SpherePack
{
 public:
   SpherePack(const Vec3i& domainSize, double radius);

   double radius() const { return radius_; }
   const Vec3i& domainSize() const { return size_; }
   const std::vector<Vec3>& centers() const { return centers_; }

   /// Fraction of the cell cube inside any sphere, from 4x4x4 sub-samples (or n^3 with samplesPerAxis = n).
   double overlap(const Vec3i& cell, int samplesPerAxis = 4) const;

 private:
   bool inside(const Vec3& p) const;

   Vec3i size_;
   double radius_;
   std::vector<Vec3> centers_;
   double bucket_;
   std::unordered_map<long long, std::vector<std::size_t>> buckets_;
};

SpherePack spherePack(int nx, int ny, int nz, double radius);

//**********************************************************************************************************************
/*!
 *  Cylinder of given diameter and length. In object space the axis runs along +x from 0 to length; position is the
 *  world location of the axis start. Cells are tested at their centers.
 */
//**********************************************************************************************************************
class Pipe
{
 public:
   Pipe(double diameter, double length, const Vec3& position, double shellThickness = 1.0);

   /// Rotation about the pipe start around a world axis (0 = x, 1 = y, 2 = z).
   Pipe& rotate(double degrees, int axis = 2);

   double diameter() const { return diameter_; }
   double length() const { return length_; }
   double shellThickness() const { return shell_; }
   Mat4 worldToObject() const;
   Vec3 axisDirection() const;

   /// Object coordinates of a world point.
   Vec3 toObject(const Vec3& world) const;

   bool contains(const Vec3i& cell) const;
   bool shellContains(const Vec3i& cell) const;
   /// maxVel*(1-(2r/D)^2) along the axis inside the pipe, zero elsewhere.
   Vec3 parabolicVel(const Vec3i& cell, double maxVel) const;

 private:
   double radialDistance(const Vec3& object) const;
   bool axialInside(const Vec3& object) const;

   double diameter_, length_, shell_;
   Vec3 position_;
   std::array<double, 9> rotation_; //!< object to world, row major
};

} // namespace blockforge::geometry
