//======================================================================================================================
//
//! \file Geometry.cpp
//
//======================================================================================================================
#include "blockforge/geometry/Geometry.h"

#include <cmath>

namespace blockforge::geometry {

bool isAtBorder(const Vec3i& cell, const Vec3i& size, const std::string& sides)
{
   if (sides.empty()) throw GeometryError("no border side given");
   bool hit = false;
   for (char c : sides)
   {
      switch (c)
      {
      case 'W': hit |= cell[0] == 0; break;
      case 'E': hit |= cell[0] == size[0] - 1; break;
      case 'S': hit |= cell[1] == 0; break;
      case 'N': hit |= cell[1] == size[1] - 1; break;
      case 'B': hit |= cell[2] == 0; break;
      case 'T': hit |= cell[2] == size[2] - 1; break;
      default: throw GeometryError(std::string("unknown border side '") + c + "'");
      }
   }
   return hit;
}

namespace {

long long bucketKey(int i, int j, int k)
{
   return (static_cast<long long>(i) * 1000003LL + j) * 1000003LL + k;
}

} // namespace

SpherePack::SpherePack(const Vec3i& size, double radius) : size_(size), radius_(radius)
{
   if (!(radius >= 2.0)) throw GeometryError("sphere radius must be at least 2 cells");
   const double a  = 2.0 * radius + 2.0;
   const double dy = a * std::sqrt(3.0) / 2.0;
   const double dz = a * std::sqrt(2.0 / 3.0);
   const double lo = radius + 1.0;
   for (int layer = 0;; ++layer)
   {
      const double z = lo + layer * dz;
      if (z + radius > size[2]) break;
      const double shiftX = layer % 2 ? a / 2.0 : 0.0;
      const double shiftY = layer % 2 ? a * std::sqrt(3.0) / 6.0 : 0.0;
      for (int row = 0;; ++row)
      {
         const double y = lo + shiftY + row * dy;
         if (y + radius > size[1]) break;
         const double rowShift = row % 2 ? a / 2.0 : 0.0;
         for (int col = 0;; ++col)
         {
            const double x = lo + std::fmod(shiftX + rowShift, a) + col * a;
            if (x + radius > size[0]) break;
            centers_.push_back({ x, y, z });
         }
      }
   }
   if (centers_.empty()) throw GeometryError("sphere radius too large for the domain");

   bucket_ = a;
   for (std::size_t i = 0; i < centers_.size(); ++i)
   {
      const auto& c = centers_[i];
      buckets_[bucketKey(int(c[0] / bucket_), int(c[1] / bucket_), int(c[2] / bucket_))].push_back(i);
   }
}

bool SpherePack::inside(const Vec3& p) const
{
   const int bi = int(std::floor(p[0] / bucket_)), bj = int(std::floor(p[1] / bucket_)),
             bk = int(std::floor(p[2] / bucket_));
   const double r2 = radius_ * radius_;
   for (int i = bi - 1; i <= bi + 1; ++i)
      for (int j = bj - 1; j <= bj + 1; ++j)
         for (int k = bk - 1; k <= bk + 1; ++k)
         {
            auto it = buckets_.find(bucketKey(i, j, k));
            if (it == buckets_.end()) continue;
            for (std::size_t idx : it->second)
            {
               const auto& c = centers_[idx];
               const double dx = p[0] - c[0], dy = p[1] - c[1], dz = p[2] - c[2];
               if (dx * dx + dy * dy + dz * dz < r2) return true;
            }
         }
   return false;
}

double SpherePack::overlap(const Vec3i& cell, int n) const
{
   if (n < 1) throw GeometryError("sample count must be positive");
   int hits = 0;
   for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
         for (int k = 0; k < n; ++k)
            hits += inside({ cell[0] + (i + 0.5) / n, cell[1] + (j + 0.5) / n, cell[2] + (k + 0.5) / n });
   return double(hits) / (double(n) * n * n);
}

SpherePack spherePack(int nx, int ny, int nz, double radius) { return SpherePack({ nx, ny, nz }, radius); }

Pipe::Pipe(double diameter, double length, const Vec3& position, double shellThickness)
   : diameter_(diameter), length_(length), shell_(shellThickness), position_(position),
     rotation_{ 1, 0, 0, 0, 1, 0, 0, 0, 1 }
{
   if (!(diameter > 0.0) || !(length > 0.0)) throw GeometryError("pipe diameter and length must be positive");
   if (!(shellThickness >= 0.0)) throw GeometryError("shell thickness must be non-negative");
}

Pipe& Pipe::rotate(double degrees, int axis)
{
   if (axis < 0 || axis > 2) throw GeometryError("rotation axis must be 0, 1 or 2");
   const double t = degrees * M_PI / 180.0, c = std::cos(t), s = std::sin(t);
   std::array<double, 9> r{ 1, 0, 0, 0, 1, 0, 0, 0, 1 };
   const int p = (axis + 1) % 3, q = (axis + 2) % 3;
   r[std::size_t(p * 3 + p)] = c;
   r[std::size_t(p * 3 + q)] = -s;
   r[std::size_t(q * 3 + p)] = s;
   r[std::size_t(q * 3 + q)] = c;
   std::array<double, 9> out{};
   for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
         for (int k = 0; k < 3; ++k)
            out[std::size_t(i * 3 + j)] += r[std::size_t(i * 3 + k)] * rotation_[std::size_t(k * 3 + j)];
   rotation_ = out;
   return *this;
}

Mat4 Pipe::worldToObject() const
{
   // inverse of [R | p] is [R^T | -R^T p]
   Mat4 m{};
   for (int i = 0; i < 3; ++i)
   {
      double t = 0.0;
      for (int j = 0; j < 3; ++j)
      {
         m[std::size_t(i * 4 + j)] = rotation_[std::size_t(j * 3 + i)];
         t -= rotation_[std::size_t(j * 3 + i)] * position_[std::size_t(j)];
      }
      m[std::size_t(i * 4 + 3)] = t;
   }
   m[15] = 1.0;
   return m;
}

Vec3 Pipe::axisDirection() const { return { rotation_[0], rotation_[3], rotation_[6] }; }

Vec3 Pipe::toObject(const Vec3& w) const
{
   const Mat4 m = worldToObject();
   Vec3 o{};
   for (int i = 0; i < 3; ++i)
      o[std::size_t(i)] = m[std::size_t(i * 4)] * w[0] + m[std::size_t(i * 4 + 1)] * w[1] +
                          m[std::size_t(i * 4 + 2)] * w[2] + m[std::size_t(i * 4 + 3)];
   return o;
}

double Pipe::radialDistance(const Vec3& o) const { return std::sqrt(o[1] * o[1] + o[2] * o[2]); }

bool Pipe::axialInside(const Vec3& o) const { return o[0] >= 0.0 && o[0] <= length_; }

namespace {
Vec3 center(const Vec3i& c) { return { c[0] + 0.5, c[1] + 0.5, c[2] + 0.5 }; }
} // namespace

bool Pipe::contains(const Vec3i& cell) const
{
   const Vec3 o = toObject(center(cell));
   return axialInside(o) && radialDistance(o) < diameter_ / 2.0;
}

bool Pipe::shellContains(const Vec3i& cell) const
{
   const Vec3 o   = toObject(center(cell));
   const double r = radialDistance(o);
   return axialInside(o) && r >= diameter_ / 2.0 && r < diameter_ / 2.0 + shell_;
}

Vec3 Pipe::parabolicVel(const Vec3i& cell, double maxVel) const
{
   const Vec3 o = toObject(center(cell));
   if (!axialInside(o)) return { 0.0, 0.0, 0.0 };
   const double q = 2.0 * radialDistance(o) / diameter_;
   if (q >= 1.0) return { 0.0, 0.0, 0.0 };
   const double speed = maxVel * (1.0 - q * q);
   const Vec3 a       = axisDirection();
   return { speed * a[0], speed * a[1], speed * a[2] };
}

} // namespace blockforge::geometry
