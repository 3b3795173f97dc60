//======================================================================================================================
//
//! \file Field.h
//! \brief Four dimensional cell-data container (x, y, z, f) with selectable memory layout, ghost layers and padding.
//
//======================================================================================================================
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>

namespace blockforge::field {

enum class Layout { AoS, SoA };

const char* layoutName(Layout layout);

using Coord4 = std::array<int, 4>;

class FieldError : public std::runtime_error
{
 public:
   using std::runtime_error::runtime_error;
};

//**********************************************************************************************************************
/*!
 *  Cell data container. Spatial coordinates of interior cells run from 0 to requestedSize-1, ghost cells are addressed
 *  with coordinates in [-g, 0) and [requested, requested+g). The f coordinate has no ghost layers.
 *
 *  AoS stores all f values of a cell consecutively, SoA stores one spatial 3D array per f. In SoA layout the innermost
 *  spatial extent is padded so that every x-line starts at an address aligned to `alignment` bytes.
 */
//**********************************************************************************************************************
class Field
{
 public:
   Field(std::string name, Coord4 requestedSize, int ghostLayers, Layout layout = Layout::AoS,
         std::size_t alignment = 8);

   Field(const Field& other);
   Field& operator=(const Field& other);
   Field(Field&&) noexcept            = default;
   Field& operator=(Field&&) noexcept = default;
   ~Field()                           = default;

   const std::string& name() const { return name_; }
   const Coord4& requestedSize() const { return requested_; }
   const Coord4& allocatedSize() const { return allocated_; }
   int ghostLayers() const { return ghost_; }
   Layout layout() const { return layout_; }
   std::size_t alignment() const { return alignment_; }

   int xSize() const { return requested_[0]; }
   int ySize() const { return requested_[1]; }
   int zSize() const { return requested_[2]; }
   int fSize() const { return requested_[3]; }

   /// Element strides of the allocated buffer, in elements.
   const std::array<std::ptrdiff_t, 4>& strides() const { return strides_; }

   std::size_t bufferLength() const { return length_; }

   /// Checked buffer offset of a cell entry; throws FieldError on out-of-range coordinates.
   std::size_t elementIndex(int x, int y, int z, int f) const;

   bool inRange(int x, int y, int z, int f) const
   {
      return x >= -ghost_ && x < requested_[0] + ghost_ && y >= -ghost_ && y < requested_[1] + ghost_ &&
             z >= -ghost_ && z < requested_[2] + ghost_ && f >= 0 && f < requested_[3];
   }

   std::size_t index(int x, int y, int z, int f) const noexcept
   {
      return std::size_t(std::ptrdiff_t(x + ghost_) * strides_[0] + std::ptrdiff_t(y + ghost_) * strides_[1] +
                         std::ptrdiff_t(z + ghost_) * strides_[2] + std::ptrdiff_t(f) * strides_[3]);
   }

   double& operator()(int x, int y, int z, int f = 0) noexcept { return data_[index(x, y, z, f)]; }
   double operator()(int x, int y, int z, int f = 0) const noexcept { return data_[index(x, y, z, f)]; }

   double* cellPointer(int x, int y, int z) noexcept { return data_.get() + index(x, y, z, 0); }
   const double* cellPointer(int x, int y, int z) const noexcept { return data_.get() + index(x, y, z, 0); }

   std::span<double> data() noexcept { return { data_.get(), length_ }; }
   std::span<const double> data() const noexcept { return { data_.get(), length_ }; }

   void fill(double value);

   /// True if requested size, ghost layers, layout and alignment agree.
   bool hasSameShape(const Field& other) const;

   /// Exchanges the underlying buffers in O(1); shapes have to match.
   void swapBuffers(Field& other);

 private:
   struct AlignedDelete
   {
      void operator()(double* p) const noexcept;
   };

   void allocate();

   std::string name_;
   Coord4 requested_{};
   Coord4 allocated_{};
   int ghost_ = 0;
   Layout layout_ = Layout::AoS;
   std::size_t alignment_ = 8;
   std::array<std::ptrdiff_t, 4> strides_{};
   std::size_t length_ = 0;
   std::unique_ptr<double[], AlignedDelete> data_;
};

Field createField(const std::string& name, Coord4 requestedSize, int ghostLayers, Layout layout, std::size_t alignment);

void swapBuffers(Field& a, Field& b);

} // namespace blockforge::field
