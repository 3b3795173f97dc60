//======================================================================================================================
//
//! \file FieldView.h
//! \brief Sliced views on fields and the zero-copy array descriptor handed to scripts.
//
//======================================================================================================================
#pragma once

#include "blockforge/field/Field.h"

#include <array>
#include <cstddef>

namespace blockforge::field {

/// Half-open coordinate range [begin, end).
struct Range
{
   int begin = 0;
   int end   = 0;

   int size() const { return end - begin; }
   bool operator==(const Range&) const = default;
};

using Interval4 = std::array<Range, 4>;

/// Interval covering the interior of a field (optionally with ghost layers).
Interval4 fullInterval(const Field& field, bool withGhostLayers = false);

//**********************************************************************************************************************
/*!
 *  Window into a parent field. Coordinates are relative to `offset()`; all accesses go to the parent buffer, so writes
 *  through the view are visible in the parent and vice versa. Must not outlive the parent.
 */
//**********************************************************************************************************************
class FieldView
{
 public:
   FieldView(Field& parent, const Interval4& interval, bool allowGhostLayers = false);

   Field& parent() const { return *parent_; }
   const Coord4& offset() const { return offset_; }
   const Coord4& size() const { return size_; }
   const std::array<std::ptrdiff_t, 4>& strides() const { return parent_->strides(); }

   double& operator()(int x, int y, int z, int f = 0) const
   {
      return (*parent_)(offset_[0] + x, offset_[1] + y, offset_[2] + z, offset_[3] + f);
   }

   std::size_t cellCount() const { return std::size_t(size_[0]) * size_[1] * size_[2] * size_[3]; }

 private:
   Field* parent_;
   Coord4 offset_;
   Coord4 size_;
};

FieldView viewSlice(Field& field, const Interval4& interval, bool allowGhostLayers = false);

//**********************************************************************************************************************
/*!
 *  Strided description of a field region, in the spirit of a buffer-protocol record. The descriptor references the
 *  field object, not the buffer, so it keeps addressing the field's current buffer after swapBuffers().
 */
//**********************************************************************************************************************
struct ArrayViewDescriptor
{
   Field* field = nullptr;
   std::ptrdiff_t baseOffset = 0; //!< offset of element (0,0,0,0) from the buffer start, in elements
   std::array<std::ptrdiff_t, 4> shape{};
   std::array<std::ptrdiff_t, 4> stridesBytes{};
   const char* elementKind = "float64";
   bool writable = false;

   double* base() const { return field->data().data() + baseOffset; }

   std::ptrdiff_t offsetOf(std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k, std::ptrdiff_t l) const
   {
      constexpr auto e = std::ptrdiff_t(sizeof(double));
      return baseOffset + (i * stridesBytes[0] + j * stridesBytes[1] + k * stridesBytes[2] + l * stridesBytes[3]) / e;
   }

   double get(std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k, std::ptrdiff_t l) const;
   void set(std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k, std::ptrdiff_t l, double value) const;
};

ArrayViewDescriptor exportArrayView(Field& field, bool writable, bool withGhostLayers = false);
ArrayViewDescriptor exportArrayView(const FieldView& view, bool writable);

} // namespace blockforge::field
