//======================================================================================================================
//
//! \file Field.cpp
//
//======================================================================================================================
#include "blockforge/field/Field.h"
#include "blockforge/field/FieldView.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <sstream>

namespace blockforge::field {

const char* layoutName(Layout layout)
{
   return layout == Layout::AoS ? "AoS" : "SoA";
}

void Field::AlignedDelete::operator()(double* p) const noexcept
{
   std::free(p);
}

Field::Field(std::string name, Coord4 requestedSize, int ghostLayers, Layout layout, std::size_t alignment)
   : name_(std::move(name)), requested_(requestedSize), ghost_(ghostLayers), layout_(layout), alignment_(alignment)
{
   for (int d = 0; d < 4; ++d)
      if (requested_[d] < 1)
         throw FieldError("field '" + name_ + "': extent " + std::to_string(d) + " must be >= 1, got " +
                          std::to_string(requested_[d]));
   if (ghost_ < 0) throw FieldError("field '" + name_ + "': negative ghost layer count");
   if (alignment_ < 8 || (alignment_ & (alignment_ - 1)) != 0)
      throw FieldError("field '" + name_ + "': alignment must be a power of two >= 8, got " +
                       std::to_string(alignment_));

   for (int d = 0; d < 3; ++d)
      allocated_[d] = requested_[d] + 2 * ghost_;
   allocated_[3] = requested_[3];

   if (layout_ == Layout::SoA)
   {
      const int lineElements = int(alignment_ / sizeof(double));
      allocated_[0]          = (allocated_[0] + lineElements - 1) / lineElements * lineElements;
   }

   const auto ax = std::ptrdiff_t(allocated_[0]);
   const auto ay = std::ptrdiff_t(allocated_[1]);
   const auto az = std::ptrdiff_t(allocated_[2]);
   const auto af = std::ptrdiff_t(allocated_[3]);
   if (layout_ == Layout::AoS)
      strides_ = { af, ax * af, ay * ax * af, 1 };
   else
      strides_ = { 1, ax, ay * ax, az * ay * ax };

   length_ = std::size_t(ax * ay * az * af);
   allocate();
}

void Field::allocate()
{
   std::size_t bytes = length_ * sizeof(double);
   bytes             = (bytes + alignment_ - 1) / alignment_ * alignment_;
   auto* p           = static_cast<double*>(std::aligned_alloc(alignment_, bytes));
   if (!p) throw std::bad_alloc();
   std::memset(p, 0, bytes);
   data_.reset(p);
}

Field::Field(const Field& other)
   : name_(other.name_), requested_(other.requested_), allocated_(other.allocated_), ghost_(other.ghost_),
     layout_(other.layout_), alignment_(other.alignment_), strides_(other.strides_), length_(other.length_)
{
   allocate();
   std::copy_n(other.data_.get(), length_, data_.get());
}

Field& Field::operator=(const Field& other)
{
   if (this != &other)
   {
      Field tmp(other);
      *this = std::move(tmp);
   }
   return *this;
}

std::size_t Field::elementIndex(int x, int y, int z, int f) const
{
   if (!inRange(x, y, z, f))
   {
      std::ostringstream os;
      os << "field '" << name_ << "': coordinate (" << x << "," << y << "," << z << "," << f << ") out of range";
      throw FieldError(os.str());
   }
   return index(x, y, z, f);
}

void Field::fill(double value)
{
   std::fill_n(data_.get(), length_, value);
}

bool Field::hasSameShape(const Field& other) const
{
   return requested_ == other.requested_ && ghost_ == other.ghost_ && layout_ == other.layout_ &&
          alignment_ == other.alignment_;
}

void Field::swapBuffers(Field& other)
{
   if (!hasSameShape(other))
      throw FieldError("swapBuffers: fields '" + name_ + "' and '" + other.name_ + "' differ in shape or layout");
   data_.swap(other.data_);
}

Field createField(const std::string& name, Coord4 requestedSize, int ghostLayers, Layout layout, std::size_t alignment)
{
   return Field(name, requestedSize, ghostLayers, layout, alignment);
}

void swapBuffers(Field& a, Field& b)
{
   a.swapBuffers(b);
}

// ---------------------------------------------------------------------------------------------------------------------
//   Views
// ---------------------------------------------------------------------------------------------------------------------

Interval4 fullInterval(const Field& field, bool withGhostLayers)
{
   const int g = withGhostLayers ? field.ghostLayers() : 0;
   Interval4 iv;
   for (int d = 0; d < 3; ++d)
      iv[d] = { -g, field.requestedSize()[d] + g };
   iv[3] = { 0, field.fSize() };
   return iv;
}

FieldView::FieldView(Field& parent, const Interval4& interval, bool allowGhostLayers) : parent_(&parent)
{
   const int g = allowGhostLayers ? parent.ghostLayers() : 0;
   for (int d = 0; d < 4; ++d)
   {
      const int lo = d < 3 ? -g : 0;
      const int hi = d < 3 ? parent.requestedSize()[d] + g : parent.fSize();
      const auto& r = interval[d];
      if (r.begin >= r.end)
         throw FieldError("viewSlice on '" + parent.name() + "': empty range in dimension " + std::to_string(d));
      if (r.begin < lo || r.end > hi)
         throw FieldError("viewSlice on '" + parent.name() + "': range [" + std::to_string(r.begin) + "," +
                          std::to_string(r.end) + ") outside [" + std::to_string(lo) + "," + std::to_string(hi) +
                          ") in dimension " + std::to_string(d));
      offset_[d] = r.begin;
      size_[d]   = r.size();
   }
}

FieldView viewSlice(Field& field, const Interval4& interval, bool allowGhostLayers)
{
   return FieldView(field, interval, allowGhostLayers);
}

double ArrayViewDescriptor::get(std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k, std::ptrdiff_t l) const
{
   return field->data()[std::size_t(offsetOf(i, j, k, l))];
}

void ArrayViewDescriptor::set(std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k, std::ptrdiff_t l,
                              double value) const
{
   if (!writable) throw FieldError("array view of '" + field->name() + "' is read-only");
   field->data()[std::size_t(offsetOf(i, j, k, l))] = value;
}

namespace {
ArrayViewDescriptor describe(Field& field, const Coord4& offset, const Coord4& size, bool writable)
{
   ArrayViewDescriptor d;
   d.field      = &field;
   d.baseOffset = std::ptrdiff_t(field.index(offset[0], offset[1], offset[2], offset[3]));
   for (int i = 0; i < 4; ++i)
   {
      d.shape[i]        = size[i];
      d.stridesBytes[i] = field.strides()[i] * std::ptrdiff_t(sizeof(double));
   }
   d.writable = writable;
   return d;
}
} // namespace

ArrayViewDescriptor exportArrayView(Field& field, bool writable, bool withGhostLayers)
{
   const int g = withGhostLayers ? field.ghostLayers() : 0;
   Coord4 size = field.requestedSize();
   for (int d = 0; d < 3; ++d)
      size[d] += 2 * g;
   return describe(field, { -g, -g, -g, 0 }, size, writable);
}

ArrayViewDescriptor exportArrayView(const FieldView& view, bool writable)
{
   return describe(view.parent(), view.offset(), view.size(), writable);
}

} // namespace blockforge::field
