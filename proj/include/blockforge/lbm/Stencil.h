//======================================================================================================================
//
//! \file Stencil.h
//! \brief D3Q19 and D2Q9 velocity sets.
//
//======================================================================================================================
#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockforge::lbm {

enum class StencilKind { D3Q19, D2Q9 };

struct D3Q19
{
   static constexpr int Q = 19;
   static constexpr StencilKind kind = StencilKind::D3Q19;
   // rest, 6 faces, 12 edges; opposite directions are adjacent pairs
   static constexpr std::array<std::array<int, 3>, Q> e{ { { 0, 0, 0 },
                                                           { 1, 0, 0 },   { -1, 0, 0 },  { 0, 1, 0 },  { 0, -1, 0 },
                                                           { 0, 0, 1 },   { 0, 0, -1 },  { 1, 1, 0 },  { -1, -1, 0 },
                                                           { 1, -1, 0 },  { -1, 1, 0 },  { 1, 0, 1 },  { -1, 0, -1 },
                                                           { 1, 0, -1 },  { -1, 0, 1 },  { 0, 1, 1 },  { 0, -1, -1 },
                                                           { 0, 1, -1 },  { 0, -1, 1 } } };
   static constexpr std::array<int, Q> inv{ 0, 2, 1, 4, 3, 6, 5, 8, 7, 10, 9, 12, 11, 14, 13, 16, 15, 18, 17 };
   static constexpr int weightDenominator = 36;
   static constexpr std::array<int, Q> weightNumerator{ 12, 2, 2, 2, 2, 2, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1 };
   static constexpr std::array<double, Q> w{ 1.0 / 3.0,  1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0,
                                             1.0 / 18.0, 1.0 / 18.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0,
                                             1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0,
                                             1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0 };
};

struct D2Q9
{
   static constexpr int Q = 9;
   static constexpr StencilKind kind = StencilKind::D2Q9;
   static constexpr std::array<std::array<int, 3>, Q> e{ { { 0, 0, 0 },
                                                           { 1, 0, 0 },   { -1, 0, 0 },  { 0, 1, 0 },  { 0, -1, 0 },
                                                           { 1, 1, 0 },   { -1, -1, 0 }, { 1, -1, 0 }, { -1, 1, 0 } } };
   static constexpr std::array<int, Q> inv{ 0, 2, 1, 4, 3, 6, 5, 8, 7 };
   static constexpr int weightDenominator = 36;
   static constexpr std::array<int, Q> weightNumerator{ 16, 4, 4, 4, 4, 1, 1, 1, 1 };
   static constexpr std::array<double, Q> w{ 4.0 / 9.0,  1.0 / 9.0,  1.0 / 9.0,  1.0 / 9.0, 1.0 / 9.0,
                                             1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0 };
};

/// Runtime description of a velocity set.
struct Stencil
{
   StencilKind kind;
   int Q;
   std::vector<std::array<int, 3>> e;
   std::vector<double> w;
   std::vector<int> weightNumerator;
   int weightDenominator;
   std::vector<int> opposite;
   std::string name;
};

Stencil makeStencil(StencilKind kind);
Stencil makeStencil(const std::string& name);

/// Calls `fn(S{})` with the compile-time stencil type matching `kind`.
template <typename Fn>
decltype(auto) dispatchStencil(StencilKind kind, Fn&& fn)
{
   if (kind == StencilKind::D2Q9) return fn(D2Q9{});
   return fn(D3Q19{});
}

} // namespace blockforge::lbm
