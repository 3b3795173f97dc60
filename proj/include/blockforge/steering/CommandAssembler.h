//======================================================================================================================
//
//! \file CommandAssembler.h
//
//======================================================================================================================
#pragma once

#include <functional>
#include <optional>
#include <string>

namespace blockforge::steering {

enum class Completeness { Complete, Incomplete, Invalid };

/// Needs-more-input test of a command text (lines joined with '\n').
using CompletenessProbe = std::function<Completeness(const std::string&)>;

/// Fallback test: brackets balanced outside string literals, no trailing backslash, and a block opened by a line
/// ending in ':' is closed by an empty line.
Completeness heuristicProbe(const std::string& text);

//**********************************************************************************************************************
/*!
 *  Collects console lines until the probe reports a complete (or invalid) command. Invalid commands are dispatched
 *  too, so the interpreter can report the error.
 */
//**********************************************************************************************************************
class CommandAssembler
{
 public:
   explicit CommandAssembler(CompletenessProbe probe = heuristicProbe) : probe_(std::move(probe)) {}

   /// Returns the full command once complete.
   std::optional<std::string> feed(const std::string& line);
   const char* prompt() const { return lines_.empty() ? ">>> " : "... "; }
   bool pending() const { return !lines_.empty(); }
   void reset() { lines_.clear(); }

 private:
   CompletenessProbe probe_;
   std::string lines_;
};

} // namespace blockforge::steering
