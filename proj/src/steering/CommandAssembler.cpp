//======================================================================================================================
//
//! \file CommandAssembler.cpp
//
//======================================================================================================================
#include "blockforge/steering/CommandAssembler.h"

#include <cctype>
#include <vector>

namespace blockforge::steering {

Completeness heuristicProbe(const std::string& text)
{
   std::vector<char> stack;
   char quote = 0;
   for (std::size_t i = 0; i < text.size(); ++i)
   {
      const char c = text[i];
      if (quote)
      {
         if (c == '\\') ++i;
         else if (c == quote) quote = 0;
         continue;
      }
      if (c == '#')
      {
         while (i < text.size() && text[i] != '\n')
            ++i;
         continue;
      }
      if (c == '"' || c == '\'') quote = c;
      else if (c == '(' || c == '[' || c == '{') stack.push_back(c);
      else if (c == ')' || c == ']' || c == '}')
      {
         const char open = c == ')' ? '(' : (c == ']' ? '[' : '{');
         if (stack.empty() || stack.back() != open) return Completeness::Invalid;
         stack.pop_back();
      }
   }
   if (!stack.empty() || quote) return Completeness::Incomplete;

   std::string last = text.substr(text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1);
   while (!last.empty() && std::isspace(static_cast<unsigned char>(last.back())))
      last.pop_back();
   if (!last.empty() && last.back() == '\\') return Completeness::Incomplete;

   std::string first = text.substr(0, text.find('\n'));
   while (!first.empty() && std::isspace(static_cast<unsigned char>(first.back())))
      first.pop_back();
   if (!first.empty() && first.back() == ':')
   {
      // block form: ends with an empty line
      if (text.find('\n') == std::string::npos || !last.empty()) return Completeness::Incomplete;
   }
   return Completeness::Complete;
}

std::optional<std::string> CommandAssembler::feed(const std::string& line)
{
   std::string l = line;
   while (!l.empty() && (l.back() == '\n' || l.back() == '\r'))
      l.pop_back();
   if (lines_.empty() && l.find_first_not_of(" \t") == std::string::npos) return std::nullopt;

   if (!lines_.empty()) lines_ += '\n';
   lines_ += l;
   if (probe_(lines_) == Completeness::Incomplete) return std::nullopt;
   std::string out;
   out.swap(lines_);
   return out;
}

} // namespace blockforge::steering
