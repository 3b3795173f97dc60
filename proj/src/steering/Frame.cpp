//======================================================================================================================
//
//! \file Frame.cpp
//
//======================================================================================================================
#include "blockforge/steering/Frame.h"

#include <charconv>

namespace blockforge::steering {

namespace {

constexpr std::string_view header = "##FRAME ";
constexpr std::string_view footer = "##END\n";

ReplyItem text(std::string s)
{
   ReplyItem item;
   item.data = s;
   item.raw  = std::move(s);
   return item;
}

} // namespace

std::string encodeFrame(const std::string& contentType, const std::string& payload)
{
   std::string out;
   out.reserve(payload.size() + contentType.size() + 32);
   out += header;
   out += contentType;
   out += ' ';
   out += std::to_string(payload.size());
   out += '\n';
   out += payload;
   out += footer;
   return out;
}

void FrameDecoder::feed(std::string_view bytes) { buffer_.append(bytes); }

std::optional<ReplyItem> FrameDecoder::next()
{
   const std::size_t eol = buffer_.find('\n');
   if (eol == std::string::npos) return std::nullopt;
   const std::string_view line(buffer_.data(), eol);

   if (line.substr(0, header.size()) == header)
   {
      const std::string_view rest = line.substr(header.size());
      const std::size_t sp        = rest.rfind(' ');
      std::size_t count           = 0;
      bool valid                  = sp != std::string_view::npos && sp > 0;
      if (valid)
      {
         const std::string_view num = rest.substr(sp + 1);
         auto [ptr, ec]             = std::from_chars(num.data(), num.data() + num.size(), count);
         valid = !num.empty() && ec == std::errc() && ptr == num.data() + num.size() &&
                 rest.substr(0, sp).find(' ') == std::string_view::npos;
      }
      if (valid)
      {
         const std::size_t total = eol + 1 + count + footer.size();
         if (buffer_.size() < total) return std::nullopt; // wait for the rest
         if (std::string_view(buffer_).substr(eol + 1 + count, footer.size()) == footer)
         {
            ReplyItem item;
            item.kind        = ReplyItem::Kind::Frame;
            item.contentType = std::string(rest.substr(0, sp));
            item.data        = buffer_.substr(eol + 1, count);
            item.raw         = buffer_.substr(0, total);
            buffer_.erase(0, total);
            return item;
         }
      }
   }
   ReplyItem item = text(buffer_.substr(0, eol + 1));
   buffer_.erase(0, eol + 1);
   return item;
}

std::optional<ReplyItem> FrameDecoder::flush()
{
   if (auto item = next()) return item;
   if (buffer_.empty()) return std::nullopt;
   // an incomplete frame falls back to its header line first
   const std::size_t eol = buffer_.find('\n');
   const std::size_t n   = eol == std::string::npos ? buffer_.size() : eol + 1;
   ReplyItem item        = text(buffer_.substr(0, n));
   buffer_.erase(0, n);
   return item;
}

} // namespace blockforge::steering
