//======================================================================================================================
//
//! \file Frame.h
//! \brief Reply framing on the console wire: plain lines and ##FRAME data blocks.
//
//======================================================================================================================
#pragma once

#include <deque>
#include <optional>
#include <string>
#include <string_view>

namespace blockforge::steering {

/// "##FRAME <type> <n>\n" + payload + "##END\n"
std::string encodeFrame(const std::string& contentType, const std::string& payload);

struct ReplyItem
{
   enum class Kind { Text, Frame };
   Kind kind = Kind::Text;
   std::string contentType; //!< frames only
   std::string data;        //!< text line including its newline, or the frame payload
   std::string raw;         //!< exact wire bytes of the item

   bool operator==(const ReplyItem&) const = default;
};

//**********************************************************************************************************************
/*!
 *  Incremental parser for the console wire format. Lines that merely look like a frame header but are malformed, or
 *  frames without the closing "##END" line, are passed on as text.
 */
//**********************************************************************************************************************
class FrameDecoder
{
 public:
   void feed(std::string_view bytes);
   /// Next complete item, if any.
   std::optional<ReplyItem> next();
   /// Remaining bytes as text (a trailing line without newline, an unterminated frame).
   std::optional<ReplyItem> flush();

 private:
   std::string buffer_;
};

} // namespace blockforge::steering
