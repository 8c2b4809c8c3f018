#pragma once

#include <string>
#include <string_view>

namespace ricon::utf8 {

// Decodes UTF-8 into Unicode scalar values. Throws ricon::Error on malformed
// input (overlong forms, surrogates, truncated sequences).
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
std::string encode(char32_t c);

}  // namespace ricon::utf8
