#include "ricon/span_grid.hpp"

namespace ricon {

std::size_t span_count(std::size_t length, std::size_t max_span_len) {
  std::size_t width = max_span_len == 0 || max_span_len > length ? length : max_span_len;
  // sum over w = 1..width of (length - w + 1)
  return width * length - width * (width - 1) / 2;
}

std::vector<Span> enumerate_spans(std::size_t length, std::size_t max_span_len) {
  std::size_t width = max_span_len == 0 || max_span_len > length ? length : max_span_len;
  std::vector<Span> spans;
  spans.reserve(span_count(length, max_span_len));
  for (std::size_t w = 1; w <= width; ++w) {
    for (std::size_t i = 0; i + w <= length; ++i) spans.push_back({i, i + w - 1});
  }
  return spans;
}

}  // namespace ricon
