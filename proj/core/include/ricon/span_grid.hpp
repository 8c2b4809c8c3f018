#pragma once

#include <cstddef>
#include <vector>

#include "ricon/errors.hpp"

namespace ricon {

// Contiguous character range [start, end], end inclusive.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start + 1; }
  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

// Number of enumerated spans for a sentence of `length` characters when spans
// are capped at `max_span_len` characters (0 means uncapped).
std::size_t span_count(std::size_t length, std::size_t max_span_len);

// Every span (i, j) with i <= j < length and j - i + 1 <= cap, ordered by
// width first and start second. Single-character spans come first.
std::vector<Span> enumerate_spans(std::size_t length, std::size_t max_span_len);

// Upper-triangular container of per-span values over the enumerated spans.
template <typename T>
class SpanGrid {
 public:
  SpanGrid() = default;
  SpanGrid(std::size_t length, std::size_t max_span_len, T fill = T{})
      : length_(length),
        width_(max_span_len == 0 || max_span_len > length ? length : max_span_len),
        values_(span_count(length, max_span_len), fill) {}

  std::size_t length() const { return length_; }
  std::size_t max_width() const { return width_; }
  std::size_t size() const { return values_.size(); }

  bool contains(std::size_t i, std::size_t j) const {
    return i <= j && j < length_ && j - i + 1 <= width_;
  }

  // Position of (i, j) in width-major enumeration order.
  std::size_t index(std::size_t i, std::size_t j) const {
    if (!contains(i, j)) {
      throw ContractError("span (" + std::to_string(i) + ", " + std::to_string(j) +
                          ") outside the enumerated grid");
    }
    std::size_t w = j - i + 1;
    return (w - 1) * length_ - (w - 1) * (w - 2) / 2 + i;
  }

  T& operator()(std::size_t i, std::size_t j) { return values_[index(i, j)]; }
  const T& operator()(std::size_t i, std::size_t j) const { return values_[index(i, j)]; }
  T& operator[](std::size_t k) { return values_[k]; }
  const T& operator[](std::size_t k) const { return values_[k]; }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

 private:
  std::size_t length_ = 0;
  std::size_t width_ = 0;
  std::vector<T> values_;
};

}  // namespace ricon
