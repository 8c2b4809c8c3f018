#include <gtest/gtest.h>

#include "ricon/errors.hpp"
#include "ricon/span_grid.hpp"

namespace ricon {
namespace {

TEST(SpanCount, UncappedIsTriangular) {
  EXPECT_EQ(span_count(3, 30), 6u);
  EXPECT_EQ(span_count(3, 0), 6u);
  EXPECT_EQ(enumerate_spans(3, 30).size(), 6u);
}

TEST(SpanCount, CapLimitsWidth) {
  EXPECT_EQ(span_count(5, 2), 9u);
  auto spans = enumerate_spans(5, 2);
  ASSERT_EQ(spans.size(), 9u);
  for (const auto& s : spans) EXPECT_LE(s.length(), 2u);
}

TEST(EnumerateSpans, WidthMajorOrder) {
  auto spans = enumerate_spans(3, 0);
  std::vector<Span> expected = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {1, 2}, {0, 2}};
  EXPECT_EQ(spans, expected);
}

TEST(SpanGrid, IndexMatchesEnumeration) {
  for (std::size_t l = 1; l <= 9; ++l) {
    for (std::size_t cap : {0u, 1u, 2u, 4u, 20u}) {
      SpanGrid<int> grid(l, cap);
      auto spans = enumerate_spans(l, cap);
      ASSERT_EQ(grid.size(), spans.size());
      for (std::size_t k = 0; k < spans.size(); ++k) {
        EXPECT_EQ(grid.index(spans[k].start, spans[k].end), k);
      }
    }
  }
}

TEST(SpanGrid, OutOfRangeSpansAreRejected) {
  SpanGrid<double> grid(4, 2);
  EXPECT_FALSE(grid.contains(0, 2));
  EXPECT_FALSE(grid.contains(2, 1));
  EXPECT_THROW(grid(0, 3), ContractError);
  EXPECT_THROW(grid(3, 4), ContractError);
  grid(2, 3) = 0.5;
  EXPECT_EQ(grid(2, 3), 0.5);
}

}  // namespace
}  // namespace ricon
