#include "ricon/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ricon/errors.hpp"

namespace ricon::ops {
namespace {

Graph& graph_of(Var a) {
  if (!a.valid()) throw ContractError("operation on an empty Var");
  return *a.graph();
}

Graph& graph_of(Var a, Var b) {
  Graph& g = graph_of(a);
  if (b.graph() != &g) throw ContractError("operands belong to different graphs");
  return g;
}

[[noreturn]] void shape_mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) +
                   " and " + shape_string(b.shape()));
}

Shape matrix_shape(std::size_t rows, std::size_t cols) { return {rows, cols}; }

// c (n x m) += a (n x k) * b (k x m)
void gemm_nn(const Real* a, const Real* b, Real* c, std::size_t n, std::size_t k,
             std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    Real* ci = c + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      Real aip = a[i * k + p];
      if (aip == 0.0) continue;
      const Real* bp = b + p * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
    }
  }
}

// c (n x k) += a (n x m) * b^T where b is (k x m)
void gemm_nt(const Real* a, const Real* b, Real* c, std::size_t n, std::size_t m,
             std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    const Real* ai = a + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const Real* bp = b + p * m;
      Real acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += ai[j] * bp[j];
      c[i * k + p] += acc;
    }
  }
}

// c (k x m) += a^T * b where a is (n x k) and b is (n x m)
void gemm_tn(const Real* a, const Real* b, Real* c, std::size_t n, std::size_t k,
             std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const Real* bi = b + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      Real aip = a[i * k + p];
      if (aip == 0.0) continue;
      Real* cp = c + p * m;
      for (std::size_t j = 0; j < m; ++j) cp[j] += aip * bi[j];
    }
  }
}

template <typename Forward, typename Derivative>
Var unary(const char* op, Var x, Forward f, Derivative df) {
  Graph& g = graph_of(x);
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t k = 0; k < xv.size(); ++k) out[k] = f(xv[k]);
  std::size_t xid = x.id();
  return g.record(op, std::move(out), {xid}, [xid, df](Graph& g, const Graph::Node& self) {
    Tensor* gx = g.grad_of(xid);
    if (!gx) return;
    const Tensor& xv = g.node(xid).value;
    for (std::size_t k = 0; k < xv.size(); ++k) {
      (*gx)[k] += self.grad[k] * df(xv[k], self.value[k]);
    }
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() > 2 || bv.rank() > 2 || av.cols() != bv.rows()) {
    shape_mismatch("matmul", av, bv);
  }
  std::size_t n = av.rows(), k = av.cols(), m = bv.cols();
  Tensor out(matrix_shape(n, m));
  gemm_nn(av.data(), bv.data(), out.data(), n, k, m);
  std::size_t aid = a.id(), bid = b.id();
  return g.record("matmul", std::move(out), {aid, bid},
                  [aid, bid, n, k, m](Graph& g, const Graph::Node& self) {
                    const Tensor& av = g.node(aid).value;
                    const Tensor& bv = g.node(bid).value;
                    if (Tensor* ga = g.grad_of(aid)) {
                      gemm_nt(self.grad.data(), bv.data(), ga->data(), n, m, k);
                    }
                    if (Tensor* gb = g.grad_of(bid)) {
                      gemm_tn(av.data(), self.grad.data(), gb->data(), n, k, m);
                    }
                  });
}

namespace {

Var elementwise_binary(const char* op, Var a, Var b, int kind) {
  Graph& g = graph_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() != bv.shape()) shape_mismatch(op, av, bv);
  Tensor out(av.shape());
  for (std::size_t k = 0; k < av.size(); ++k) {
    switch (kind) {
      case 0: out[k] = av[k] + bv[k]; break;
      case 1: out[k] = av[k] - bv[k]; break;
      default: out[k] = av[k] * bv[k]; break;
    }
  }
  std::size_t aid = a.id(), bid = b.id();
  return g.record(op, std::move(out), {aid, bid},
                  [aid, bid, kind](Graph& g, const Graph::Node& self) {
                    Tensor* ga = g.grad_of(aid);
                    Tensor* gb = g.grad_of(bid);
                    const Tensor& av = g.node(aid).value;
                    const Tensor& bv = g.node(bid).value;
                    for (std::size_t k = 0; k < self.grad.size(); ++k) {
                      Real d = self.grad[k];
                      if (ga) (*ga)[k] += kind == 2 ? d * bv[k] : d;
                      if (gb) (*gb)[k] += kind == 2 ? d * av[k] : (kind == 1 ? -d : d);
                    }
                  });
}

}  // namespace

Var add(Var a, Var b) { return elementwise_binary("add", a, b, 0); }
Var sub(Var a, Var b) { return elementwise_binary("sub", a, b, 1); }
Var mul(Var a, Var b) { return elementwise_binary("mul", a, b, 2); }

Var add_bias(Var x, Var bias) {
  Graph& g = graph_of(x, bias);
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (xv.rank() > 2 || bv.size() != xv.cols()) shape_mismatch("add_bias", xv, bv);
  std::size_t rows = xv.rows(), cols = xv.cols();
  Tensor out(matrix_shape(rows, cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = xv[r * cols + c] + bv[c];
  }
  std::size_t xid = x.id(), bid = bias.id();
  return g.record("add_bias", std::move(out), {xid, bid},
                  [xid, bid, rows, cols](Graph& g, const Graph::Node& self) {
                    if (Tensor* gx = g.grad_of(xid)) *gx += self.grad;
                    if (Tensor* gb = g.grad_of(bid)) {
                      for (std::size_t r = 0; r < rows; ++r) {
                        for (std::size_t c = 0; c < cols; ++c) {
                          (*gb)[c] += self.grad[r * cols + c];
                        }
                      }
                    }
                  });
}

Var mul_col(Var x, Var col) {
  Graph& g = graph_of(x, col);
  const Tensor& xv = x.value();
  const Tensor& cv = col.value();
  if (xv.rank() > 2 || cv.size() != xv.rows()) shape_mismatch("mul_col", xv, cv);
  std::size_t rows = xv.rows(), cols = xv.cols();
  Tensor out(matrix_shape(rows, cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = xv[r * cols + c] * cv[r];
  }
  std::size_t xid = x.id(), cid = col.id();
  return g.record("mul_col", std::move(out), {xid, cid},
                  [xid, cid, rows, cols](Graph& g, const Graph::Node& self) {
                    Tensor* gx = g.grad_of(xid);
                    Tensor* gc = g.grad_of(cid);
                    const Tensor& xv = g.node(xid).value;
                    const Tensor& cv = g.node(cid).value;
                    for (std::size_t r = 0; r < rows; ++r) {
                      for (std::size_t c = 0; c < cols; ++c) {
                        Real d = self.grad[r * cols + c];
                        if (gx) (*gx)[r * cols + c] += d * cv[r];
                        if (gc) (*gc)[r] += d * xv[r * cols + c];
                      }
                    }
                  });
}

Var scale(Var x, Real factor) { return affine(x, factor, 0.0); }

Var affine(Var x, Real factor, Real offset) {
  return unary(
      "affine", x, [factor, offset](Real v) { return factor * v + offset; },
      [factor](Real, Real) { return factor; });
}

Var tanh(Var x) {
  return unary(
      "tanh", x, [](Real v) { return std::tanh(v); },
      [](Real, Real y) { return 1.0 - y * y; });
}

Var sigmoid(Var x) {
  return unary(
      "sigmoid", x,
      [](Real v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        Real e = std::exp(v);
        return e / (1.0 + e);
      },
      [](Real, Real y) { return y * (1.0 - y); });
}

Var log(Var x) {
  return unary(
      "log", x, [](Real v) { return std::log(v); }, [](Real v, Real) { return 1.0 / v; });
}

Var exp(Var x) {
  return unary(
      "exp", x, [](Real v) { return std::exp(v); }, [](Real, Real y) { return y; });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_cols of zero tensors");
  Graph& g = graph_of(parts[0]);
  std::size_t rows = parts[0].rows();
  std::vector<std::size_t> widths;
  std::vector<std::size_t> ids;
  std::size_t total = 0;
  for (const Var& p : parts) {
    graph_of(parts[0], p);
    if (p.value().rank() > 2 || p.rows() != rows) {
      shape_mismatch("concat_cols", parts[0].value(), p.value());
    }
    widths.push_back(p.cols());
    ids.push_back(p.id());
    total += p.cols();
  }
  Tensor out(matrix_shape(rows, total));
  std::size_t offset = 0;
  for (std::size_t q = 0; q < parts.size(); ++q) {
    const Tensor& pv = parts[q].value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(pv.data() + r * widths[q], widths[q], out.data() + r * total + offset);
    }
    offset += widths[q];
  }
  auto inputs = ids;
  return g.record("concat_cols", std::move(out), std::move(inputs),
                  [ids, widths, rows, total](Graph& g, const Graph::Node& self) {
                    std::size_t offset = 0;
                    for (std::size_t q = 0; q < ids.size(); ++q) {
                      if (Tensor* gp = g.grad_of(ids[q])) {
                        for (std::size_t r = 0; r < rows; ++r) {
                          for (std::size_t c = 0; c < widths[q]; ++c) {
                            (*gp)[r * widths[q] + c] += self.grad[r * total + offset + c];
                          }
                        }
                      }
                      offset += widths[q];
                    }
                  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_rows of zero tensors");
  Graph& g = graph_of(parts[0]);
  std::size_t cols = parts[0].cols();
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> ids;
  std::size_t rows = 0;
  for (const Var& p : parts) {
    graph_of(parts[0], p);
    if (p.value().rank() > 2 || p.cols() != cols) {
      shape_mismatch("concat_rows", parts[0].value(), p.value());
    }
    sizes.push_back(p.value().size());
    ids.push_back(p.id());
    rows += p.rows();
  }
  Tensor out(matrix_shape(rows, cols));
  std::size_t offset = 0;
  for (std::size_t q = 0; q < parts.size(); ++q) {
    std::copy_n(parts[q].value().data(), sizes[q], out.data() + offset);
    offset += sizes[q];
  }
  auto inputs = ids;
  return g.record("concat_rows", std::move(out), std::move(inputs),
                  [ids, sizes](Graph& g, const Graph::Node& self) {
                    std::size_t offset = 0;
                    for (std::size_t q = 0; q < ids.size(); ++q) {
                      if (Tensor* gp = g.grad_of(ids[q])) {
                        for (std::size_t k = 0; k < sizes[q]; ++k) {
                          (*gp)[k] += self.grad[offset + k];
                        }
                      }
                      offset += sizes[q];
                    }
                  });
}

Var slice_rows(Var x, std::size_t begin, std::size_t end) {
  Graph& g = graph_of(x);
  const Tensor& xv = x.value();
  if (xv.rank() > 2 || begin >= end || end > xv.rows()) {
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") invalid for shape " +
                     shape_string(xv.shape()));
  }
  std::size_t cols = xv.cols();
  Tensor out(matrix_shape(end - begin, cols));
  std::copy_n(xv.data() + begin * cols, (end - begin) * cols, out.data());
  std::size_t xid = x.id();
  std::size_t offset = begin * cols;
  return g.record("slice_rows", std::move(out), {xid},
                  [xid, offset](Graph& g, const Graph::Node& self) {
                    if (Tensor* gx = g.grad_of(xid)) {
                      for (std::size_t k = 0; k < self.grad.size(); ++k) {
                        (*gx)[offset + k] += self.grad[k];
                      }
                    }
                  });
}

Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  Graph& g = graph_of(x);
  const Tensor& xv = x.value();
  if (xv.rank() > 2 || begin >= end || end > xv.cols()) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") invalid for shape " +
                     shape_string(xv.shape()));
  }
  std::size_t rows = xv.rows(), cols = xv.cols(), width = end - begin;
  Tensor out(matrix_shape(rows, width));
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(xv.data() + r * cols + begin, width, out.data() + r * width);
  }
  std::size_t xid = x.id();
  return g.record("slice_cols", std::move(out), {xid},
                  [xid, rows, cols, width, begin](Graph& g, const Graph::Node& self) {
                    if (Tensor* gx = g.grad_of(xid)) {
                      for (std::size_t r = 0; r < rows; ++r) {
                        for (std::size_t c = 0; c < width; ++c) {
                          (*gx)[r * cols + begin + c] += self.grad[r * width + c];
                        }
                      }
                    }
                  });
}

Var gather_rows(Var x, std::span<const std::size_t> rows) {
  Graph& g = graph_of(x);
  const Tensor& xv = x.value();
  if (xv.rank() > 2 || rows.empty()) {
    throw ShapeError("gather_rows: need a matrix and at least one row, got " +
                     shape_string(xv.shape()));
  }
  std::size_t cols = xv.cols();
  std::vector<std::size_t> index(rows.begin(), rows.end());
  Tensor out(matrix_shape(index.size(), cols));
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] >= xv.rows()) {
      throw ShapeError("gather_rows: row " + std::to_string(index[r]) +
                       " out of range for shape " + shape_string(xv.shape()));
    }
    std::copy_n(xv.data() + index[r] * cols, cols, out.data() + r * cols);
  }
  std::size_t xid = x.id();
  return g.record("gather_rows", std::move(out), {xid},
                  [xid, index, cols](Graph& g, const Graph::Node& self) {
                    if (Tensor* gx = g.grad_of(xid)) {
                      for (std::size_t r = 0; r < index.size(); ++r) {
                        for (std::size_t c = 0; c < cols; ++c) {
                          (*gx)[index[r] * cols + c] += self.grad[r * cols + c];
                        }
                      }
                    }
                  });
}

Var transpose(Var x) {
  Graph& g = graph_of(x);
  const Tensor& xv = x.value();
  if (xv.rank() > 2) throw ShapeError("transpose: rank > 2 shape " + shape_string(xv.shape()));
  std::size_t rows = xv.rows(), cols = xv.cols();
  Tensor out(matrix_shape(cols, rows));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = xv[r * cols + c];
  }
  std::size_t xid = x.id();
  return g.record("transpose", std::move(out), {xid},
                  [xid, rows, cols](Graph& g, const Graph::Node& self) {
                    if (Tensor* gx = g.grad_of(xid)) {
                      for (std::size_t r = 0; r < rows; ++r) {
                        for (std::size_t c = 0; c < cols; ++c) {
                          (*gx)[r * cols + c] += self.grad[c * rows + r];
                        }
                      }
                    }
                  });
}

Var repeat_rows(Var row, std::size_t count) {
  Graph& g = graph_of(row);
  const Tensor& rv = row.value();
  if (rv.rows() != 1 || count == 0) {
    throw ShapeError("repeat_rows: need a single row, got " + shape_string(rv.shape()));
  }
  std::size_t cols = rv.cols();
  Tensor out(matrix_shape(count, cols));
  for (std::size_t r = 0; r < count; ++r) std::copy_n(rv.data(), cols, out.data() + r * cols);
  std::size_t rid = row.id();
  return g.record("repeat_rows", std::move(out), {rid},
                  [rid, count, cols](Graph& g, const Graph::Node& self) {
                    if (Tensor* gr = g.grad_of(rid)) {
                      for (std::size_t r = 0; r < count; ++r) {
                        for (std::size_t c = 0; c < cols; ++c) {
                          (*gr)[c] += self.grad[r * cols + c];
                        }
                      }
                    }
                  });
}

namespace {

Var softmax_impl(const char* op, Var x, std::vector<std::uint8_t> mask) {
  Graph& g = graph_of(x);
  const Tensor& xv = x.value();
  if (xv.rank() > 2) throw ShapeError(std::string(op) + ": rank > 2 shape " + shape_string(xv.shape()));
  std::size_t rows = xv.rows(), cols = xv.cols();
  bool masked = !mask.empty();
  if (masked && mask.size() != xv.size()) {
    throw ShapeError(std::string(op) + ": mask of " + std::to_string(mask.size()) +
                     " entries for shape " + shape_string(xv.shape()));
  }
  Tensor out(matrix_shape(rows, cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* in = xv.data() + r * cols;
    const std::uint8_t* m = masked ? mask.data() + r * cols : nullptr;
    Real hi = -INFINITY;
    for (std::size_t c = 0; c < cols; ++c) {
      if (!m || m[c]) hi = std::max(hi, in[c]);
    }
    if (hi == -INFINITY) throw ContractError(std::string(op) + ": row " + std::to_string(r) + " fully masked");
    Real total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      Real e = (!m || m[c]) ? std::exp(in[c] - hi) : 0.0;
      out[r * cols + c] = e;
      total += e;
    }
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] /= total;
  }
  std::size_t xid = x.id();
  return g.record(op, std::move(out), {xid},
                  [xid, rows, cols](Graph& g, const Graph::Node& self) {
                    Tensor* gx = g.grad_of(xid);
                    if (!gx) return;
                    for (std::size_t r = 0; r < rows; ++r) {
                      const Real* y = self.value.data() + r * cols;
                      const Real* dy = self.grad.data() + r * cols;
                      Real dot = 0.0;
                      for (std::size_t c = 0; c < cols; ++c) dot += y[c] * dy[c];
                      for (std::size_t c = 0; c < cols; ++c) {
                        (*gx)[r * cols + c] += y[c] * (dy[c] - dot);
                      }
                    }
                  });
}

}  // namespace

Var softmax_rows(Var x) { return softmax_impl("softmax_rows", x, {}); }

Var masked_softmax_rows(Var x, std::vector<std::uint8_t> mask) {
  if (mask.empty()) throw ShapeError("masked_softmax_rows: empty mask");
  return softmax_impl("masked_softmax_rows", x, std::move(mask));
}

Var dropout(Var x, Real rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ContractError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (rate == 0.0) return x;
  Graph& g = graph_of(x);
  const Tensor& xv = x.value();
  Real keep = 1.0 / (1.0 - rate);
  std::vector<Real> mask(xv.size());
  Tensor out(xv.shape());
  for (std::size_t k = 0; k < xv.size(); ++k) {
    mask[k] = rng.uniform() < rate ? 0.0 : keep;
    out[k] = xv[k] * mask[k];
  }
  std::size_t xid = x.id();
  return g.record("dropout", std::move(out), {xid},
                  [xid, mask = std::move(mask)](Graph& g, const Graph::Node& self) {
                    if (Tensor* gx = g.grad_of(xid)) {
                      for (std::size_t k = 0; k < mask.size(); ++k) {
                        (*gx)[k] += self.grad[k] * mask[k];
                      }
                    }
                  });
}

Var sum(Var x) {
  Graph& g = graph_of(x);
  Real total = 0.0;
  for (Real v : x.value().values()) total += v;
  std::size_t xid = x.id();
  return g.record("sum", Tensor::scalar(total), {xid},
                  [xid](Graph& g, const Graph::Node& self) {
                    if (Tensor* gx = g.grad_of(xid)) {
                      for (auto& v : gx->values()) v += self.grad[0];
                    }
                  });
}

Var mean(Var x) {
  Graph& g = graph_of(x);
  Real total = 0.0;
  for (Real v : x.value().values()) total += v;
  Real n = static_cast<Real>(x.value().size());
  std::size_t xid = x.id();
  return g.record("mean", Tensor::scalar(total / n), {xid},
                  [xid, n](Graph& g, const Graph::Node& self) {
                    if (Tensor* gx = g.grad_of(xid)) {
                      for (auto& v : gx->values()) v += self.grad[0] / n;
                    }
                  });
}

Var bilinear(Var left, Var weight, Var right, std::span<const Span> pairs) {
  Graph& g = graph_of(left, weight);
  graph_of(left, right);
  const Tensor& lv = left.value();
  const Tensor& wv = weight.value();
  const Tensor& rv = right.value();
  if (wv.rank() != 3 || lv.rank() > 2 || rv.rank() > 2) {
    throw ShapeError("bilinear: expected matrix operands and a rank-3 weight, got " +
                     shape_string(lv.shape()) + ", " + shape_string(wv.shape()) + ", " +
                     shape_string(rv.shape()));
  }
  std::size_t a = wv.shape()[0], k = wv.shape()[1], b = wv.shape()[2];
  if (lv.cols() != a) shape_mismatch("bilinear", lv, wv);
  if (rv.cols() != b) shape_mismatch("bilinear", wv, rv);
  if (pairs.empty()) throw ShapeError("bilinear: no index pairs");
  std::size_t n_left = lv.rows();
  for (const Span& p : pairs) {
    if (p.start >= n_left || p.end >= rv.rows()) {
      throw ShapeError("bilinear: pair (" + std::to_string(p.start) + ", " +
                       std::to_string(p.end) + ") out of range for " +
                       shape_string(lv.shape()) + " and " + shape_string(rv.shape()));
    }
  }
  // projected[i, k*b + c] = sum_a left[i, a] * weight[a, k, c]
  std::vector<Real> projected(n_left * k * b, 0.0);
  gemm_nn(lv.data(), wv.data(), projected.data(), n_left, a, k * b);
  std::vector<Span> index(pairs.begin(), pairs.end());
  Tensor out(matrix_shape(index.size(), k));
  for (std::size_t s = 0; s < index.size(); ++s) {
    const Real* p = projected.data() + index[s].start * k * b;
    const Real* r = rv.data() + index[s].end * b;
    for (std::size_t q = 0; q < k; ++q) {
      Real acc = 0.0;
      for (std::size_t c = 0; c < b; ++c) acc += p[q * b + c] * r[c];
      out[s * k + q] = acc;
    }
  }
  std::size_t lid = left.id(), wid = weight.id(), rid = right.id();
  return g.record(
      "bilinear", std::move(out), {lid, wid, rid},
      [lid, wid, rid, a, k, b, n_left, index = std::move(index),
       projected = std::move(projected)](Graph& g, const Graph::Node& self) {
        const Tensor& lv = g.node(lid).value;
        const Tensor& wv = g.node(wid).value;
        const Tensor& rv = g.node(rid).value;
        Tensor* gl = g.grad_of(lid);
        Tensor* gw = g.grad_of(wid);
        Tensor* gr = g.grad_of(rid);
        std::vector<Real> d_projected(n_left * k * b, 0.0);
        for (std::size_t s = 0; s < index.size(); ++s) {
          const Real* r = rv.data() + index[s].end * b;
          const Real* p = projected.data() + index[s].start * k * b;
          Real* dp = d_projected.data() + index[s].start * k * b;
          for (std::size_t q = 0; q < k; ++q) {
            Real d = self.grad[s * k + q];
            if (d == 0.0) continue;
            for (std::size_t c = 0; c < b; ++c) {
              dp[q * b + c] += d * r[c];
              if (gr) (*gr)[index[s].end * b + c] += d * p[q * b + c];
            }
          }
        }
        if (gl) gemm_nt(d_projected.data(), wv.data(), gl->data(), n_left, k * b, a);
        if (gw) gemm_tn(lv.data(), d_projected.data(), gw->data(), n_left, a, k * b);
      });
}

Var span_max_pool(Var h, std::span<const Span> spans) {
  Graph& g = graph_of(h);
  const Tensor& hv = h.value();
  if (hv.rank() > 2 || spans.empty()) throw ShapeError("span_max_pool: bad operands " + shape_string(hv.shape()));
  std::size_t cols = hv.cols();
  Tensor out(matrix_shape(spans.size(), cols));
  std::vector<std::size_t> argmax(spans.size() * cols);
  for (std::size_t s = 0; s < spans.size(); ++s) {
    if (spans[s].start > spans[s].end || spans[s].end >= hv.rows()) {
      throw ShapeError("span_max_pool: span out of range for " + shape_string(hv.shape()));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      std::size_t best = spans[s].start;
      for (std::size_t t = spans[s].start + 1; t <= spans[s].end; ++t) {
        if (hv[t * cols + c] > hv[best * cols + c]) best = t;
      }
      argmax[s * cols + c] = best;
      out[s * cols + c] = hv[best * cols + c];
    }
  }
  std::size_t hid = h.id();
  return g.record("span_max_pool", std::move(out), {hid},
                  [hid, cols, argmax = std::move(argmax)](Graph& g, const Graph::Node& self) {
                    if (Tensor* gh = g.grad_of(hid)) {
                      for (std::size_t k = 0; k < argmax.size(); ++k) {
                        (*gh)[argmax[k] * cols + k % cols] += self.grad[k];
                      }
                    }
                  });
}

Var softmax_cross_entropy(Var logits, std::span<const std::size_t> targets) {
  Graph& g = graph_of(logits);
  const Tensor& lv = logits.value();
  std::size_t rows = lv.rows(), cols = lv.cols();
  if (lv.rank() > 2 || targets.size() != rows) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(targets.size()) +
                     " targets for logits " + shape_string(lv.shape()));
  }
  std::vector<std::size_t> target(targets.begin(), targets.end());
  std::vector<Real> probs(rows * cols);
  Real total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (target[r] >= cols) throw ContractError("softmax_cross_entropy: target class out of range");
    const Real* in = lv.data() + r * cols;
    Real hi = *std::max_element(in, in + cols);
    Real z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) z += std::exp(in[c] - hi);
    Real log_z = hi + std::log(z);
    for (std::size_t c = 0; c < cols; ++c) probs[r * cols + c] = std::exp(in[c] - log_z);
    total += log_z - in[target[r]];
  }
  Real n = static_cast<Real>(rows);
  std::size_t lid = logits.id();
  return g.record("softmax_cross_entropy", Tensor::scalar(total / n), {lid},
                  [lid, cols, n, target = std::move(target),
                   probs = std::move(probs)](Graph& g, const Graph::Node& self) {
                    Tensor* gl = g.grad_of(lid);
                    if (!gl) return;
                    Real d = self.grad[0] / n;
                    for (std::size_t r = 0; r < target.size(); ++r) {
                      for (std::size_t c = 0; c < cols; ++c) {
                        Real indicator = c == target[r] ? 1.0 : 0.0;
                        (*gl)[r * cols + c] += d * (probs[r * cols + c] - indicator);
                      }
                    }
                  });
}

Var binary_cross_entropy(Var probs, std::span<const std::uint8_t> targets) {
  Graph& g = graph_of(probs);
  const Tensor& pv = probs.value();
  if (pv.size() != targets.size() || targets.empty()) {
    throw ShapeError("binary_cross_entropy: " + std::to_string(targets.size()) +
                     " targets for probabilities " + shape_string(pv.shape()));
  }
  std::vector<std::uint8_t> target(targets.begin(), targets.end());
  Real total = 0.0;
  for (std::size_t k = 0; k < pv.size(); ++k) {
    Real p = std::clamp(pv[k], kProbClamp, 1.0 - kProbClamp);
    total -= target[k] ? std::log(p) : std::log(1.0 - p);
  }
  Real n = static_cast<Real>(pv.size());
  std::size_t pid = probs.id();
  return g.record("binary_cross_entropy", Tensor::scalar(total / n), {pid},
                  [pid, n, target = std::move(target)](Graph& g, const Graph::Node& self) {
                    Tensor* gp = g.grad_of(pid);
                    if (!gp) return;
                    const Tensor& pv = g.node(pid).value;
                    Real d = self.grad[0] / n;
                    for (std::size_t k = 0; k < target.size(); ++k) {
                      Real p = pv[k];
                      if (p < kProbClamp || p > 1.0 - kProbClamp) continue;
                      (*gp)[k] += target[k] ? -d / p : d / (1.0 - p);
                    }
                  });
}

}  // namespace ricon::ops
