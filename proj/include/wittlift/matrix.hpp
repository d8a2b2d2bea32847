#pragma once

// Small dense matrices over WittElem and over residue fields.

#include "wittlift/witt.hpp"

#include <vector>

namespace wittlift {

struct WittMatrix {
  Ctx ctx;
  int rows = 0, cols = 0;
  std::vector<WittElem> a; // row-major

  WittMatrix() = default;
  WittMatrix(const Ctx& cx, int r, int c) : ctx(cx), rows(r), cols(c) {
    a.assign((size_t)r * c, WittElem::zero(ctx));
  }
  WittElem& at(int r, int c) { return a[(size_t)r * cols + c]; }
  const WittElem& at(int r, int c) const { return a[(size_t)r * cols + c]; }

  static WittMatrix identity(const Ctx& cx, int n) {
    WittMatrix m(cx, n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = WittElem::one(cx);
    return m;
  }

  WittMatrix operator*(const WittMatrix& o) const {
    WittMatrix out(ctx, rows, o.cols);
    for (int i = 0; i < rows; ++i)
      for (int k = 0; k < cols; ++k) {
        const WittElem& v = at(i, k);
        if (v.c.empty()) continue;
        for (int j = 0; j < o.cols; ++j) out.at(i, j) = out.at(i, j) + v * o.at(k, j);
      }
    return out;
  }
  WittMatrix operator+(const WittMatrix& o) const {
    WittMatrix out(ctx, rows, cols);
    for (size_t i = 0; i < a.size(); ++i) out.a[i] = a[i] + o.a[i];
    return out;
  }
  WittMatrix operator-(const WittMatrix& o) const {
    WittMatrix out(ctx, rows, cols);
    for (size_t i = 0; i < a.size(); ++i) out.a[i] = a[i] - o.a[i];
    return out;
  }
  WittMatrix scaled(const WittElem& s) const {
    WittMatrix out(ctx, rows, cols);
    for (size_t i = 0; i < a.size(); ++i) out.a[i] = a[i] * s;
    return out;
  }
  WittMatrix frobenius(int k = 1) const {
    WittMatrix out(ctx, rows, cols);
    for (size_t i = 0; i < a.size(); ++i) out.a[i] = a[i].frobenius_pow(k);
    return out;
  }
  std::vector<WittElem> apply(const std::vector<WittElem>& v) const {
    std::vector<WittElem> out((size_t)rows, WittElem::zero(ctx));
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) out[i] = out[i] + at(i, j) * v[j];
    return out;
  }
  std::vector<WittElem> col(int j) const {
    std::vector<WittElem> out;
    out.reserve(rows);
    for (int i = 0; i < rows; ++i) out.push_back(at(i, j));
    return out;
  }
  void set_col(int j, const std::vector<WittElem>& v) {
    for (int i = 0; i < rows; ++i) at(i, j) = v[i];
  }
  bool eq(const WittMatrix& o, int at_prec = -1) const {
    if (rows != o.rows || cols != o.cols) return false;
    for (size_t i = 0; i < a.size(); ++i)
      if (!a[i].eq(o.a[i], at_prec)) return false;
    return true;
  }
  int min_prec() const {
    int g = ctx->N;
    for (const auto& e : a) g = std::min(g, e.prec);
    return g;
  }
  WittMatrix embedded(const Ctx& big) const {
    WittMatrix out(big, rows, cols);
    for (size_t i = 0; i < a.size(); ++i) out.a[i] = embed(a[i], big);
    return out;
  }
};

// residue matrix over F_{p^m}, entries in the ambient residue field
struct ResidueMatrix {
  Ctx ctx;
  int rows = 0, cols = 0;
  std::vector<ResidueElem> a;

  ResidueMatrix() = default;
  ResidueMatrix(const Ctx& cx, int r, int c) : ctx(cx), rows(r), cols(c) {
    a.assign((size_t)r * c, ResidueElem::zero(ctx));
  }
  ResidueElem& at(int r, int c) { return a[(size_t)r * cols + c]; }
  const ResidueElem& at(int r, int c) const { return a[(size_t)r * cols + c]; }

  // column span comparison via column echelon form
  ResidueMatrix column_echelon() const {
    ResidueMatrix m = *this;
    int lead = 0;
    for (int r = 0; r < rows && lead < cols; ++r) {
      int pc = -1;
      for (int c = lead; c < cols; ++c)
        if (!m.at(r, c).is_zero()) { pc = c; break; }
      if (pc < 0) continue;
      for (int i = 0; i < rows; ++i) std::swap(m.at(i, lead), m.at(i, pc));
      ResidueElem inv = m.at(r, lead).inv();
      for (int i = 0; i < rows; ++i) m.at(i, lead) = m.at(i, lead) * inv;
      for (int c = 0; c < cols; ++c) {
        if (c == lead || m.at(r, c).is_zero()) continue;
        ResidueElem f = m.at(r, c);
        for (int i = 0; i < rows; ++i) m.at(i, c) = m.at(i, c) - m.at(i, lead) * f;
      }
      ++lead;
    }
    return m;
  }
  int rank() const {
    ResidueMatrix e = column_echelon();
    int r = 0;
    for (int c = 0; c < cols; ++c) {
      bool nz = false;
      for (int i = 0; i < rows; ++i)
        if (!e.at(i, c).is_zero()) nz = true;
      if (nz) ++r;
    }
    return r;
  }
  bool same_column_span(const ResidueMatrix& o) const {
    if (rows != o.rows) return false;
    ResidueMatrix e1 = column_echelon();
    ResidueMatrix e2 = o.column_echelon();
    int r1 = rank(), r2 = o.rank();
    if (r1 != r2) return false;
    // echelon forms with normalized pivots are canonical up to zero columns
    for (int c = 0; c < std::min(e1.cols, e2.cols); ++c) {
      for (int i = 0; i < rows; ++i) {
        bool z1 = c < e1.cols ? e1.at(i, c).is_zero() : true;
        bool z2 = c < e2.cols ? e2.at(i, c).is_zero() : true;
        if (z1 != z2) return false;
        if (!z1 && !(e1.at(i, c) == e2.at(i, c))) return false;
      }
    }
    return true;
  }
};

inline ResidueMatrix reduce_mod_p(const WittMatrix& m) {
  ResidueMatrix out(m.ctx, m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) out.at(i, j) = m.at(i, j).reduce_mod_p();
  return out;
}

} // namespace wittlift
