#pragma once

// Third-order Taylor jets in two variables. Just enough forward-mode
// differentiation to get a stream function's derivatives up to order three.

#include "fsislip/common.hpp"

namespace fsislip {

struct Jet {
  double v = 0.0;
  Vec2 d1 = Vec2::Zero();
  Mat2 d2 = Mat2::Zero();
  Tensor3 d3 = zero_tensor3(); ///< d3[i](j, k) = d^3 / dy_i dy_j dy_k

  static Jet constant(double c)
  {
    Jet j;
    j.v = c;
    return j;
  }
};

inline Jet operator+(const Jet& a, const Jet& b)
{
  Jet r;
  r.v = a.v + b.v;
  r.d1 = a.d1 + b.d1;
  r.d2 = a.d2 + b.d2;
  for (int i = 0; i < 2; ++i)
    r.d3[i] = a.d3[i] + b.d3[i];
  return r;
}

inline Jet operator*(double s, const Jet& a)
{
  Jet r;
  r.v = s * a.v;
  r.d1 = s * a.d1;
  r.d2 = s * a.d2;
  for (int i = 0; i < 2; ++i)
    r.d3[i] = s * a.d3[i];
  return r;
}

inline Jet operator*(const Jet& a, const Jet& b)
{
  Jet r;
  r.v = a.v * b.v;
  r.d1 = a.d1 * b.v + a.v * b.d1;
  r.d2 = a.d2 * b.v + a.d1 * b.d1.transpose() + b.d1 * a.d1.transpose() + a.v * b.d2;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        r.d3[i](j, k) = a.d3[i](j, k) * b.v + a.d2(i, j) * b.d1(k) + a.d2(i, k) * b.d1(j) +
                        a.d2(j, k) * b.d1(i) + a.d1(i) * b.d2(j, k) + a.d1(j) * b.d2(i, k) +
                        a.d1(k) * b.d2(i, j) + a.v * b.d3[i](j, k);
  return r;
}

/// f(u) given f and its first three derivatives at u.v (Faa di Bruno, order 3).
inline Jet compose(const Jet& u, double f0, double f1, double f2, double f3)
{
  Jet r;
  r.v = f0;
  r.d1 = f1 * u.d1;
  r.d2 = f2 * u.d1 * u.d1.transpose() + f1 * u.d2;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        r.d3[i](j, k) = f3 * u.d1(i) * u.d1(j) * u.d1(k) +
                        f2 * (u.d2(i, j) * u.d1(k) + u.d2(i, k) * u.d1(j) + u.d2(j, k) * u.d1(i)) +
                        f1 * u.d3[i](j, k);
  return r;
}

} // namespace fsislip
