#pragma once

// Cofactor-expansion Hodge dual on raw column pointers. Hardcoded for
// d <= 5; larger d falls back to LU determinants of the minors.

#include <array>

#include <Eigen/Dense>

namespace spheresync::detail {

inline double det2(double a, double b, double c, double d) { return a * d - b * c; }

inline double det3(const double* r0, const double* r1, const double* r2) {
  return r0[0] * (r1[1] * r2[2] - r1[2] * r2[1]) - r0[1] * (r1[0] * r2[2] - r1[2] * r2[0]) +
         r0[2] * (r1[0] * r2[1] - r1[1] * r2[0]);
}

inline double det4(const double* r0, const double* r1, const double* r2, const double* r3) {
  // Laplace expansion along the first two rows.
  const double s0 = det2(r0[0], r0[1], r1[0], r1[1]);
  const double s1 = det2(r0[0], r0[2], r1[0], r1[2]);
  const double s2 = det2(r0[0], r0[3], r1[0], r1[3]);
  const double s3 = det2(r0[1], r0[2], r1[1], r1[2]);
  const double s4 = det2(r0[1], r0[3], r1[1], r1[3]);
  const double s5 = det2(r0[2], r0[3], r1[2], r1[3]);
  const double c5 = det2(r2[0], r2[1], r3[0], r3[1]);
  const double c4 = det2(r2[0], r2[2], r3[0], r3[2]);
  const double c3 = det2(r2[0], r2[3], r3[0], r3[3]);
  const double c2 = det2(r2[1], r2[2], r3[1], r3[2]);
  const double c1 = det2(r2[1], r2[3], r3[1], r3[3]);
  const double c0 = det2(r2[2], r2[3], r3[2], r3[3]);
  return s0 * c0 - s1 * c1 + s2 * c2 + s3 * c3 - s4 * c4 + s5 * c5;
}

/// out[a] = det(e_a, cols[0], ..., cols[d-2]).
inline void hodge_dual_columns(int d, const double* const* cols, double* out) {
  switch (d) {
    case 2:
      out[0] = cols[0][1];
      out[1] = -cols[0][0];
      return;
    case 3: {
      const double* x = cols[0];
      const double* y = cols[1];
      out[0] = x[1] * y[2] - x[2] * y[1];
      out[1] = x[2] * y[0] - x[0] * y[2];
      out[2] = x[0] * y[1] - x[1] * y[0];
      return;
    }
    case 4: {
      // Rows of the 4x3 input matrix; minor a drops row a.
      std::array<std::array<double, 3>, 4> rows{};
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 3; ++c) rows[r][c] = cols[c][r];
      out[0] = det3(rows[1].data(), rows[2].data(), rows[3].data());
      out[1] = -det3(rows[0].data(), rows[2].data(), rows[3].data());
      out[2] = det3(rows[0].data(), rows[1].data(), rows[3].data());
      out[3] = -det3(rows[0].data(), rows[1].data(), rows[2].data());
      return;
    }
    case 5: {
      std::array<std::array<double, 4>, 5> rows{};
      for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 4; ++c) rows[r][c] = cols[c][r];
      out[0] = det4(rows[1].data(), rows[2].data(), rows[3].data(), rows[4].data());
      out[1] = -det4(rows[0].data(), rows[2].data(), rows[3].data(), rows[4].data());
      out[2] = det4(rows[0].data(), rows[1].data(), rows[3].data(), rows[4].data());
      out[3] = -det4(rows[0].data(), rows[1].data(), rows[2].data(), rows[4].data());
      out[4] = det4(rows[0].data(), rows[1].data(), rows[2].data(), rows[3].data());
      return;
    }
    default: {
      Eigen::MatrixXd minor(d - 1, d - 1);
      for (int a = 0; a < d; ++a) {
        for (int r = 0, mr = 0; r < d; ++r) {
          if (r == a) continue;
          for (int c = 0; c < d - 1; ++c) minor(mr, c) = cols[c][r];
          ++mr;
        }
        const double sign = (a % 2 == 0) ? 1.0 : -1.0;
        out[a] = sign * minor.partialPivLu().determinant();
      }
      return;
    }
  }
}

/// det of the d x d matrix with the given columns.
inline double determinant_columns(int d, const double* const* cols) {
  switch (d) {
    case 2:
      return det2(cols[0][0], cols[1][0], cols[0][1], cols[1][1]);
    case 3: {
      std::array<double, 3> v{};
      hodge_dual_columns(3, cols + 1, v.data());
      return cols[0][0] * v[0] + cols[0][1] * v[1] + cols[0][2] * v[2];
    }
    default: {
      std::array<double, 8> small{};
      Eigen::VectorXd big;
      double* v = small.data();
      if (d > 8) {
        big.resize(d);
        v = big.data();
      }
      hodge_dual_columns(d, cols + 1, v);
      double s = 0.0;
      for (int a = 0; a < d; ++a) s += cols[0][a] * v[a];
      return s;
    }
  }
}

}  // namespace spheresync::detail
