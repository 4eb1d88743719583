#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <numbers>

#include <fmt/format.h>

#include "spheresync/analysis.hpp"

namespace spheresync {

namespace {

using cplx = std::complex<double>;
using std::numbers::pi;

int signature(std::initializer_list<int> idx) {
  const int* p = idx.begin();
  const auto n = idx.size();
  int inversions = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (p[a] == p[b]) return 0;
      if (p[a] > p[b]) ++inversions;
    }
  }
  return inversions % 2 == 0 ? 1 : -1;
}

double cot(double x) { return std::cos(x) / std::sin(x); }

cplx zeta_pow(int n, double e) { return std::polar(1.0, pi * e / n); }

class Recorder {
 public:
  explicit Recorder(OracleTable& t) : table_(t) {}

  void add(const std::string& name, const std::string& label, double got, double want) {
    push(name, label, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }
  void add(const std::string& name, const std::string& label, cplx got, cplx want) {
    push(name, label, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }

 private:
  void push(const std::string& name, const std::string& label, double residual) {
    table_.checks.push_back({name, label, residual, residual < table_.tolerance});
  }
  OracleTable& table_;
};

void geometric_sums(Recorder& rec) {
  for (int n = 3; n <= 64; ++n) {
    for (int m = 1; m <= 6; ++m) {
      double c = 0.0;
      double s = 0.0;
      for (int j = 1; j <= n; ++j) {
        c += std::cos(m * pi * j / n);
        s += std::sin(m * pi * j / n);
      }
      const auto label = fmt::format("N={} m={}", n, m);
      if (m % (2 * n) == 0) continue;
      if (m % 2 == 0) {
        rec.add("cos_sum_even_m", label, c, 0.0);
        rec.add("sin_sum_even_m", label, s, 0.0);
      } else {
        rec.add("cos_sum_odd_m", label, c, -1.0);
        rec.add("sin_sum_odd_m", label, s, cot(m * pi / (2.0 * n)));
      }
    }
    for (double a : {0.3, 1.0, 1.7, 2.5, -1.25}) {
      double c = 0.0;
      double s = 0.0;
      double dbl = 0.0;
      for (int j = 1; j <= n; ++j) {
        c += std::cos(a * pi * j / n);
        s += std::sin(a * pi * j / n);
        for (int i = 1; i <= n; ++i) dbl += std::cos(a * pi * (j - i) / n);
      }
      const auto label = fmt::format("N={} alpha={}", n, a);
      const double half = a * pi / (2.0 * n);
      rec.add("cos_sum_general", label, c, 0.5 * (-1.0 + std::cos(a * pi) + cot(half) * std::sin(a * pi)));
      rec.add("sin_sum_general", label, s,
              std::sin(a * pi / 2.0) * std::sin(a * (n + 1) * pi / (2.0 * n)) / std::sin(half));
      const double num = std::sin(pi * a / 2.0);
      const double den = std::sin(half);
      rec.add("double_cos_sum", label, dbl, num * num / (den * den));
    }
  }
}

void pair_signature_sums(Recorder& rec) {
  for (int n = 2; n <= 64; ++n) {
    const cplx want(0.0, cot(pi / (2.0 * n)));
    for (int i = 1; i <= n; ++i) {
      cplx z(0.0, 0.0);
      double c = 0.0;
      for (int j = 1; j <= n; ++j) {
        z += static_cast<double>(signature({i, j})) * zeta_pow(n, j - i);
        c += signature({i, j}) * std::cos((j - i) * pi / n);
      }
      const auto label = fmt::format("N={} i={}", n, i);
      rec.add("splay_geometric", label, z, want);
      rec.add("splay_cosine", label, c, 0.0);
    }
  }
}

void three_index_sums(Recorder& rec) {
  for (int n = 3; n <= 16; ++n) {
    const cplx z2 = zeta_pow(n, 2.0);
    for (int i = 1; i <= n; ++i) {
      double mean_sin = 0.0;
      for (int j = 1; j <= n; ++j) {
        cplx lhs(0.0, 0.0);
        for (int k = 1; k <= n; ++k) {
          const int e = signature({i, j, k});
          lhs += static_cast<double>(e) * zeta_pow(n, -2.0 * k);
          mean_sin += e * std::sin(2.0 * (j - k) * pi / n);
        }
        const cplx rhs = (1.0 + z2) * (zeta_pow(n, -2.0 * i) - zeta_pow(n, -2.0 * j)) / (1.0 - z2);
        rec.add("three_index_geometric", fmt::format("N={} i={} j={}", n, i, j), lhs, rhs);
      }
      rec.add("three_index_sine_mean", fmt::format("N={} i={}", n, i), mean_sin / n, -cot(pi / n));
    }
  }
}

void four_index_sums(Recorder& rec) {
  const int odd[] = {-5, -3, -1, 1, 3, 5};
  for (int n = 4; n <= 10; ++n) {
    for (int a : odd) {
      for (int b : odd) {
        // the identity needs zeta^(a+b) != 1, not just a + b != 0
        if ((a + b) % (2 * n) == 0) continue;
        const cplx za = zeta_pow(n, a);
        const cplx zb = zeta_pow(n, b);
        if (std::abs(1.0 - za) < 1e-12 || std::abs(1.0 - zb) < 1e-12) continue;
        const cplx pref = (1.0 + za) * (1.0 + zb) / ((1.0 - za) * (1.0 - zb));
        for (int i = 1; i <= n; ++i) {
          for (int j = 1; j <= n; ++j) {
            cplx lhs(0.0, 0.0);
            for (int k = 1; k <= n; ++k) {
              for (int l = 1; l <= n; ++l) {
                const int e = signature({i, j, k, l});
                if (e != 0) lhs += static_cast<double>(e) * zeta_pow(n, static_cast<double>(a * k + b * l));
              }
            }
            const cplx rhs =
                pref * (zeta_pow(n, static_cast<double>(a * j + b * i)) - zeta_pow(n, static_cast<double>(a * i + b * j)));
            rec.add("four_index_geometric", fmt::format("N={} a={} b={} i={} j={}", n, a, b, i, j), lhs, rhs);
          }
        }
      }
    }
    const double cc = cot(pi / (2.0 * n)) * cot(3.0 * pi / (2.0 * n));
    for (int i = 1; i <= n; ++i) {
      cplx total(0.0, 0.0);
      double real_part = 0.0;
      for (int j = 1; j <= n; ++j) {
        for (int k = 1; k <= n; ++k) {
          for (int l = 1; l <= n; ++l) {
            const int e = signature({i, j, k, l});
            if (e == 0) continue;
            total += static_cast<double>(e) * zeta_pow(n, 3.0 * j - k - 3.0 * l);
            real_part += e * std::cos((3.0 * j - 3.0 * l - k) * pi / n);
          }
        }
      }
      const auto label = fmt::format("N={} i={}", n, i);
      rec.add("four_index_torus_complex", label, total, -static_cast<double>(n) * (-cc) * zeta_pow(n, -i));
      rec.add("four_index_torus_real", label, real_part, n * cc * std::cos(pi * i / n));
    }
  }
}

void five_index_sum(Recorder& rec) {
  for (int n = 4; n <= 9; ++n) {
    double total = 0.0;
    for (int j = 1; j <= n; ++j) {
      for (int k = 1; k <= n; ++k) {
        for (int l = 1; l <= n; ++l) {
          for (int m = 1; m <= n; ++m) {
            const int e = signature({j, k, l, m});
            if (e != 0) total += e * std::cos((4.0 * j - 2.0 * k - 4.0 * l) * pi / n);
          }
        }
      }
    }
    const double s = std::sin(pi / n);
    rec.add("d5_lambda_cosine_sum", fmt::format("N={}", n), total, 0.5 * n * n * std::cos(2.0 * pi / n) / (s * s));
  }
}

}  // namespace

bool OracleTable::all_passed() const { return failures() == 0; }

std::size_t OracleTable::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const OracleCheck& c) { return !c.passed; }));
}

double OracleTable::worst_residual() const {
  double worst = 0.0;
  for (const auto& c : checks) worst = std::max(worst, c.residual);
  return worst;
}

OracleTable trig_oracles(double tolerance) {
  OracleTable table;
  table.tolerance = tolerance;
  Recorder rec(table);
  geometric_sums(rec);
  pair_signature_sums(rec);
  three_index_sums(rec);
  four_index_sums(rec);
  five_index_sum(rec);
  return table;
}

}  // namespace spheresync
