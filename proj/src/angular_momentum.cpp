#include "rydgate/angular_momentum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace rydgate {

namespace {

constexpr int kMaxFactorial = 64;

const std::array<long double, kMaxFactorial + 1>& factorials() {
  static const auto table = [] {
    std::array<long double, kMaxFactorial + 1> f{};
    f[0] = 1.0L;
    for (int i = 1; i <= kMaxFactorial; ++i) f[i] = f[i - 1] * i;
    return f;
  }();
  return table;
}

// n! where n is given as twice its value; n must be a non-negative integer.
long double fact2(int twice_n) {
  if (twice_n < 0 || twice_n % 2 != 0 || twice_n / 2 > kMaxFactorial)
    throw std::logic_error("factorial argument out of range");
  return factorials()[twice_n / 2];
}

int sign_of_twice(int twice_exponent) { return (twice_exponent / 2) % 2 == 0 ? 1 : -1; }

// Triangle coefficient Delta(abc) using twice-values.
long double delta(int a, int b, int c) {
  return std::sqrt(fact2(a + b - c) * fact2(a - b + c) * fact2(-a + b + c) / fact2(a + b + c + 2));
}

}  // namespace

std::string HalfInt::str() const {
  if (twice_ % 2 == 0) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

void require_valid_pair(HalfInt j, HalfInt m) {
  if (j.twice() < 0) throw std::invalid_argument("negative angular momentum " + j.str());
  if (std::abs(m.twice()) > j.twice() || (j.twice() - m.twice()) % 2 != 0)
    throw std::invalid_argument("invalid projection " + m.str() + " for j=" + j.str());
}

bool triangle(HalfInt a, HalfInt b, HalfInt c) {
  const int ta = a.twice(), tb = b.twice(), tc = c.twice();
  if (ta < 0 || tb < 0 || tc < 0) return false;
  if ((ta + tb + tc) % 2 != 0) return false;
  return tc <= ta + tb && tc >= std::abs(ta - tb);
}

double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M) {
  require_valid_pair(j1, m1);
  require_valid_pair(j2, m2);
  require_valid_pair(J, M);
  if (m1 + m2 != M || !triangle(j1, j2, J)) return 0.0;

  const int a = j1.twice(), b = j2.twice(), c = J.twice();
  const int ma = m1.twice(), mb = m2.twice(), mc = M.twice();

  const long double pre = std::sqrt((c + 1) * fact2(c + a - b) * fact2(c - a + b) * fact2(a + b - c) /
                                    fact2(a + b + c + 2)) *
                          std::sqrt(fact2(c + mc) * fact2(c - mc) * fact2(a - ma) * fact2(a + ma) *
                                    fact2(b - mb) * fact2(b + mb));

  long double sum = 0.0L;
  for (int k = 0;; k += 2) {
    const int d1 = a + b - c - k;
    const int d2 = a - ma - k;
    const int d3 = b + mb - k;
    if (d1 < 0 || d2 < 0 || d3 < 0) break;
    const int d4 = c - b + ma + k;
    const int d5 = c - a - mb + k;
    if (d4 < 0 || d5 < 0) continue;
    sum += sign_of_twice(k) / (fact2(k) * fact2(d1) * fact2(d2) * fact2(d3) * fact2(d4) * fact2(d5));
  }
  return static_cast<double>(pre * sum);
}

double wigner_6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6) {
  for (HalfInt j : {j1, j2, j3, j4, j5, j6})
    if (j.twice() < 0) throw std::invalid_argument("negative angular momentum " + j.str());
  if (!triangle(j1, j2, j3) || !triangle(j1, j5, j6) || !triangle(j4, j2, j6) || !triangle(j4, j5, j3))
    return 0.0;

  const int a = j1.twice(), b = j2.twice(), c = j3.twice();
  const int d = j4.twice(), e = j5.twice(), f = j6.twice();
  const long double pre = delta(a, b, c) * delta(a, e, f) * delta(d, b, f) * delta(d, e, c);

  const int lo = std::max({a + b + c, a + e + f, d + b + f, d + e + c});
  const int hi = std::min({a + b + d + e, a + c + d + f, b + c + e + f});
  long double sum = 0.0L;
  for (int t = lo; t <= hi; t += 2) {
    sum += sign_of_twice(t) * fact2(t + 2) /
           (fact2(t - a - b - c) * fact2(t - a - e - f) * fact2(t - d - b - f) * fact2(t - d - e - c) *
            fact2(a + b + d + e - t) * fact2(a + c + d + f - t) * fact2(b + c + e + f - t));
  }
  return static_cast<double>(pre * sum);
}

double pumping_tensor(HyperfineSublevel ground_prime, HyperfineSublevel ground,
                      HyperfineSublevel excited_prime, HyperfineSublevel excited,
                      const FineStructure& fs) {
  require_valid_pair(ground_prime.F, ground_prime.M);
  require_valid_pair(ground.F, ground.M);
  require_valid_pair(excited_prime.F, excited_prime.M);
  require_valid_pair(excited.F, excited.M);

  const HalfInt one = HalfInt::integer(1);
  const HalfInt q = excited.M - ground.M;
  if (excited_prime.M - ground_prime.M != q || std::abs(q.twice()) > 2) return 0.0;

  const double cg = clebsch_gordan(ground_prime.F, ground_prime.M, one, q, excited_prime.F, excited_prime.M) *
                    clebsch_gordan(ground.F, ground.M, one, q, excited.F, excited.M);
  if (cg == 0.0) return 0.0;

  const int phase = ((ground.F.twice() - ground_prime.F.twice()) / 2) % 2 == 0 ? 1 : -1;
  const double weight = std::sqrt((ground_prime.F.twice() + 1.0) * (ground.F.twice() + 1.0)) *
                        (fs.J.twice() + 1.0);
  return cg * phase * weight * wigner_6j(fs.S, fs.I, ground_prime.F, excited_prime.F, one, fs.J) *
         wigner_6j(fs.S, fs.I, ground.F, excited.F, one, fs.J);
}

}  // namespace rydgate
