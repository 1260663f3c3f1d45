#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rydgate/angular_momentum.hpp"

using rydgate::HalfInt;

namespace {

HalfInt tw(int twice) { return HalfInt::from_twice(twice); }

std::vector<int> projections(int twice_j) {
  std::vector<int> out;
  for (int m = -twice_j; m <= twice_j; m += 2) out.push_back(m);
  return out;
}

// Textbook closed forms for coupling with spin 1/2 and spin 1 (Condon-Shortley).
double cg_table(int tj1, int tm1, int tj2, int tm2, int tJ, int tM) {
  if (tm1 + tm2 != tM) return 0.0;
  const double j1 = 0.5 * tj1, M = 0.5 * tM;
  if (tj2 == 1) {
    const bool up = tm2 == 1;
    if (tJ == tj1 + 1) return up ? std::sqrt((j1 + M + 0.5) / (2 * j1 + 1)) : std::sqrt((j1 - M + 0.5) / (2 * j1 + 1));
    if (tJ == tj1 - 1) return up ? -std::sqrt((j1 - M + 0.5) / (2 * j1 + 1)) : std::sqrt((j1 + M + 0.5) / (2 * j1 + 1));
    return 0.0;
  }
  if (tj2 == 2) {
    if (tJ == tj1 + 2) {
      if (tm2 == 2) return std::sqrt((j1 + M) * (j1 + M + 1) / ((2 * j1 + 1) * (2 * j1 + 2)));
      if (tm2 == 0) return std::sqrt((j1 - M + 1) * (j1 + M + 1) / ((2 * j1 + 1) * (j1 + 1)));
      return std::sqrt((j1 - M) * (j1 - M + 1) / ((2 * j1 + 1) * (2 * j1 + 2)));
    }
    if (tJ == tj1) {
      if (tj1 == 0) return 0.0;
      if (tm2 == 2) return -std::sqrt((j1 + M) * (j1 - M + 1) / (2 * j1 * (j1 + 1)));
      if (tm2 == 0) return M / std::sqrt(j1 * (j1 + 1));
      return std::sqrt((j1 - M) * (j1 + M + 1) / (2 * j1 * (j1 + 1)));
    }
    if (tJ == tj1 - 2) {
      if (tm2 == 2) return std::sqrt((j1 - M) * (j1 - M + 1) / (2 * j1 * (2 * j1 + 1)));
      if (tm2 == 0) return -std::sqrt((j1 - M) * (j1 + M) / (j1 * (2 * j1 + 1)));
      return std::sqrt((j1 + M + 1) * (j1 + M) / (2 * j1 * (2 * j1 + 1)));
    }
    return 0.0;
  }
  throw std::logic_error("table only covers j2 = 1/2, 1");
}

// Brute-force Racah sum written independently of the library (plain doubles, tgamma).
double racah_cg(int tj1, int tm1, int tj2, int tm2, int tJ, int tM) {
  if (tm1 + tm2 != tM) return 0.0;
  if (tJ > tj1 + tj2 || tJ < std::abs(tj1 - tj2)) return 0.0;
  auto f = [](int twice) { return std::tgamma(0.5 * twice + 1.0); };
  const double pre = std::sqrt((tJ + 1) * f(tJ + tj1 - tj2) * f(tJ - tj1 + tj2) * f(tj1 + tj2 - tJ) / f(tj1 + tj2 + tJ + 2)) *
                     std::sqrt(f(tJ + tM) * f(tJ - tM) * f(tj1 - tm1) * f(tj1 + tm1) * f(tj2 - tm2) * f(tj2 + tm2));
  double sum = 0.0;
  for (int k = 0; k <= 60; k += 2) {
    const int args[6] = {k, tj1 + tj2 - tJ - k, tj1 - tm1 - k, tj2 + tm2 - k, tJ - tj2 + tm1 + k, tJ - tj1 - tm2 + k};
    bool ok = true;
    double den = 1.0;
    for (int a : args) {
      if (a < 0) ok = false;
      else den *= f(a);
    }
    if (ok) sum += ((k / 2) % 2 == 0 ? 1.0 : -1.0) / den;
  }
  return pre * sum;
}

double three_j(int a, int ma, int b, int mb, int c, int mc) {
  if (ma + mb + mc != 0) return 0.0;
  const int phase_twice = a - b - mc;
  const double phase = ((phase_twice / 2) % 2 == 0) ? 1.0 : -1.0;
  return phase / std::sqrt(c + 1.0) * rydgate::clebsch_gordan(tw(a), tw(ma), tw(b), tw(mb), tw(c), tw(-mc));
}

// 6j symbol as a contraction of four 3j symbols over all projections.
double six_j_oracle(int j1, int j2, int j3, int j4, int j5, int j6) {
  double sum = 0.0;
  for (int m1 : projections(j1))
    for (int m2 : projections(j2))
      for (int m3 : projections(j3))
        for (int m4 : projections(j4))
          for (int m5 : projections(j5))
            for (int m6 : projections(j6)) {
              const int s = (j1 - m1) + (j2 - m2) + (j3 - m3) + (j4 - m4) + (j5 - m5) + (j6 - m6);
              const double phase = ((s / 2) % 2 == 0) ? 1.0 : -1.0;
              const double t = three_j(j1, -m1, j2, -m2, j3, -m3) * three_j(j1, m1, j5, -m5, j6, m6) *
                               three_j(j4, m4, j2, m2, j6, -m6) * three_j(j4, -m4, j5, m5, j3, m3);
              sum += phase * t;
            }
  return sum;
}

}  // namespace

TEST_CASE("trivial couplings") {
  CHECK(rydgate::clebsch_gordan(tw(0), tw(0), tw(0), tw(0), tw(0), tw(0)) == doctest::Approx(1.0));
  CHECK(rydgate::clebsch_gordan(tw(1), tw(1), tw(1), tw(1), tw(2), tw(2)) == doctest::Approx(1.0));
}

TEST_CASE("singlet from two spin-1") {
  const double oracle = racah_cg(2, 2, 2, -2, 0, 0);
  CHECK(oracle == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(rydgate::clebsch_gordan(tw(2), tw(2), tw(2), tw(-2), tw(0), tw(0)) == doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("invalid projection rejected") {
  CHECK_THROWS_AS(rydgate::clebsch_gordan(tw(2), tw(4), tw(2), tw(0), tw(2), tw(4)), std::invalid_argument);
  CHECK_THROWS_AS(rydgate::clebsch_gordan(tw(2), tw(1), tw(2), tw(0), tw(2), tw(1)), std::invalid_argument);
}

TEST_CASE("selection rules give exact zero") {
  CHECK(rydgate::clebsch_gordan(tw(2), tw(0), tw(2), tw(2), tw(2), tw(0)) == 0.0);
  CHECK(rydgate::clebsch_gordan(tw(1), tw(1), tw(1), tw(1), tw(6), tw(2)) == 0.0);
}

TEST_CASE("matches textbook closed forms for spin 1/2 and spin 1") {
  for (int j1 = 0; j1 <= 8; ++j1)
    for (int j2 : {1, 2})
      for (int J = std::abs(j1 - j2); J <= j1 + j2; J += 2)
        for (int m1 : projections(j1))
          for (int m2 : projections(j2)) {
            const int M = m1 + m2;
            if (std::abs(M) > J) continue;
            CAPTURE(j1);
            CAPTURE(m1);
            CAPTURE(j2);
            CAPTURE(m2);
            CAPTURE(J);
            CHECK(rydgate::clebsch_gordan(tw(j1), tw(m1), tw(j2), tw(m2), tw(J), tw(M)) ==
                  doctest::Approx(cg_table(j1, m1, j2, m2, J, M)).epsilon(1e-13));
          }
}

TEST_CASE("matches brute-force Racah sum up to j = 5") {
  for (int j1 = 0; j1 <= 10; ++j1)
    for (int j2 = 0; j2 <= 6; ++j2)
      for (int J = std::abs(j1 - j2); J <= j1 + j2; J += 2)
        for (int m1 : projections(j1))
          for (int m2 : projections(j2)) {
            if (std::abs(m1 + m2) > J) continue;
            const double lib = rydgate::clebsch_gordan(tw(j1), tw(m1), tw(j2), tw(m2), tw(J), tw(m1 + m2));
            CHECK(lib == doctest::Approx(racah_cg(j1, m1, j2, m2, J, m1 + m2)).epsilon(1e-11));
          }
}

TEST_CASE("orthogonality for j <= 3") {
  for (int j1 = 0; j1 <= 6; ++j1)
    for (int j2 = 0; j2 <= 6; ++j2)
      for (int J = std::abs(j1 - j2); J <= j1 + j2; J += 2)
        for (int Jp = std::abs(j1 - j2); Jp <= j1 + j2; Jp += 2)
          for (int M : projections(J)) {
            if (std::abs(M) > Jp) continue;
            double overlap = 0.0;
            for (int m1 : projections(j1)) {
              const int m2 = M - m1;
              if (std::abs(m2) > j2 || (j2 - m2) % 2 != 0) continue;
              overlap += rydgate::clebsch_gordan(tw(j1), tw(m1), tw(j2), tw(m2), tw(J), tw(M)) *
                         rydgate::clebsch_gordan(tw(j1), tw(m1), tw(j2), tw(m2), tw(Jp), tw(M));
            }
            CHECK(overlap == doctest::Approx(J == Jp ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
          }
}

TEST_CASE("6j triangle violation gives zero") {
  CHECK(rydgate::wigner_6j(tw(2), tw(2), tw(8), tw(2), tw(2), tw(2)) == 0.0);
  CHECK(rydgate::wigner_6j(tw(1), tw(1), tw(2), tw(1), tw(1), tw(4)) == 0.0);
}

TEST_CASE("6j with a zero entry") {
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; b <= 4; ++b)
      for (int c = std::abs(a - b); c <= a + b; c += 2) {
        const double phase = (((a + b + c) / 2) % 2 == 0) ? 1.0 : -1.0;
        const double closed = phase / std::sqrt((b + 1.0) * (c + 1.0));
        const double oracle = six_j_oracle(a, b, c, 0, c, b);
        CHECK(oracle == doctest::Approx(closed).epsilon(1e-12));
        CHECK(rydgate::wigner_6j(tw(a), tw(b), tw(c), tw(0), tw(c), tw(b)) == doctest::Approx(oracle).epsilon(1e-12));
      }
}

TEST_CASE("6j of four spin-1/2 entries") {
  const double oracle = six_j_oracle(1, 1, 2, 1, 1, 2);
  CHECK(oracle == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(rydgate::wigner_6j(tw(1), tw(1), tw(2), tw(1), tw(1), tw(2)) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("6j agrees with CG contraction on a range of arguments") {
  int checked = 0;
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; b <= 3; ++b)
      for (int c = std::abs(a - b); c <= a + b; c += 2)
        for (int d = 0; d <= 3; ++d)
          for (int e = 0; e <= 3; ++e)
            for (int f = 0; f <= 4; ++f) {
              if (!rydgate::triangle(tw(a), tw(e), tw(f)) || !rydgate::triangle(tw(d), tw(b), tw(f)) ||
                  !rydgate::triangle(tw(d), tw(e), tw(c)))
                continue;
              CHECK(rydgate::wigner_6j(tw(a), tw(b), tw(c), tw(d), tw(e), tw(f)) ==
                    doctest::Approx(six_j_oracle(a, b, c, d, e, f)).epsilon(1e-11).scale(1.0));
              ++checked;
            }
  CHECK(checked > 50);
}

TEST_CASE("6j symmetries") {
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; b <= 4; ++b)
      for (int c = std::abs(a - b); c <= a + b; c += 2)
        for (int d = 0; d <= 4; ++d)
          for (int e = 0; e <= 4; ++e)
            for (int f = 0; f <= 4; ++f) {
              const double v = rydgate::wigner_6j(tw(a), tw(b), tw(c), tw(d), tw(e), tw(f));
              // column permutations
              CHECK(rydgate::wigner_6j(tw(b), tw(a), tw(c), tw(e), tw(d), tw(f)) == doctest::Approx(v).epsilon(1e-12).scale(1.0));
              CHECK(rydgate::wigner_6j(tw(c), tw(b), tw(a), tw(f), tw(e), tw(d)) == doctest::Approx(v).epsilon(1e-12).scale(1.0));
              CHECK(rydgate::wigner_6j(tw(b), tw(c), tw(a), tw(e), tw(f), tw(d)) == doctest::Approx(v).epsilon(1e-12).scale(1.0));
              // upper/lower exchange in two columns
              CHECK(rydgate::wigner_6j(tw(d), tw(e), tw(c), tw(a), tw(b), tw(f)) == doctest::Approx(v).epsilon(1e-12).scale(1.0));
              CHECK(rydgate::wigner_6j(tw(a), tw(e), tw(f), tw(d), tw(b), tw(c)) == doctest::Approx(v).epsilon(1e-12).scale(1.0));
            }
}

namespace {

// Pumping weight composed from the textbook CG tables and the contraction 6j oracle.
double pumping_oracle(int F0p, int M0p, int F0, int M0, int Fp, int Mp, int F, int M) {
  const int q = M - M0;
  if (Mp - M0p != q || std::abs(q) > 2) return 0.0;
  const double cg = cg_table(F0p, M0p, 2, q, Fp, Mp) * cg_table(F0, M0, 2, q, F, M);
  const double phase = (((F0 - F0p) / 2) % 2 == 0) ? 1.0 : -1.0;
  return cg * phase * std::sqrt((F0p + 1.0) * (F0 + 1.0)) * 2.0 * six_j_oracle(1, 3, F0p, Fp, 2, 1) *
         six_j_oracle(1, 3, F0, F, 2, 1);
}

struct Level {
  int F;
  int M;
};

std::vector<Level> manifold() {
  std::vector<Level> out;
  for (int F : {2, 4})
    for (int M : projections(F)) out.push_back({F, M});
  return out;
}

double tensor(Level gp, Level g, Level ep, Level e) {
  return rydgate::pumping_tensor({tw(gp.F), tw(gp.M)}, {tw(g.F), tw(g.M)}, {tw(ep.F), tw(ep.M)}, {tw(e.F), tw(e.M)}, {});
}

}  // namespace

TEST_CASE("pumping tensor equals composed oracle for every Rb-87 index set") {
  const auto levels = manifold();
  for (const auto& gp : levels)
    for (const auto& g : levels)
      for (const auto& ep : levels)
        for (const auto& e : levels)
          CHECK(tensor(gp, g, ep, e) == doctest::Approx(pumping_oracle(gp.F, gp.M, g.F, g.M, ep.F, ep.M, e.F, e.M))
                                             .epsilon(1e-12)
                                             .scale(1.0));
}

TEST_CASE("pumping tensor vanishes when the photon polarisation differs") {
  CHECK(tensor({2, 0}, {2, 0}, {2, 2}, {2, 0}) == 0.0);
  CHECK(tensor({4, 2}, {2, 0}, {4, 2}, {2, 2}) == 0.0);
}

TEST_CASE("pumping tensor diagonal is nonnegative and completes to unity") {
  const auto levels = manifold();
  for (const auto& e : levels) {
    double total = 0.0;
    for (const auto& g : levels) {
      const double v = tensor(g, g, e, e);
      CHECK(v >= -1e-15);
      total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (const auto& ep : levels)
    for (const auto& e : levels) {
      if (ep.F == e.F && ep.M == e.M) continue;
      double total = 0.0;
      for (const auto& g : levels) total += tensor(g, g, ep, e);
      CHECK(total == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    }
}
