#pragma once

#include <compare>
#include <string>

namespace rydgate {

// Angular momentum quantum number stored as twice its value so that
// half-integers stay exact.
class HalfInt {
 public:
  constexpr HalfInt() = default;
  static constexpr HalfInt from_twice(int twice) { return HalfInt(twice); }
  static constexpr HalfInt integer(int value) { return HalfInt(2 * value); }
  static constexpr HalfInt half(int odd_numerator) { return HalfInt(odd_numerator); }

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  constexpr HalfInt operator-() const { return HalfInt(-twice_); }
  constexpr HalfInt operator+(HalfInt o) const { return HalfInt(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return HalfInt(twice_ - o.twice_); }
  constexpr auto operator<=>(const HalfInt&) const = default;

  std::string str() const;

 private:
  constexpr explicit HalfInt(int twice) : twice_(twice) {}
  int twice_ = 0;
};

// Throws std::invalid_argument unless j >= 0, |m| <= j and j - m is integral.
void require_valid_pair(HalfInt j, HalfInt m);

bool triangle(HalfInt a, HalfInt b, HalfInt c);

// <j1 m1 j2 m2 | J M>, Condon-Shortley phase convention.
double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M);

// {j1 j2 j3; j4 j5 j6}
double wigner_6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6);

struct HyperfineSublevel {
  HalfInt F;
  HalfInt M;
};

// Electron spin, nuclear spin and electronic angular momentum of the
// excited fine-structure level, shared by all hyperfine sublevels.
struct FineStructure {
  HalfInt S = HalfInt::half(1);
  HalfInt I = HalfInt::half(3);
  HalfInt J = HalfInt::half(1);
};

// Geometric weight of the spontaneous transfer |n'><n| -> |m'><m| summed over
// the emitted photon polarisation q. ground_* are the repopulated sublevels,
// excited_* the intermediate sublevels.
double pumping_tensor(HyperfineSublevel ground_prime, HyperfineSublevel ground,
                      HyperfineSublevel excited_prime, HyperfineSublevel excited,
                      const FineStructure& fs);

}  // namespace rydgate
