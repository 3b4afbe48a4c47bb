#pragma once

namespace sbm::special {

// Exponential integral E1(x) = int_x^inf e^{-s}/s ds, x > 0.
double expint_e1(double x);

// Exponentially scaled modified Bessel function e^{-z} I_0(z), z >= 0.
double bessel_i0e(double z);

// Modified Bessel function of the second kind K_0(z), z > 0.
double bessel_k0(double z);

// int_0^t (2 pi s)^{-1/2} exp(-c^2 / 2s) ds
//   = sqrt(2t/pi) exp(-c^2/2t) - c erfc(c / sqrt(2t)),   c >= 0.
double gauss_time_integral(double c, double t);

}  // namespace sbm::special
