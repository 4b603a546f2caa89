#pragma once

namespace iterfac {

// Scaled complementary error function exp(x^2) * erfc(x), x >= 0.
double erfcx_positive(double x);

double norm_pdf(double z);
double norm_cdf(double z);

// log(Phi(z)), stable far into the lower tail.
double norm_logcdf(double z);

// phi(z) / Phi(z) (inverse Mills ratio); ~ -z as z -> -infinity.
double mills_inv(double z);

// z^2/2 + log(Phi(z)), stable for z << 0 (where the two terms cancel).
double half_square_plus_logcdf(double z);

// log(1/(1+exp(-x))), stable in both tails.
double log_sigmoid(double x);

}  // namespace iterfac
