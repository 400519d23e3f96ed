#include "qrv/numeric.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "qrv/error.hpp"

namespace qrv {

namespace {
const boost::math::normal_distribution<double> kStdNormal{0.0, 1.0};
const boost::math::chi_squared_distribution<double> kChi2One{1.0};
}  // namespace

double compensated_sum(std::span<const double> xs) noexcept {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

double normal_pdf(double x) { return boost::math::pdf(kStdNormal, x); }
double normal_cdf(double x) { return boost::math::cdf(kStdNormal, x); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal_quantile: p must lie in (0, 1)");
  return boost::math::quantile(kStdNormal, p);
}

double chi2_1_pdf(double x) { return x <= 0.0 ? 0.0 : boost::math::pdf(kChi2One, x); }

double chi2_1_quantile(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("chi2_1_quantile: p must lie in [0, 1)");
  return boost::math::quantile(kChi2One, p);
}

double normal_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0))
    throw ConfigError("confidence level must lie in the open interval (0, 1)");
  return normal_quantile(0.5 + 0.5 * level);
}

}  // namespace qrv
