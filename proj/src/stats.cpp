#include "stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>

namespace coordsim {

double chi_square_pvalue(const std::vector<long long>& observed,
                         const std::vector<double>& expected) {
  if (observed.size() != expected.size() || observed.empty())
    throw std::invalid_argument("chi_square_pvalue: size mismatch");
  double stat = 0.0;
  int df = -1;  // one constraint: totals agree
  for (size_t k = 0; k < observed.size(); ++k) {
    if (expected[k] <= 0.0) {
      if (observed[k] != 0)
        throw std::invalid_argument("chi_square_pvalue: observation in a zero-probability bin");
      continue;
    }
    double diff = static_cast<double>(observed[k]) - expected[k];
    stat += diff * diff / expected[k];
    ++df;
  }
  if (df < 1) throw std::invalid_argument("chi_square_pvalue: not enough bins");
  boost::math::chi_squared dist(static_cast<double>(df));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace coordsim
