#include "balnet/quadrature.hpp"

namespace balnet {

const GaussHermiteRule<double>& default_rule() {
  static const GaussHermiteRule<double> rule(kDefaultQuadratureOrder);
  return rule;
}

}  // namespace balnet
