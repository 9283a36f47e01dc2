#include "svrmm/theory.hpp"

#include <string>

#include "svrmm/errors.hpp"

namespace svrmm {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Saga:
      return "mm-saga";
    case Method::Svrg:
      return "mm-svrg";
    case Method::Sarah:
      return "mm-sarah";
    case Method::Full:
      return "mm-full";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  if (s.starts_with("mm-")) s.remove_prefix(3);
  if (s == "saga") return Method::Saga;
  if (s == "svrg") return Method::Svrg;
  if (s == "sarah") return Method::Sarah;
  if (s == "full") return Method::Full;
  throw ConfigError("unknown method '" + std::string(s) + "'");
}

TheoryConstants TheoryConstants::make(Method method, double mu, double L, std::size_t n, std::size_t b,
                                      std::size_t m) {
  TheoryConstants c;
  c.method = method;
  c.mu = mu;
  c.L = L;
  c.n = n;
  c.b = b;
  c.m = m;
  const double nn = static_cast<double>(n);
  const double bb = static_cast<double>(b);
  const double mm = static_cast<double>(m);
  const double L2 = L * L;
  switch (method) {
    case Method::Saga:
      c.rho = bb / (2.0 * nn);
      c.v_upsilon = (2.0 * nn - bb) * L2 / (bb * bb);
      c.v = 0.0;
      break;
    case Method::Svrg:
      c.rho = 1.0 / (2.0 * mm);
      c.v_upsilon = (2.0 * mm - 1.0) * L2 / bb;
      c.v = 0.0;
      break;
    case Method::Sarah:
      c.rho = 1.0 / mm;
      c.v_upsilon = (mm - 1.0) * L2 / (mm * bb);
      c.v = L2 / bb;
      break;
    case Method::Full:
      c.rho = 1.0;
      c.v_upsilon = 0.0;
      c.v = 0.0;
      break;
  }
  return c;
}

double TheoryConstants::condition_margin() const {
  const double lhs = (2.0 * mu - L) * (2.0 * mu - L);
  return lhs - 4.0 * (v + v_upsilon / rho);
}

}  // namespace svrmm
